//! Continuous instances: a piecewise-linear value function v with d(c) = v(c)/c.

use crate::error::{Error, Result};
use crate::scalar::{int_to_scalar, Scalar};
use crate::separable::SeparableInstance;

pub const DEFAULT_TILT: f64 = 1e-9;
pub const MAX_GREEDY_STEPS: usize = 100_000;

/// Breakpoints start at the origin; beyond the last one v continues with `extend_slope`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearValue<T> {
    points: Vec<(T, T)>,
    extend_slope: T,
    /// Factor the input values were divided by so that d(0) = 1.
    pub rescaled_by: T,
}

impl<T: Scalar> PiecewiseLinearValue<T> {
    /// Validates monotonicity of v and d. A missing origin is prepended; if the first
    /// segment's slope is not 1 the values are rescaled so that it is.
    pub fn new(breakpoints: Vec<(T, T)>, extend_slope: Option<T>) -> Result<Self> {
        let mut points = breakpoints;
        if points.first().map_or(true, |p| !p.0.is_zero()) {
            points.insert(0, (T::zero(), T::zero()));
        }
        if points.len() < 2 {
            return Err(Error::InvalidBreakpoints("need at least one positive breakpoint".into()));
        }
        if !points[0].1.is_zero() {
            return Err(Error::InvalidBreakpoints("v(0) must be 0".into()));
        }
        let slope = points[1].1.clone() / points[1].0.clone();
        if slope <= T::zero() {
            return Err(Error::InvalidBreakpoints("first segment must rise".into()));
        }
        if !slope.is_one() {
            for p in &mut points {
                p.1 = p.1.clone() / slope.clone();
            }
        }
        let extend_slope = extend_slope.map(|s| s / slope.clone());
        Self::from_normalized(points, extend_slope, slope)
    }

    fn from_normalized(points: Vec<(T, T)>, extend_slope: Option<T>, rescaled_by: T) -> Result<Self> {
        for (k, w) in points.windows(2).enumerate() {
            let ((c0, v0), (c1, v1)) = (&w[0], &w[1]);
            if c1 <= c0 {
                return Err(Error::InvalidBreakpoints(format!("sizes not increasing at {}", k + 1)));
            }
            if v1 < v0 {
                return Err(Error::InvalidBreakpoints(format!("value decreases at {}", k + 1)));
            }
            // d non-increasing on the segment iff its line has non-negative intercept
            let intercept = v0.clone() - (v1.clone() - v0.clone()) / (c1.clone() - c0.clone()) * c0.clone();
            if intercept < T::zero() - T::slack(v0) {
                return Err(Error::InvalidBreakpoints(format!("density increases at {}", k + 1)));
            }
        }
        let (cl, vl) = points.last().cloned().expect("len >= 2");
        let (cp, vp) = points[points.len() - 2].clone();
        let slope = extend_slope.unwrap_or_else(|| (vl.clone() - vp) / (cl.clone() - cp));
        if slope < T::zero() || vl.clone() - slope.clone() * cl < T::zero() - T::slack(&vl) {
            return Err(Error::InvalidBreakpoints("extension slope out of range".into()));
        }
        Ok(PiecewiseLinearValue { points, extend_slope: slope, rescaled_by })
    }

    /// v(c) = c.
    pub fn identity() -> Self {
        Self::new(vec![(T::one(), T::one())], None).expect("valid")
    }

    /// v interpolating c^theta on a geometric grid from 1 to `max_size`, v(c) = c below 1.
    pub fn power_law(theta: f64, ratio: f64, max_size: f64) -> Self {
        let mut pts = vec![(T::one(), T::one())];
        let mut c = 1.0f64;
        while c < max_size {
            c *= ratio;
            pts.push((T::from_float(c), T::from_float(c.powf(theta))));
        }
        Self::new(pts, None).expect("concave power law is valid")
    }

    /// Monotone continuization of a normalized separable instance:
    /// v(c) = max(v_{i-1}, c d_i) on [i-1, i].
    pub fn envelope(instance: &SeparableInstance<T>) -> Result<Self> {
        let dens = instance.densities();
        let vals = instance.values();
        let mut pts = Vec::new();
        let mut prev = T::zero();
        for (i, (d, v)) in dens.iter().zip(&vals).enumerate() {
            let lo: T = int_to_scalar(i);
            let kink = prev.clone() / d.clone();
            if kink > lo && kink < int_to_scalar::<T>(i + 1) {
                pts.push((kink, prev.clone()));
            }
            // i * (v_{i-1}/i) may round below v_{i-1}
            let v = T::max_of(v.clone(), prev.clone());
            pts.push((int_to_scalar(i + 1), v.clone()));
            prev = v;
        }
        Self::new(pts, None)
    }

    /// Linear interpolation of the values v_i at the integers.
    pub fn linear_interpolation(instance: &SeparableInstance<T>) -> Result<Self> {
        let pts = instance
            .values()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (int_to_scalar(i + 1), v))
            .collect();
        Self::new(pts, None)
    }

    pub fn breakpoints(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn extend_slope(&self) -> &T {
        &self.extend_slope
    }

    pub fn last_size(&self) -> T {
        self.points.last().expect("non-empty").0.clone()
    }

    pub fn has_plateaus(&self) -> bool {
        self.points.windows(2).any(|w| w[0].1 == w[1].1) || self.extend_slope.is_zero()
    }

    /// Adds `tau * c` to v, making plateaus strictly increasing.
    pub fn tilted(&self, tau: T) -> Self {
        PiecewiseLinearValue {
            points: self
                .points
                .iter()
                .map(|(c, v)| (c.clone(), v.clone() + tau.clone() * c.clone()))
                .collect(),
            extend_slope: self.extend_slope.clone() + tau,
            rescaled_by: self.rescaled_by.clone(),
        }
    }

    /// Index k with points[k].0 <= c < points[k+1].0, or the last index.
    fn segment_of(&self, c: &T) -> usize {
        let k = self.points.partition_point(|p| p.0 <= *c);
        k.saturating_sub(1)
    }

    pub fn value_at(&self, c: &T) -> T {
        if *c <= T::zero() {
            return T::zero();
        }
        let k = self.segment_of(c);
        let (c0, v0) = &self.points[k];
        let slope = if k + 1 < self.points.len() {
            let (c1, v1) = &self.points[k + 1];
            (v1.clone() - v0.clone()) / (c1.clone() - c0.clone())
        } else {
            self.extend_slope.clone()
        };
        v0.clone() + slope * (c.clone() - c0.clone())
    }

    pub fn density_at(&self, c: &T) -> T {
        if *c <= T::zero() {
            let (c1, v1) = &self.points[1];
            return v1.clone() / c1.clone();
        }
        self.value_at(c) / c.clone()
    }

    /// Largest size whose value does not exceed `level`.
    pub fn max_size_with_value_at_most(&self, level: &T) -> Result<T> {
        let k = self.points.partition_point(|p| p.1 <= *level);
        if k == self.points.len() {
            let (cl, vl) = self.points.last().expect("non-empty");
            if self.extend_slope.is_zero() {
                return Err(Error::DomainExhausted(vl.as_f64()));
            }
            return Ok(cl.clone() + (level.clone() - vl.clone()) / self.extend_slope.clone());
        }
        if k == 0 {
            return Ok(T::zero());
        }
        let (c0, v0) = &self.points[k - 1];
        let (c1, v1) = &self.points[k];
        Ok(c0.clone() + (level.clone() - v0.clone()) / (v1.clone() - v0.clone()) * (c1.clone() - c0.clone()))
    }

    /// p(c) = max{c' : v(c') <= rho v(c)}.
    pub fn reach(&self, c: &T, rho: &T) -> Result<T> {
        self.max_size_with_value_at_most(&(rho.clone() * self.value_at(c)))
    }

    /// max{c : d(c) >= y}; `None` when no such c exists or the set is unbounded.
    pub fn invert_density(&self, y: &T) -> Option<T> {
        if *y <= T::zero() || *y > self.density_at(&T::zero()) {
            return None;
        }
        let dens: Vec<T> = self.points[1..].iter().map(|(c, v)| v.clone() / c.clone()).collect();
        // last breakpoint (1-based into points) whose density is still >= y
        let k = dens.partition_point(|d| *d >= *y);
        if k == dens.len() {
            if *y <= self.extend_slope {
                return None;
            }
            let (cl, vl) = self.points.last().expect("non-empty");
            let intercept = vl.clone() - self.extend_slope.clone() * cl.clone();
            return Some(intercept / (y.clone() - self.extend_slope.clone()));
        }
        let (c0, v0) = &self.points[k];
        let (c1, v1) = &self.points[k + 1];
        let b = (v1.clone() - v0.clone()) / (c1.clone() - c0.clone());
        let a = v0.clone() - b.clone() * c0.clone();
        Some(a / (y.clone() - b))
    }
}

/// Appends construction points after `points[0]`, which must lie on `base`.
pub fn build_from_points<T: Scalar>(
    base: &PiecewiseLinearValue<T>,
    points: &[(T, T)],
) -> Result<PiecewiseLinearValue<T>> {
    let Some((x0, v0)) = points.first() else {
        return Err(Error::InvalidPoints("no points".into()));
    };
    if *x0 <= T::zero() || !T::eq_tol(&base.value_at(x0), v0) {
        return Err(Error::InvalidPoints("first point must lie on the base function".into()));
    }
    for (i, w) in points.windows(2).enumerate() {
        let ((xa, va), (xb, vb)) = (&w[0], &w[1]);
        if vb <= va {
            return Err(Error::InvalidPoints(format!("v_{} < v_{} violated", i, i + 1)));
        }
        if *vb >= xb.clone() / xa.clone() * va.clone() {
            return Err(Error::InvalidPoints(format!("v_{} < (x_{}/x_{}) v_{} violated", i + 1, i + 1, i, i)));
        }
    }
    let mut pts: Vec<(T, T)> = base
        .points
        .iter()
        .filter(|p| p.0 < *x0)
        .cloned()
        .collect();
    pts.extend(points.iter().cloned());
    let extend = if points.len() >= 2 { None } else { Some(base.extend_slope.clone()) };
    let extend = extend.map(|s| T::min_of(s, v0.clone() / x0.clone()));
    PiecewiseLinearValue::from_normalized(pts, extend, base.rescaled_by.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    FirstDensityBelowThreshold,
    ReachNotBeyondPrefix,
    TargetDensityOutOfRange,
    SizeNotIncreasing,
    DomainExhausted,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GreedyStatus {
    HorizonReached,
    NotCompetitive(StopReason),
}

#[derive(Clone, Debug)]
pub struct GreedyStep<T> {
    pub size: T,
    pub density: T,
    pub value: T,
    pub reach: Option<T>,
    pub prefix_sum: T,
}

#[derive(Clone, Debug)]
pub struct GreedyRun<T> {
    pub sizes: Vec<T>,
    pub steps: Vec<GreedyStep<T>>,
    /// Densities demanded by the greedy rule, one per attempted step after the first.
    pub targets: Vec<T>,
    pub status: GreedyStatus,
    /// Whether the plateau tilt was applied.
    pub tilted: bool,
}

#[derive(Clone, Debug)]
pub struct GreedyOptions {
    /// Relative tilt applied when v has plateaus; `None` disables it.
    pub tilt: Option<f64>,
    pub max_steps: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { tilt: Some(DEFAULT_TILT), max_steps: MAX_GREEDY_STEPS }
    }
}

pub fn greedy_scaling<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    c1: &T,
    rho: &T,
    horizon: &T,
) -> Result<GreedyRun<T>> {
    greedy_scaling_with(f, c1, rho, horizon, &GreedyOptions::default())
}

/// Chooses each next size so that d(c_{i+1}) = v(c_i) / (p(c_i) - sum_{j<=i} c_j).
pub fn greedy_scaling_with<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    c1: &T,
    rho: &T,
    horizon: &T,
    opts: &GreedyOptions,
) -> Result<GreedyRun<T>> {
    if *c1 <= T::zero() {
        return Err(Error::InvalidStart);
    }
    let tilt = opts.tilt.filter(|_| f.has_plateaus());
    let g = match tilt {
        Some(t) => {
            let last = f.points.last().expect("non-empty");
            f.tilted(T::from_float(t) * last.1.clone() / last.0.clone())
        }
        None => f.clone(),
    };
    let mut run = GreedyRun {
        sizes: vec![c1.clone()],
        steps: Vec::new(),
        targets: Vec::new(),
        status: GreedyStatus::HorizonReached,
        tilted: tilt.is_some(),
    };
    let mut prefix = T::zero();
    let stop = |mut run: GreedyRun<T>, why| {
        run.status = GreedyStatus::NotCompetitive(why);
        Ok(run)
    };
    if !T::ge_tol(&(rho.clone() * g.density_at(c1)), &T::one()) {
        run.steps.push(step(&g, c1, rho, prefix + c1.clone()));
        return stop(run, StopReason::FirstDensityBelowThreshold);
    }
    loop {
        let c = run.sizes.last().expect("non-empty").clone();
        prefix = prefix + c.clone();
        let st = step(&g, &c, rho, prefix.clone());
        let reach = st.reach.clone();
        let value = st.value.clone();
        run.steps.push(st);
        if prefix >= *horizon {
            return Ok(run);
        }
        if run.sizes.len() >= opts.max_steps {
            return stop(run, StopReason::IterationCap);
        }
        let Some(p) = reach else {
            return stop(run, StopReason::DomainExhausted);
        };
        if p <= prefix {
            return stop(run, StopReason::ReachNotBeyondPrefix);
        }
        let target = value / (p - prefix.clone());
        run.targets.push(target.clone());
        let Some(next) = g.invert_density(&target) else {
            return stop(run, StopReason::TargetDensityOutOfRange);
        };
        if next <= c {
            return stop(run, StopReason::SizeNotIncreasing);
        }
        run.sizes.push(next);
    }
}

fn step<T: Scalar>(f: &PiecewiseLinearValue<T>, c: &T, rho: &T, prefix_sum: T) -> GreedyStep<T> {
    GreedyStep {
        size: c.clone(),
        density: f.density_at(c),
        value: f.value_at(c),
        reach: f.reach(c, rho).ok(),
        prefix_sum,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// d(c_1) < 1/rho.
    FirstDensity,
    /// p(c_i) <= c_1 + ... + c_i.
    ReachNotBeyondPrefix,
    /// d(c_i) < v(c_{i-1}) / (p(c_{i-1}) - c_1 - ... - c_{i-1}).
    DensityTooSmall,
    SizesNotPositive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompetitivenessVerdict<T> {
    pub ok: bool,
    /// 1-based block index and the failed condition.
    pub first_violation: Option<(usize, Violation)>,
    /// Sizes up to which the checked conditions certify rho-competitiveness;
    /// `None` when v is bounded and the certificate never runs out.
    pub covered_up_to: Option<T>,
}

pub fn check_competitive<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    solution: &[T],
    rho: &T,
) -> CompetitivenessVerdict<T> {
    let fail = |i, why, covered| CompetitivenessVerdict { ok: false, first_violation: Some((i, why)), covered_up_to: covered };
    if solution.is_empty() || solution.iter().any(|c| *c <= T::zero()) {
        return fail(1, Violation::SizesNotPositive, Some(T::zero()));
    }
    if !T::ge_tol(&(rho.clone() * f.density_at(&solution[0])), &T::one()) {
        return fail(1, Violation::FirstDensity, Some(T::zero()));
    }
    let mut prefix = T::zero();
    let mut covered = Some(T::zero());
    for (i, c) in solution.iter().enumerate() {
        prefix = prefix + c.clone();
        // a bounded v makes the reach infinite, which settles both conditions
        let Ok(p) = f.reach(c, rho) else {
            covered = None;
            continue;
        };
        covered = Some(p.clone());
        if !T::gt_tol(&p, &prefix) {
            return fail(i + 1, Violation::ReachNotBeyondPrefix, covered);
        }
        if let Some(next) = solution.get(i + 1) {
            let need = f.value_at(c);
            let have = f.density_at(next) * (p - prefix.clone());
            if !T::ge_tol(&have, &need) {
                return fail(i + 2, Violation::DensityTooSmall, covered);
            }
        }
    }
    CompetitivenessVerdict { ok: true, first_violation: None, covered_up_to: covered }
}

/// max{ max_{i<n} v(c_i), (c - sum_{i<n} c_i) d(c_n) } with n the block active at size c.
pub fn evaluate_continuous<T: Scalar>(f: &PiecewiseLinearValue<T>, solution: &[T], c: &T) -> T {
    let mut best = T::zero();
    let mut prefix = T::zero();
    for ci in solution {
        if *c <= prefix.clone() + ci.clone() {
            let partial = (c.clone() - prefix) * f.density_at(ci);
            return T::max_of(best, T::max_of(partial, T::zero()));
        }
        best = T::max_of(best, f.value_at(ci));
        prefix = prefix + ci.clone();
    }
    best
}

/// Separable instance with d_i = v(i/n)/i, so that v_i = v(i/n).
pub fn discretize<T: Scalar>(f: &PiecewiseLinearValue<T>, n: usize, count: usize) -> Result<SeparableInstance<T>> {
    if n == 0 || count == 0 {
        return Err(Error::InvalidParameter("granularity and N must be positive".into()));
    }
    let dens = (1..=count)
        .map(|i| f.value_at(&(int_to_scalar::<T>(i) / int_to_scalar::<T>(n))) / int_to_scalar::<T>(i))
        .collect();
    SeparableInstance::from_densities(dens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separable::observation_instance;
    use crate::Exact;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Exact {
        Exact::ratio(p, d)
    }

    fn obs_cont() -> PiecewiseLinearValue<Exact> {
        PiecewiseLinearValue::envelope(&observation_instance()).unwrap()
    }

    #[test]
    fn identity_basics() {
        let f = PiecewiseLinearValue::<f64>::identity();
        assert_eq!(f.value_at(&0.0), 0.0);
        assert_eq!(f.value_at(&7.5), 7.5);
        assert_eq!(f.density_at(&0.0), 1.0);
        assert!((f.reach(&3.0, &2.5).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn rescales_first_segment() {
        let f = PiecewiseLinearValue::new(vec![(2.0, 4.0), (4.0, 6.0)], None).unwrap();
        assert_eq!(f.rescaled_by, 2.0);
        assert_eq!(f.value_at(&4.0), 3.0);
        assert!(PiecewiseLinearValue::new(vec![(1.0, 1.0), (2.0, 3.0)], None).is_err());
        assert!(PiecewiseLinearValue::new(vec![(1.0, 1.0), (0.5, 1.0)], None).is_err());
    }

    #[test]
    fn observation_continuization() {
        let f = obs_cont();
        assert_eq!(f.value_at(&q(4, 1)), q(17, 10));
        assert_eq!(f.reach(&q(4, 1), &q(57, 40)).unwrap(), q(268, 17));
        let sol = vec![q(40, 57), q(4, 1), q(12, 1) - q(40, 57)];
        let verdict = check_competitive(&f, &sol, &q(57, 40));
        assert!(verdict.ok, "{verdict:?}");
        let back = discretize(&f, 1, 16).unwrap();
        assert_eq!(back, observation_instance());
    }

    #[test]
    fn linear_interpolation_misses_the_observation_solution() {
        let f = PiecewiseLinearValue::linear_interpolation(&observation_instance::<Exact>()).unwrap();
        let sol = vec![q(40, 57), q(4, 1), q(12, 1) - q(40, 57)];
        let v = check_competitive(&f, &sol, &q(57, 40));
        assert_eq!(v.first_violation, Some((2, Violation::DensityTooSmall)));
        assert_eq!(f.reach(&q(40, 57), &q(57, 40)).unwrap(), q(2, 1));
    }

    #[test]
    fn reach_on_plateau_is_right_endpoint() {
        let f = PiecewiseLinearValue::new(vec![(q(1, 1), q(1, 1)), (q(3, 1), q(1, 1)), (q(6, 1), q(2, 1))], None).unwrap();
        assert_eq!(f.reach(&q(1, 2), &q(2, 1)).unwrap(), q(3, 1));
        assert_eq!(f.max_size_with_value_at_most(&q(3, 2)).unwrap(), q(9, 2));
    }

    #[test]
    fn bounded_value_exhausts_domain() {
        let f = PiecewiseLinearValue::new(vec![(1.0, 1.0), (2.0, 1.0)], None).unwrap();
        assert!(matches!(f.reach(&1.0, &2.0), Err(Error::DomainExhausted(_))));
    }

    #[test]
    fn density_inversion_by_hand() {
        // segments: (0,0)-(1,1)-(2,1.5)-(4,2); ext slope 0.25
        let f = PiecewiseLinearValue::<f64>::new(vec![(1.0, 1.0), (2.0, 1.5), (4.0, 2.0)], None).unwrap();
        // on (1,2): v = 0.5 + 0.5c, d = 0.5/c + 0.5 = 0.8 at c = 5/3
        assert!((f.invert_density(&0.8).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        // on (2,4): v = 1 + 0.25c, d = 1/c + 0.25 = 0.6 at c = 1/0.35
        assert!((f.invert_density(&0.6).unwrap() - 1.0 / 0.35).abs() < 1e-12);
        // beyond: same line, d = 0.4 at c = 1/0.15
        assert!((f.invert_density(&0.4).unwrap() - 1.0 / 0.15).abs() < 1e-12);
        assert_eq!(f.invert_density(&1.0), Some(1.0));
        assert_eq!(f.invert_density(&0.25), None);
        assert_eq!(f.invert_density(&1.5), None);
    }

    #[test]
    fn greedy_second_size_by_hand() {
        let f = PiecewiseLinearValue::<f64>::new(vec![(1.0, 1.0), (2.0, 1.5), (4.0, 2.0)], None).unwrap();
        let rho: f64 = 2.0;
        let run = greedy_scaling::<f64>(&f, &0.5, &rho, &3.0).unwrap();
        // p(0.5): v = 1 lies at c = 1 (plateau-free) -> p = 1; target = 0.5 / (1 - 0.5) = 1
        assert_eq!(run.targets[0], 1.0);
        assert_eq!(run.sizes[1], 1.0);
        // p(1): v = 2 at c = 4; target = 1 / (4 - 1.5) = 0.4 -> c = 1/0.15
        assert!((run.targets[1] - 0.4).abs() < 1e-12);
        assert!((run.sizes[2] - 1.0 / 0.15).abs() < 1e-9);
        assert_eq!(run.status, GreedyStatus::HorizonReached);
    }

    #[test]
    fn greedy_rejects_bad_start() {
        let f = PiecewiseLinearValue::<f64>::identity();
        assert!(matches!(greedy_scaling(&f, &0.0, &2.0, &10.0), Err(Error::InvalidStart)));
    }

    #[test]
    fn greedy_on_power_law_at_threshold() {
        let f = PiecewiseLinearValue::<f64>::power_law(0.9, 1.5, 1e12);
        let rho = crate::PHI_PLUS_ONE;
        let run = greedy_scaling(&f, &1.0, &rho, &1e8).unwrap();
        assert_eq!(run.status, GreedyStatus::HorizonReached);
        for w in run.sizes.windows(2) {
            assert!(w[1] >= rho * w[0] * (1.0 - 1e-9));
        }
        assert!(check_competitive(&f, &run.sizes, &rho).ok);
        // start with too small a density
        let c1 = f.invert_density(&(0.9 / rho)).unwrap();
        let run = greedy_scaling(&f, &c1, &rho, &1e8).unwrap();
        assert_eq!(run.status, GreedyStatus::NotCompetitive(StopReason::FirstDensityBelowThreshold));
        assert_eq!(check_competitive(&f, &run.sizes, &rho).first_violation, Some((1, Violation::FirstDensity)));
    }

    #[test]
    fn builder_checks_inequalities() {
        let base = PiecewiseLinearValue::<f64>::identity();
        assert!(build_from_points(&base, &[(1.0, 1.0), (3.0, 2.0)]).is_ok());
        let err = build_from_points(&base, &[(1.0, 1.0), (3.0, 3.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoints(_)));
        let f = build_from_points(&base, &[(1.0, 1.0), (3.0, 2.0), (5.0, 3.0)]).unwrap();
        assert_eq!(f.value_at(&0.5), 0.5);
        assert!((f.value_at(&2.0) - 1.5).abs() < 1e-15);
        assert!((f.value_at(&7.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_continuous_blocks() {
        let f = PiecewiseLinearValue::<f64>::power_law(0.5, 2.0, 1e4);
        let sol = [1.0, 4.0, 16.0];
        assert!((evaluate_continuous(&f, &sol, &0.5) - 0.5).abs() < 1e-15);
        assert_eq!(evaluate_continuous(&f, &sol, &21.0), f.value_at(&16.0));
        assert_eq!(evaluate_continuous(&f, &sol, &0.0), 0.0);
        let mid = evaluate_continuous(&f, &sol, &3.0);
        assert!((mid - f64::max(1.0, 2.0 * f.density_at(&4.0))).abs() < 1e-15);
    }

    #[test]
    fn discretize_identity() {
        let f = PiecewiseLinearValue::<Exact>::identity();
        assert_eq!(discretize(&f, 1, 5).unwrap().densities(), vec![q(1, 1); 5]);
    }

    fn arb_pl() -> impl Strategy<Value = PiecewiseLinearValue<f64>> {
        // random concave chain: slopes decreasing, first slope 1
        prop::collection::vec((0.2f64..3.0, 0.0f64..1.0), 1..8).prop_map(|segs| {
            let mut pts = vec![(1.0, 1.0)];
            let mut slope: f64 = 1.0;
            for (len, shrink) in segs {
                slope *= shrink;
                let (c, v) = *pts.last().unwrap();
                pts.push((c + len, v + slope * len));
            }
            PiecewiseLinearValue::new(pts, Some(slope.max(1e-3) * 0.5)).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reach_solves_the_level(f in arb_pl(), c in 0.01f64..8.0, rho in 1.0f64..3.0) {
            let p = f.reach(&c, &rho).unwrap();
            let target = rho * f.value_at(&c);
            prop_assert!((f.value_at(&p) - target).abs() <= 1e-12 * target.max(1.0));
            prop_assert!(f.value_at(&(p + 1e-9)) > target || f.extend_slope().abs() < 1e-300);
        }

        #[test]
        fn reach_is_monotone(f in arb_pl(), a in 0.01f64..8.0, b in 0.01f64..8.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(f.reach(&lo, &2.0).unwrap() <= f.reach(&hi, &2.0).unwrap());
        }

        #[test]
        fn midpoints_interpolate(f in arb_pl(), t in 0.0f64..1.0) {
            for w in f.breakpoints().windows(2) {
                let c = w[0].0 + t * (w[1].0 - w[0].0);
                let expect = w[0].1 + t * (w[1].1 - w[0].1);
                prop_assert!((f.value_at(&c) - expect).abs() < 1e-12);
            }
        }

        #[test]
        fn discretized_values_match(f in arb_pl(), n in 1usize..5) {
            let inst = discretize(&f, n, 12).unwrap();
            for (i, v) in inst.values().iter().enumerate() {
                let at = f.value_at(&((i + 1) as f64 / n as f64));
                prop_assert!((v - at).abs() <= 1e-15 * at.max(1.0));
            }
        }

        #[test]
        fn invert_then_density(f in arb_pl(), y in 0.05f64..1.0) {
            if let Some(c) = f.invert_density(&y) {
                prop_assert!((f.density_at(&c) - y).abs() < 1e-12);
            }
        }
    }
}
