//! RandomizedScaling: sizes floor(r^{i+eps}) for one uniform eps, the objective g
//! whose maximizer fixes r, and the bounds on the expected value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::separable::{evaluate, SeparableInstance};
use crate::Scalar;

/// Entries c_0 .. c_4 decide the value at every size up to sum_{i<=3} r^i.
const SMALL_C_ENTRIES: usize = 5;
pub const QUADRATURE_TOL: f64 = 1e-10;

fn log_base(r: f64, y: f64) -> f64 {
    y.ln() / r.ln()
}

/// z = log_x((x^4 - 1)/(x - 1) - 1) - 3.
fn z_of(x: f64) -> f64 {
    log_base(x, (x.powi(4) - 1.0) / (x - 1.0) - 1.0) - 3.0
}

pub fn g_of(x: f64) -> f64 {
    let l = x.ln();
    let lg = |y: f64| y.ln() / l;
    let z = z_of(x);
    let a = (x.powi(3) - 1.0) / (x - 1.0) * x.powf(z);
    let s = ((a - 1.0).powi(2) + 4.0 * x.powf(5.0 + 2.0 * z)).sqrt();
    let q = (1.0 - x.powi(-3)) / (x - 1.0);
    (1.0 - s) / (2.0 * l * x.powf(3.0 + z)) - (1.0 - z) * q + z - q / (2.0 * l)
        - (q - x.powf(-(3.0 + z))) * (lg(s - a + 1.0) - lg(2.0) - 3.0)
        - 2.0 * x.powf(2.0 + z) / ((s - a + 1.0) * l)
        + 2.0 / l
        - (1.0 + x.powf(-(3.0 + z))) * (lg(x.powf(3.0 + z) + 1.0) + lg(x - 1.0) - lg(x.powi(4) - 1.0))
}

/// The same function written as a sum of named terms.
pub fn g_terms(x: f64) -> f64 {
    let ln_x = x.ln();
    let geometric3 = 1.0 + x + x * x;
    let z = ((1.0 + x + x * x + x * x * x) - 1.0).ln() / ln_x - 3.0;
    let xz = (z * ln_x).exp();
    let big = x * x * x * xz;
    let inner = geometric3 * xz - 1.0;
    let root = (inner * inner + 4.0 * x.powi(5) * xz * xz).sqrt();
    let gap = root - geometric3 * xz + 1.0;
    let decay = (1.0 - 1.0 / (x * x * x)) / (x - 1.0);
    let term_root = (1.0 - root) / (2.0 * ln_x * big);
    let term_linear = -(1.0 - z) * decay + z;
    let term_const = -decay / (2.0 * ln_x);
    let term_log = -(decay - 1.0 / big) * ((gap / 2.0).ln() / ln_x - 3.0);
    let term_gap = -2.0 * x * x * xz / (gap * ln_x) + 2.0 / ln_x;
    let term_mu = -(1.0 + 1.0 / big) * (((big + 1.0) * (x - 1.0) / (x.powi(4) - 1.0)).ln() / ln_x);
    term_root + term_linear + term_const + term_log + term_gap + term_mu
}

/// Golden-section search for the maximizer of g on [4, 7].
pub fn optimal_r() -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (4.0f64, 7.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g_of(c), g_of(d));
    while b - a > 1e-10 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g_of(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g_of(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSchedule {
    pub r: f64,
    pub eps: f64,
    pub c_tilde: Vec<f64>,
    pub c: Vec<u64>,
    pub t_tilde: Vec<f64>,
    pub t: Vec<u64>,
}

fn check_r_eps(r: f64, eps: f64) -> Result<()> {
    if !(r > 2.0) {
        return Err(Error::InvalidParameter(format!("r must exceed 2, got {r}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The first `len` sizes for base r and offset eps.
pub fn schedule(r: f64, eps: f64, len: usize) -> Result<ScalingSchedule> {
    check_r_eps(r, eps)?;
    let mut s = ScalingSchedule { r, eps, c_tilde: vec![], c: vec![], t_tilde: vec![], t: vec![] };
    let (mut tt, mut t) = (0.0, 0u64);
    for i in 0..len {
        let ct = r.powf(i as f64 + eps);
        if !ct.is_finite() || ct >= u64::MAX as f64 / 4.0 {
            break;
        }
        let c = ct.floor() as u64;
        tt += ct;
        t += c;
        s.c_tilde.push(ct);
        s.c.push(c);
        s.t_tilde.push(tt);
        s.t.push(t);
    }
    Ok(s)
}

/// Sizes c_i <= max_size.
pub fn schedule_up_to(r: f64, eps: f64, max_size: u64) -> Result<ScalingSchedule> {
    check_r_eps(r, eps)?;
    let len = (((max_size.max(1) as f64).ln() / r.ln()).ceil() as usize) + 2;
    let mut s = schedule(r, eps, len)?;
    let keep = s.c.iter().take_while(|&&c| c <= max_size).count();
    s.c_tilde.truncate(keep);
    s.c.truncate(keep);
    s.t_tilde.truncate(keep);
    s.t.truncate(keep);
    Ok(s)
}

pub fn small_c_range(r: f64) -> u64 {
    (0..4).map(|i| r.powi(i)).sum::<f64>().floor() as u64
}

/// Pointwise lower bound on f(X_Alg(C))/v_C used by the small-size expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallCEstimate {
    /// Uses the block being added at size C.
    ActiveBlock,
    /// The first case of the estimates as printed, indexed by c_{i-1} < C <= c_i.
    /// It overstates the value for C in (c_{i-1}, t_{i-1}).
    Printed,
}

/// Lower bound on E[f(X_Alg(C))]/v_C over sizes C <= sum_{i<=3} r^i, computed exactly
/// over the eps-intervals on which (c_0, ..., c_4) is constant.
pub fn expected_ratio_lb_small_c(c: u64, r: f64) -> Result<f64> {
    expected_ratio_lb_small_c_with(c, r, SmallCEstimate::ActiveBlock)
}

pub fn expected_ratio_lb_small_c_with(c: u64, r: f64, estimate: SmallCEstimate) -> Result<f64> {
    let max = small_c_range(r);
    if c < 1 || c > max {
        return Err(Error::SizeOutOfRange { size: c as usize, max: max as usize });
    }
    let bound = match estimate {
        SmallCEstimate::ActiveBlock => active_block_bound,
        SmallCEstimate::Printed => case_one_bound,
    };
    let mut cuts = vec![0.0, 1.0];
    for i in 0..SMALL_C_ENTRIES {
        let mut m = 1u64;
        loop {
            let e = log_base(r, m as f64) - i as f64;
            if e >= 1.0 {
                break;
            }
            if e > 0.0 {
                cuts.push(e);
            }
            m += 1;
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let sigma: Vec<u64> = (0..SMALL_C_ENTRIES).map(|i| r.powf(i as f64 + mid).floor() as u64).collect();
        total += (b - a) * bound(&sigma, c);
    }
    Ok(total)
}

/// max{c_{j-1}/C, min(C - t_{j-1}, c_j)/max{C, c_j}} for the block j with t_{j-1} < C <= t_j.
pub fn active_block_bound(sigma: &[u64], c: u64) -> f64 {
    let (mut prev, mut prefix) = (0u64, 0u64);
    for &s in sigma {
        if prefix < c && c <= prefix + s {
            let cf = c as f64;
            let taken = (c - prefix).min(s) as f64;
            return (prev as f64 / cf).max(taken / cf.max(s as f64));
        }
        prefix += s;
        prev = s;
    }
    0.0
}

/// max{c_{i-1}/C, (C - t_{i-1})/max{C, c_i}} for the i with c_{i-1} < C <= c_i.
pub fn case_one_bound(sigma: &[u64], c: u64) -> f64 {
    let (mut prev, mut prefix) = (0u64, 0u64);
    for &s in sigma {
        if prev < c && c <= s {
            let cf = c as f64;
            return (prev as f64 / cf).max((cf - prefix as f64) / cf.max(s as f64));
        }
        prefix += s;
        prev = s;
    }
    0.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundEnvelope {
    pub k: u32,
    pub delta: f64,
    pub r: f64,
    /// (mu(k-1), mu(k)).
    pub mu: (f64, f64),
    /// (nu(k-1), nu(k)).
    pub nu: (f64, f64),
    /// The six integrals in order.
    pub pieces: [f64; 6],
    pub integral_value: f64,
}

/// (mu(i), nu(i)) for C = r^{k+delta}.
pub fn mu_nu(i: u32, k: u32, delta: f64, r: f64) -> (f64, f64) {
    let big = r.powf(k as f64 + delta);
    let mu = log_base(r, big + 1.0) + log_base(r, r - 1.0) - log_base(r, r.powi(i as i32 + 1) - 1.0);
    let q = big * (1.0 - r.powi(-(i as i32 + 1))) / (r - 1.0);
    let disc = ((q - 1.0).powi(2) + 4.0 * r.powf(2.0 * (k as f64 + delta) - 1.0)).sqrt();
    let nu = log_base(r, disc - q + 1.0) - log_base(r, 2.0) - i as f64;
    (mu, nu)
}

/// Adaptive Simpson on [a, b]; zero for empty intervals.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// The six-integral bound I(k, delta); requires r^{k+delta} >= 1 + r + r^2 + r^3.
pub fn integral_bound(k: u32, delta: f64, r: f64) -> Result<BoundEnvelope> {
    if k == 0 || !(delta > 0.0 && delta <= 1.0) || !(r > 2.0) {
        return Err(Error::InvalidParameter(format!("need k >= 1, delta in (0, 1], r > 2; got {k}, {delta}, {r}")));
    }
    let big = r.powf(k as f64 + delta);
    let need: f64 = (0..4).map(|i| r.powi(i)).sum();
    if big < need {
        return Err(Error::HypothesisViolated(format!("r^(k+delta) = {big} < {need}")));
    }
    Ok(integral_terms(k, delta, r))
}

/// The six integrals without the size hypothesis.
pub fn integral_terms(k: u32, delta: f64, r: f64) -> BoundEnvelope {
    let big = r.powf(k as f64 + delta);
    let c_tilde = |i: i32, e: f64| if i < 0 { 0.0 } else { r.powf(i as f64 + e) };
    let t_tilde = |i: i32, e: f64| if i < 0 { 0.0 } else { r.powf(e) * (r.powi(i + 1) - 1.0) / (r - 1.0) };
    let ki = k as i32;
    let (mu1, nu1) = mu_nu(k - 1, k, delta, r);
    let (mu0, nu0) = mu_nu(k, k, delta, r);
    let tol = QUADRATURE_TOL;
    let pieces = [
        adaptive_simpson(&|e| 1.0 - t_tilde(ki - 2, e) / big, mu1.min(1.0), 1.0, tol),
        adaptive_simpson(&|e| (c_tilde(ki - 1, e) - 1.0) / big, nu1.min(1.0), mu1.min(1.0), tol),
        adaptive_simpson(&|e| (big - t_tilde(ki - 1, e)) / c_tilde(ki, e), delta, nu1.min(1.0), tol),
        adaptive_simpson(&|e| 1.0 - t_tilde(ki - 1, e) / big, mu0.max(0.0), delta, tol),
        adaptive_simpson(&|e| (c_tilde(ki, e) - 1.0) / big, nu0.max(0.0), mu0.max(0.0), tol),
        adaptive_simpson(&|e| (big - t_tilde(ki, e)) / c_tilde(ki + 1, e), 0.0, nu0.max(0.0), tol),
    ];
    BoundEnvelope {
        k,
        delta,
        r,
        mu: (mu1, mu0),
        nu: (nu1, nu0),
        pieces,
        integral_value: pieces.iter().sum(),
    }
}

/// Uniform draw from the open interval (0, 1) with 53 random bits.
pub fn draw_open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let bits = rng.gen::<u64>() >> 11;
        let x = bits as f64 / (1u64 << 53) as f64;
        if x > 0.0 {
            return x;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedRun {
    pub seed: u64,
    pub eps: f64,
    pub r: f64,
    /// Sizes not exceeding the number of sets.
    pub sizes: Vec<usize>,
}

pub fn run_randomized<T: Scalar>(instance: &SeparableInstance<T>, seed: u64) -> Result<RandomizedRun> {
    run_randomized_with(instance, seed, optimal_r())
}

pub fn run_randomized_with<T: Scalar>(instance: &SeparableInstance<T>, seed: u64, r: f64) -> Result<RandomizedRun> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let eps = draw_open_unit(&mut rng);
    let s = schedule_up_to(r, eps, instance.n() as u64)?;
    Ok(RandomizedRun { seed, eps, r, sizes: s.c.iter().map(|&c| c as usize).collect() })
}

/// f(X_Alg(C)) of a run, or zero when the run has no block.
pub fn run_value<T: Scalar>(instance: &SeparableInstance<T>, run: &RandomizedRun, size: usize) -> Result<T> {
    if run.sizes.is_empty() {
        return Ok(T::zero());
    }
    evaluate(instance, &run.sizes, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const R: f64 = 5.164_562_921_591_377_5;

    #[test]
    fn g_matches_known_values() {
        assert!(g_of(5.1646) > 0.5643);
        for i in 0..1000 {
            let x = 3.0 + 5.0 * i as f64 / 999.0;
            let (a, b) = (g_of(x), g_terms(x));
            assert!(a.is_finite());
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn optimum() {
        let r = optimal_r();
        assert!((5.164..=5.165).contains(&r));
        assert!(g_of(r) >= g_of(r + 1e-4) && g_of(r) >= g_of(r - 1e-4));
        assert!(1.0 / g_of(r) < 1.772);
        assert!(g_of(r) >= 0.56437);
    }

    #[test]
    fn schedule_examples() {
        let s = schedule(4.0, 0.5, 4).unwrap();
        assert_eq!(s.c, vec![2, 8, 32, 128]);
        assert_eq!(schedule(R, 1e-12, 1).unwrap().c, vec![1]);
        let s = schedule_up_to(R, 0.3, 10).unwrap();
        assert!(s.c.iter().all(|&c| c <= 10));
    }

    /// Integrand A + B r^e + D r^-e integrated in closed form.
    fn exp_integral(r: f64, a: f64, b: f64, d: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let l = r.ln();
        a * (hi - lo) + b * (r.powf(hi) - r.powf(lo)) / l - d * (r.powf(-hi) - r.powf(-lo)) / l
    }

    fn closed_form_bound(k: i32, delta: f64, r: f64) -> f64 {
        let big = r.powf(k as f64 + delta);
        let geo = |i: i32| if i < 0 { 0.0 } else { (r.powi(i + 1) - 1.0) / (r - 1.0) };
        let (m1, n1) = mu_nu(k as u32 - 1, k as u32, delta, r);
        let (m0, n0) = mu_nu(k as u32, k as u32, delta, r);
        exp_integral(r, 1.0, -geo(k - 2) / big, 0.0, m1.min(1.0), 1.0)
            + exp_integral(r, -1.0 / big, r.powi(k - 1) / big, 0.0, n1.min(1.0), m1.min(1.0))
            + exp_integral(r, -geo(k - 1) / r.powi(k), 0.0, big / r.powi(k), delta, n1.min(1.0))
            + exp_integral(r, 1.0, -geo(k - 1) / big, 0.0, m0.max(0.0), delta)
            + exp_integral(r, -1.0 / big, r.powi(k) / big, 0.0, n0.max(0.0), m0.max(0.0))
            + exp_integral(r, -geo(k) / r.powi(k + 1), 0.0, big / r.powi(k + 1), 0.0, n0.max(0.0))
    }

    #[test]
    fn quadrature_matches_antiderivative() {
        for &(k, d) in &[(3, 0.3), (4, 0.05), (5, 0.75), (8, 1.0), (3, 0.9)] {
            let q = integral_bound(k as u32, d, R).unwrap().integral_value;
            assert!((q - closed_form_bound(k, d, R)).abs() < 1e-8, "k={k} d={d}");
        }
    }

    #[test]
    fn bound_at_case_three_corner_is_g() {
        let r = optimal_r();
        // C = 1 + r + r^2 + r^3 - 1 here, one short of the checked range
        assert!(integral_bound(3, z_of(r), r).is_err());
        let b = integral_terms(3, z_of(r), r);
        assert!((b.integral_value - g_of(r)).abs() < 1e-6, "{} vs {}", b.integral_value, g_of(r));
    }

    #[test]
    fn hypothesis_is_enforced() {
        assert!(matches!(integral_bound(3, 0.05, R), Err(Error::HypothesisViolated(_))));
        assert!(matches!(expected_ratio_lb_small_c(0, R), Err(Error::SizeOutOfRange { .. })));
    }

    #[test]
    fn mu_decreasing() {
        for k in 3..10 {
            for i in 0..k {
                assert!(mu_nu(i, k, 0.4, R).0 > mu_nu(i + 1, k, 0.4, R).0);
            }
        }
    }

    #[test]
    fn small_c_at_one() {
        // c_0 = m for eps in [log_r m, log_r (m + 1))
        let mut hand = 0.0;
        for m in 1..=5u32 {
            let lo = log_base(R, m as f64);
            let hi = log_base(R, m as f64 + 1.0).min(1.0);
            hand += (hi - lo).max(0.0) / m as f64;
        }
        let v = expected_ratio_lb_small_c(1, R).unwrap();
        assert_relative_eq!(v, hand, max_relative = 1e-12);
        assert!(v >= log_base(R, 2.0));
    }

    #[test]
    fn small_c_monte_carlo() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for c in [7u64, 40, 134] {
            let n = 400_000;
            let mut acc = 0.0;
            for _ in 0..n {
                let e = draw_open_unit(&mut rng);
                let s: Vec<u64> = (0..5).map(|i| R.powf(i as f64 + e).floor() as u64).collect();
                acc += active_block_bound(&s, c);
            }
            let exact = expected_ratio_lb_small_c(c, R).unwrap();
            assert!((acc / n as f64 - exact).abs() < 3e-3, "C={c}");
        }
    }

    #[test]
    fn printed_first_case_overstates_mid_block() {
        // sizes 1, 5, 26, 137 with unit densities; at C = 30 block 26 holds 24 elements
        let inst = SeparableInstance::<f64>::from_densities(vec![1.0; 200]).unwrap();
        let s = schedule(R, 1e-9, 4).unwrap();
        assert_eq!(s.c, vec![1, 5, 26, 137]);
        let sizes: Vec<usize> = s.c.iter().map(|&c| c as usize).collect();
        let got = evaluate(&inst, &sizes, 30).unwrap() / 30.0;
        assert_relative_eq!(got, 0.8);
        assert_relative_eq!(active_block_bound(&s.c, 30), 0.8);
        assert_relative_eq!(case_one_bound(&s.c, 30), 26.0 / 30.0);
        let printed = expected_ratio_lb_small_c_with(170, R, SmallCEstimate::Printed).unwrap();
        assert!(printed > expected_ratio_lb_small_c(170, R).unwrap());
    }

    #[test]
    fn small_c_minimum() {
        let r = optimal_r();
        let min = (1..=small_c_range(r)).map(|c| expected_ratio_lb_small_c(c, r).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.569 && min < 0.5696, "{min}");
    }

    #[test]
    fn run_is_deterministic_and_truncated() {
        let inst = SeparableInstance::<f64>::from_densities(vec![1.0; 10]).unwrap();
        let a = run_randomized(&inst, 5).unwrap();
        assert_eq!(a, run_randomized(&inst, 5).unwrap());
        assert!(a.sizes.iter().all(|&c| c <= 10));
        assert_ne!(a.eps, run_randomized(&inst, 6).unwrap().eps);
    }

    #[test]
    fn expected_value_on_unit_density() {
        // v_C = C, the case the small-C bound is tight for
        let n = 200;
        let inst = SeparableInstance::<f64>::from_densities(vec![1.0; n]).unwrap();
        let r = optimal_r();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let runs: Vec<RandomizedRun> = (0..20_000).map(|_| {
            let eps = draw_open_unit(&mut rng);
            let s = schedule_up_to(r, eps, n as u64).unwrap();
            RandomizedRun { seed: 0, eps, r, sizes: s.c.iter().map(|&c| c as usize).collect() }
        }).collect();
        for c in [1usize, 5, 20, 60, 134] {
            let mean: f64 = runs.iter().map(|run| run_value(&inst, run, c).unwrap()).sum::<f64>() / runs.len() as f64;
            assert!(mean / c as f64 >= 0.56, "C={c}: {mean}");
            assert!(mean / c as f64 >= expected_ratio_lb_small_c(c as u64, r).unwrap() - 0.02);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn schedule_invariant(r in 2.01..9.0f64, eps in 1e-9..0.999_999f64) {
            let s = schedule(r, eps, 12).unwrap();
            for i in 1..s.c.len() {
                prop_assert!(s.t[i - 1] <= s.c[i]);
                prop_assert!(s.c_tilde[i] > s.c_tilde[i - 1]);
                prop_assert!(s.c[i] >= s.c[i - 1]);
            }
        }

        #[test]
        fn realized_value_dominates_case_bound(
            raw in prop::collection::vec(1u32..100, 40..120),
            eps in 1e-6..0.999_999f64,
            pick in 0.0..1.0f64,
        ) {
            let dens: Vec<f64> = raw.iter().map(|&x| x as f64).collect();
            let inst = crate::separable::normalize(&SeparableInstance::from_densities(dens).unwrap()).unwrap();
            let n = inst.n();
            let s = schedule_up_to(R, eps, n as u64).unwrap();
            prop_assume!(!s.c.is_empty());
            let reach = *s.t.last().unwrap() as usize;
            let c = 1 + ((reach.min(n) - 1) as f64 * pick) as usize;
            let sizes: Vec<usize> = s.c.iter().map(|&x| x as usize).collect();
            let got = evaluate(&inst, &sizes, c).unwrap();
            let bound = active_block_bound(&s.c, c as u64) * inst.opt(c);
            prop_assert!(got >= bound - 1e-9 * bound.max(1.0));
        }
    }
}
