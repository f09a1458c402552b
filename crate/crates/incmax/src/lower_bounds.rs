//! Recurrences behind the deterministic lower bounds, their characteristic
//! polynomials, and the adversarial instance builders.

use num_complex::Complex64;

use crate::continuous::{
    build_from_points, check_competitive, greedy_scaling, GreedyRun, GreedyStatus, PiecewiseLinearValue,
};
use crate::error::{Error, Result};
use crate::scalar::{round_to_bits, Scalar};
use crate::{Exact, PHI_PLUS_ONE};

pub const MAX_RECURRENCE_STEPS: usize = 100_000;
pub const EPSILON_START: f64 = 1e-3;
pub const EPSILON_HALVINGS: usize = 40;
const ZERO_DENOMINATOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    /// Stopped at the first negative entry.
    FirstNegative(usize),
    /// The denominator defining entry n vanished.
    DivergedToZeroDenominator(usize),
    /// n_max reached with all entries positive.
    Exhausted,
}

/// Arithmetic used when iterating the recurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F64,
    Exact,
    /// Exact rationals rounded to this many significant bits after every step.
    Bits(u32),
}

impl Precision {
    /// Reads `INCMAX_PRECISION` (`f64`, `exact` or a bit count); f64 when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var("INCMAX_PRECISION") {
            Ok(s) => s.parse(),
            Err(_) => Ok(Precision::F64),
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "f64" | "double" => Ok(Precision::F64),
            "exact" => Ok(Precision::Exact),
            other => other
                .parse::<u32>()
                .ok()
                .filter(|&b| b >= 8)
                .map(Precision::Bits)
                .ok_or_else(|| Error::Parse(format!("precision '{other}': expected f64, exact or bits >= 8"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceTrace<T> {
    pub variant: Variant,
    /// (alpha, beta, rho, epsilon) for A, (rho, epsilon) for B.
    pub params: Vec<T>,
    /// t_0, t_1, ...
    pub values: Vec<T>,
    /// 1/t_n; one entry longer than `values` when a denominator vanished.
    pub reciprocals: Vec<T>,
    pub first_negative: Option<usize>,
    pub status: TraceStatus,
}

impl<T: Scalar> RecurrenceTrace<T> {
    /// Smallest n with 1/t_n > 1/t_{n+1} (or >= when `weak`).
    pub fn first_non_increase(&self, weak: bool) -> Option<usize> {
        self.reciprocals.windows(2).position(|w| if weak { w[0] >= w[1] } else { w[0] > w[1] })
    }

    pub fn to_f64(&self) -> RecurrenceTrace<f64> {
        let conv = |v: &[T]| v.iter().map(Scalar::as_f64).collect();
        RecurrenceTrace {
            variant: self.variant,
            params: conv(&self.params),
            values: conv(&self.values),
            reciprocals: conv(&self.reciprocals),
            first_negative: self.first_negative,
            status: self.status,
        }
    }
}

fn check_common(rho: f64, eps: f64, n_max: usize) -> Result<()> {
    if !(rho > 1.0) {
        return Err(Error::InvalidParameter(format!("rho must exceed 1, got {rho}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    if n_max > MAX_RECURRENCE_STEPS {
        return Err(Error::InvalidParameter(format!("n_max {n_max} exceeds {MAX_RECURRENCE_STEPS}")));
    }
    Ok(())
}

fn vanishes<T: Scalar>(x: &T) -> bool {
    x.is_zero() || x.as_f64().abs() < ZERO_DENOMINATOR
}

/// t_0 = beta, t_{n+1} = 1 / (rho/(t_n(1-eps)) - sum_{j<=n} (rho+eps)^{j-n}/t_j - alpha/(rho+eps)^n).
pub fn recurrence_a(alpha: f64, beta: f64, rho: f64, eps: f64, n_max: usize) -> Result<RecurrenceTrace<f64>> {
    check_common(rho, eps, n_max)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    Ok(recurrence_a_in::<f64>(&alpha, &beta, &rho, &eps, n_max, &|x| x))
}

pub fn recurrence_a_in<T: Scalar>(
    alpha: &T,
    beta: &T,
    rho: &T,
    eps: &T,
    n_max: usize,
    round: &dyn Fn(T) -> T,
) -> RecurrenceTrace<T> {
    let one = T::one();
    let q = one.clone() / (rho.clone() + eps.clone());
    let mut trace = RecurrenceTrace {
        variant: Variant::A,
        params: vec![alpha.clone(), beta.clone(), rho.clone(), eps.clone()],
        values: vec![beta.clone()],
        reciprocals: vec![one.clone() / beta.clone()],
        first_negative: None,
        status: TraceStatus::Exhausted,
    };
    // sum_{j<=n} (rho+eps)^{j-n}/t_j and alpha/(rho+eps)^n
    let mut sum = T::zero();
    let mut tail = alpha.clone();
    for n in 0..n_max {
        let a_n = trace.reciprocals[n].clone();
        sum = round(sum * q.clone() + a_n.clone());
        if n > 0 {
            tail = round(tail * q.clone());
        }
        let denom = round(rho.clone() * a_n / (one.clone() - eps.clone()) - sum.clone() - tail.clone());
        if vanishes(&denom) {
            trace.reciprocals.push(denom);
            trace.status = TraceStatus::DivergedToZeroDenominator(n + 1);
            return trace;
        }
        let t = round(one.clone() / denom.clone());
        let negative = t.is_negative();
        trace.reciprocals.push(denom);
        trace.values.push(t);
        if negative {
            trace.first_negative = Some(n + 1);
            trace.status = TraceStatus::FirstNegative(n + 1);
            return trace;
        }
    }
    trace
}

/// t_0 = 1, t_1 = (1-eps)/rho,
/// t_n = (1-eps) / (rho/t_{n-1} - 1/t_{n-2} - (1/rho) sum_{j<=n-3} (rho+eps)^{j+2-n}/t_j).
pub fn recurrence_b(rho: f64, eps: f64, n_max: usize) -> Result<RecurrenceTrace<f64>> {
    check_common(rho, eps, n_max)?;
    Ok(recurrence_b_in::<f64>(&rho, &eps, n_max, &|x| x))
}

/// Variant B in the arithmetic selected by `precision`, reported in f64.
pub fn recurrence_b_with(rho: f64, eps: f64, n_max: usize, precision: Precision) -> Result<RecurrenceTrace<f64>> {
    check_common(rho, eps, n_max)?;
    let (r, e) = (<Exact as Scalar>::from_float(rho), <Exact as Scalar>::from_float(eps));
    Ok(match precision {
        Precision::F64 => recurrence_b_in::<f64>(&rho, &eps, n_max, &|x| x),
        Precision::Exact => recurrence_b_in::<Exact>(&r, &e, n_max, &|x| x).to_f64(),
        Precision::Bits(b) => recurrence_b_in::<Exact>(&r, &e, n_max, &|x| round_to_bits(&x, b)).to_f64(),
    })
}

pub fn recurrence_a_with(
    alpha: f64,
    beta: f64,
    rho: f64,
    eps: f64,
    n_max: usize,
    precision: Precision,
) -> Result<RecurrenceTrace<f64>> {
    let fast = recurrence_a(alpha, beta, rho, eps, n_max)?;
    let ex = |x: f64| <Exact as Scalar>::from_float(x);
    let (a, b, r, e) = (ex(alpha), ex(beta), ex(rho), ex(eps));
    Ok(match precision {
        Precision::F64 => fast,
        Precision::Exact => recurrence_a_in::<Exact>(&a, &b, &r, &e, n_max, &|x| x).to_f64(),
        Precision::Bits(bits) => recurrence_a_in::<Exact>(&a, &b, &r, &e, n_max, &|x| round_to_bits(&x, bits)).to_f64(),
    })
}

pub fn recurrence_b_in<T: Scalar>(rho: &T, eps: &T, n_max: usize, round: &dyn Fn(T) -> T) -> RecurrenceTrace<T> {
    let one = T::one();
    let keep = one.clone() - eps.clone();
    let q = one.clone() / (rho.clone() + eps.clone());
    let t1 = round(keep.clone() / rho.clone());
    let mut trace = RecurrenceTrace {
        variant: Variant::B,
        params: vec![rho.clone(), eps.clone()],
        values: vec![one.clone(), t1.clone()],
        reciprocals: vec![one.clone(), round(one.clone() / t1)],
        first_negative: None,
        status: TraceStatus::Exhausted,
    };
    if n_max < 2 {
        trace.values.truncate(n_max + 1);
        trace.reciprocals.truncate(n_max + 1);
        return trace;
    }
    // u = sum_{j<=n-3} (rho+eps)^{j+2-n}/t_j
    let mut u = T::zero();
    for n in 2..=n_max {
        if n >= 3 {
            u = round((u + trace.reciprocals[n - 3].clone()) * q.clone());
        }
        let denom = round(
            rho.clone() * trace.reciprocals[n - 1].clone()
                - trace.reciprocals[n - 2].clone()
                - u.clone() / rho.clone(),
        );
        if vanishes(&denom) {
            trace.reciprocals.push(T::zero());
            trace.status = TraceStatus::DivergedToZeroDenominator(n);
            return trace;
        }
        let t = round(keep.clone() / denom.clone());
        let negative = t.is_negative();
        trace.reciprocals.push(round(denom / keep.clone()));
        trace.values.push(t);
        if negative {
            trace.first_negative = Some(n);
            trace.status = TraceStatus::FirstNegative(n);
            return trace;
        }
    }
    trace
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Variant A: two complex conjugate roots. Variant B: one real root and a complex pair.
    ComplexPair,
    /// Only real roots (possibly repeated).
    AllReal,
}

#[derive(Clone, Debug)]
pub struct CharacteristicAnalysis {
    pub variant: Variant,
    /// Monic polynomial coefficients, highest degree first.
    pub coefficients: Vec<f64>,
    pub discriminant: f64,
    pub roots: Vec<Complex64>,
    pub regime: Regime,
    /// Variant B only: weights with a_n = sum_i lambda_i r_i^n.
    pub lambdas: Option<Vec<Complex64>>,
}

impl CharacteristicAnalysis {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coefficients.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|&r| self.eval(r).norm()).fold(0.0, f64::max)
    }
}

/// x^2 - s x + p for variant A.
fn coefficients_a(rho: f64, eps: f64) -> (f64, f64) {
    let s = 1.0 / (rho + eps) + rho / (1.0 - eps) - 1.0;
    let p = rho / ((1.0 - eps) * (rho + eps));
    (s, p)
}

/// x^3 + a x^2 + b x + c for variant B.
fn coefficients_b(rho: f64, eps: f64) -> (f64, f64, f64) {
    let w = (1.0 - eps) * (rho + eps);
    let a = -(rho * rho + 1.0 + rho * eps - eps) / w;
    let b = (2.0 * rho + eps) / w;
    let c = -(1.0 - 1.0 / rho) / w;
    (a, b, c)
}

pub fn discriminant_a(rho: f64, eps: f64) -> f64 {
    let (s, p) = coefficients_a(rho, eps);
    (s / 2.0).powi(2) - p
}

pub fn discriminant_b(rho: f64, eps: f64) -> f64 {
    let (a, b, c) = coefficients_b(rho, eps);
    (a.powi(3) / 27.0 - a * b / 6.0 + c / 2.0).powi(2) + (b / 3.0 - a * a / 9.0).powi(3)
}

/// D_A(rho, 0) = (1/(2 rho) + rho/2 - 1/2)^2 - 1.
pub fn d_a(rho: f64) -> f64 {
    (1.0 / (2.0 * rho) + rho / 2.0 - 0.5).powi(2) - 1.0
}

pub fn rho_star_polynomial(rho: f64) -> f64 {
    let r2 = rho * rho;
    -4.0 * r2 * r2 * r2 + 24.0 * r2 * r2 - r2 * rho - 30.0 * r2 + 31.0 * rho - 4.0
}

/// D_B(rho, 0) in closed form.
pub fn d_b_closed_form(rho: f64) -> f64 {
    rho_star_polynomial(rho) / (108.0 * rho.powi(5))
}

/// Root of the degree-6 polynomial in [2, 2.4] by bisection.
pub fn rho_star() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 2.4f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if rho_star_polynomial(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn characteristic_analysis(variant: Variant, rho: f64, eps: f64) -> Result<CharacteristicAnalysis> {
    check_common(rho, eps, 0)?;
    Ok(match variant {
        Variant::A => {
            let (s, p) = coefficients_a(rho, eps);
            let disc = (s / 2.0).powi(2) - p;
            let root = Complex64::new(disc, 0.0).sqrt();
            let half = Complex64::new(s / 2.0, 0.0);
            CharacteristicAnalysis {
                variant,
                coefficients: vec![1.0, -s, p],
                discriminant: disc,
                roots: vec![half - root, half + root],
                regime: if disc < 0.0 { Regime::ComplexPair } else { Regime::AllReal },
                lambdas: None,
            }
        }
        Variant::B => {
            let (a, b, c) = coefficients_b(rho, eps);
            let disc = discriminant_b(rho, eps);
            let roots = cubic_roots(a, b, c);
            let a1 = rho / (1.0 - eps);
            let a2 = (rho * rho - 1.0 + eps) / (1.0 - eps).powi(2);
            let lambdas = solve_vandermonde(&roots, [1.0, a1, a2]);
            CharacteristicAnalysis {
                variant,
                coefficients: vec![1.0, a, b, c],
                discriminant: disc,
                roots,
                regime: if disc > 0.0 { Regime::ComplexPair } else { Regime::AllReal },
                lambdas,
            }
        }
    })
}

/// Roots of x^3 + a x^2 + b x + c: Cardano with one real root first, or the
/// trigonometric form when all three are real.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let shift = -a / 3.0;
    let re = |x: f64| Complex64::new(x + shift, 0.0);
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        let im = 3f64.sqrt() / 2.0 * (u - v);
        let mid = -(u + v) / 2.0 + shift;
        vec![re(u + v), Complex64::new(mid, im), Complex64::new(mid, -im)]
    } else if p == 0.0 {
        let t = (-q).cbrt();
        vec![re(t), re(t), re(t)]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| re(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()))
            .collect()
    }
}

fn solve_vandermonde(r: &[Complex64], rhs: [f64; 3]) -> Option<Vec<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let m = [[one, one, one], [r[0], r[1], r[2]], [r[0] * r[0], r[1] * r[1], r[2] * r[2]]];
    let det3 = |m: &[[Complex64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&m);
    if det.norm() < 1e-14 {
        return None;
    }
    Some(
        (0..3)
            .map(|col| {
                let mut mc = m;
                for (row, &v) in rhs.iter().enumerate() {
                    mc[row][col] = Complex64::new(v, 0.0);
                }
                det3(&mc) / det
            })
            .collect(),
    )
}

/// a_n = lambda x^n + mu y^n for the reciprocals of variant A.
#[derive(Clone, Debug)]
pub struct ClosedFormA {
    pub x: Complex64,
    pub y: Complex64,
    pub lambda: Complex64,
    pub mu: Complex64,
}

impl ClosedFormA {
    pub fn new(alpha: f64, beta: f64, rho: f64, eps: f64) -> Result<Self> {
        let ca = characteristic_analysis(Variant::A, rho, eps)?;
        let (x, y) = (ca.roots[0], ca.roots[1]);
        if (y - x).norm() < 1e-14 {
            return Err(Error::InvalidParameter("repeated characteristic root".into()));
        }
        let a0 = 1.0 / beta;
        let a1 = rho / (beta * (1.0 - eps)) - 1.0 / beta - alpha;
        let mu = (a1 - a0 * x) / (y - x);
        Ok(ClosedFormA { x, y, lambda: a0 - mu, mu })
    }

    pub fn a_n(&self, n: i32) -> f64 {
        (self.lambda * self.x.powi(n) + self.mu * self.y.powi(n)).re
    }
}

/// Evaluates a_n = sum_i lambda_i r_i^n from a variant-B analysis.
pub fn closed_form_b(analysis: &CharacteristicAnalysis, n: i32) -> Option<f64> {
    let l = analysis.lambdas.as_ref()?;
    Some(l.iter().zip(&analysis.roots).map(|(l, r)| l * r.powi(n)).sum::<Complex64>().re)
}

/// A variant-B epsilon and its trace, found by halving from `EPSILON_START`.
#[derive(Clone, Debug)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    pub ell: usize,
    pub trace: RecurrenceTrace<f64>,
    pub halvings: usize,
}

/// ell with 1/t_ell >= 1/t_{ell+1}; RhoTooLarge if the trace never turns.
fn ell_b(trace: &RecurrenceTrace<f64>) -> Result<usize> {
    trace.first_non_increase(true).ok_or_else(|| {
        Error::RhoTooLarge(format!(
            "no turn of 1/t_n within {} steps at rho = {}",
            trace.values.len(),
            trace.params[0]
        ))
    })
}

/// 1/t_{n+1} > eps/(rho+eps) (1/t_n + (1/v_n) sum_{j<n} v_j/t_j) for all n < ell, v_n = (rho+eps)^n.
fn det_lb_condition(trace: &RecurrenceTrace<f64>, rho: f64, eps: f64, ell: usize) -> bool {
    let g = rho + eps;
    let a = &trace.reciprocals;
    // w = (1/v_n) sum_{j<n} v_j/t_j
    let mut w = 0.0;
    for n in 0..ell {
        if n > 0 {
            w = (w + a[n - 1]) / g;
        }
        if !(a[n + 1] > eps / g * (a[n] + w)) {
            return false;
        }
    }
    true
}

pub fn auto_epsilon(rho: f64) -> Result<EpsilonChoice> {
    auto_epsilon_with(rho, Precision::F64)
}

pub fn auto_epsilon_with(rho: f64, precision: Precision) -> Result<EpsilonChoice> {
    let base = recurrence_b_with(rho, 0.0, MAX_RECURRENCE_STEPS, precision)?;
    let ell0 = ell_b(&base)?;
    let mut eps = EPSILON_START;
    for halvings in 0..=EPSILON_HALVINGS {
        let trace = recurrence_b_with(rho, eps, MAX_RECURRENCE_STEPS, precision)?;
        if let Ok(ell) = ell_b(&trace) {
            if ell == ell0 && det_lb_condition(&trace, rho, eps, ell) {
                return Ok(EpsilonChoice { epsilon: eps, ell, trace, halvings });
            }
        }
        eps /= 2.0;
    }
    Err(Error::EpsilonTooLarge(format!("no admissible epsilon after {EPSILON_HALVINGS} halvings at rho = {rho}")))
}

#[derive(Clone, Debug)]
pub struct DetLbInstance {
    pub rho: f64,
    pub epsilon: f64,
    pub ell: usize,
    /// t_0 .. t_{ell+1} (the last entry may be negative).
    pub t: Vec<f64>,
    pub instance: PiecewiseLinearValue<f64>,
}

impl DetLbInstance {
    /// v_n = (rho + eps)^n.
    pub fn level(&self, n: usize) -> f64 {
        (self.rho + self.epsilon).powi(n as i32)
    }

    /// Size v_ell / t_ell up to which every solution has to be competitive.
    pub fn horizon(&self) -> f64 {
        self.level(self.ell) / self.t[self.ell]
    }
}

/// Plateaus at v_n between v_n/t_n and v_n/t_{n+1}, rises of density t_{n+1} in between.
pub fn build_det_lb_instance(rho: f64, eps: Option<f64>) -> Result<DetLbInstance> {
    if !(rho > 1.0) || rho >= rho_star() {
        return Err(Error::InvalidParameter(format!("rho must lie in (1, {:.6}), got {rho}", rho_star())));
    }
    let (epsilon, ell, trace) = match eps {
        None => {
            let c = auto_epsilon(rho)?;
            (c.epsilon, c.ell, c.trace)
        }
        Some(e) => {
            let ell0 = ell_b(&recurrence_b(rho, 0.0, MAX_RECURRENCE_STEPS)?)?;
            let trace = recurrence_b(rho, e, MAX_RECURRENCE_STEPS)?;
            let ell = ell_b(&trace)?;
            if ell != ell0 || !det_lb_condition(&trace, rho, e, ell) {
                return Err(Error::EpsilonTooLarge(format!("epsilon = {e} changes the turn index or breaks the margin")));
            }
            (e, ell, trace)
        }
    };
    let t: Vec<f64> = trace.values.iter().take(ell + 2).cloned().collect();
    let mut pts = Vec::with_capacity(2 * ell + 1);
    let mut v = 1.0f64;
    for n in 0..=ell {
        pts.push((v / t[n], v));
        if n < ell {
            pts.push((v / t[n + 1], v));
        }
        v *= rho + epsilon;
    }
    let instance = PiecewiseLinearValue::new(pts, Some(t[ell]))?;
    Ok(DetLbInstance { rho, epsilon, ell, t, instance })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome<T> {
    /// A competitive block sequence covering the horizon, if any.
    pub witness: Option<Vec<T>>,
    pub candidates_checked: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub rho: f64,
    pub epsilon: f64,
    pub ell: usize,
    pub t: Vec<f64>,
    pub infeasible: bool,
    pub candidates_checked: usize,
    pub witness: Option<Vec<f64>>,
}

/// Sizes with d(c) = y, as [lo, hi]; hi is None when the set is unbounded.
fn level_set<T: Scalar>(f: &PiecewiseLinearValue<T>, y: &T) -> Option<(T, Option<T>)> {
    let pts = f.breakpoints();
    let hi = f.invert_density(y);
    let unbounded = hi.is_none() && T::eq_tol(f.extend_slope(), y);
    if hi.is_none() && !unbounded {
        return None;
    }
    // smallest c > 0 with d(c) <= y
    let mut lo = None;
    for w in pts.windows(2) {
        let (c1, v1) = &w[1];
        if T::ge_tol(&(y.clone() * c1.clone()), v1) {
            let (c0, v0) = &w[0];
            let slope = (v1.clone() - v0.clone()) / (c1.clone() - c0.clone());
            let intercept = v0.clone() - slope.clone() * c0.clone();
            lo = Some(if T::eq_tol(&slope, y) || intercept.is_zero() {
                c0.clone()
            } else {
                T::max_of(c0.clone(), intercept / (y.clone() - slope))
            });
            break;
        }
    }
    let lo = match lo {
        Some(l) => l,
        None if unbounded => f.last_size(),
        None => hi.clone()?,
    };
    let hi = hi.map(|h| T::max_of(h, lo.clone()));
    Some((lo, hi))
}

/// Smallest c in [lo, hi] with d_next (p(c) - prefix - c) >= v(c).
fn minimal_size<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    rho: &T,
    lo: &T,
    hi: &T,
    prefix: &T,
    d_next: &T,
) -> Option<T> {
    let ok = |c: &T| -> bool {
        let Ok(p) = f.reach(c, rho) else { return true };
        T::ge_tol(&(d_next.clone() * (p - prefix.clone() - c.clone())), &f.value_at(c))
    };
    let mut cands: Vec<T> = vec![lo.clone(), hi.clone()];
    // p jumps where rho v(c) crosses a breakpoint value; affine in between
    let pts = f.breakpoints();
    let mut splits: Vec<T> = vec![lo.clone()];
    for (_, vb) in pts.iter().skip(1) {
        let target = vb.clone() / rho.clone();
        if let Some(c) = size_with_value(f, &target) {
            if c > *lo && c < *hi {
                splits.push(c);
            }
        }
    }
    splits.push(hi.clone());
    splits.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    for w in splits.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b <= a {
            continue;
        }
        cands.push(a.clone());
        let two = T::one() + T::one();
        let m1 = (a.clone() * two.clone() + b.clone()) / (two.clone() + T::one());
        let m2 = (a.clone() + b.clone() * two.clone()) / (two + T::one());
        let phi = |c: &T| -> Option<T> {
            let p = f.reach(c, rho).ok()?;
            Some(d_next.clone() * (p - prefix.clone() - c.clone()) - f.value_at(c))
        };
        let (Some(f1), Some(f2)) = (phi(&m1), phi(&m2)) else { continue };
        let slope = (f2 - f1.clone()) / (m2 - m1.clone());
        if slope > T::zero() {
            let z = m1 - f1 / slope;
            if z > *a && z < *b {
                cands.push(z);
            }
        }
    }
    cands.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cands.into_iter().find(|c| ok(c))
}

/// Smallest c with v(c) = level on the increasing part of v, if within the breakpoints.
fn size_with_value<T: Scalar>(f: &PiecewiseLinearValue<T>, level: &T) -> Option<T> {
    let pts = f.breakpoints();
    for w in pts.windows(2) {
        let ((c0, v0), (c1, v1)) = (&w[0], &w[1]);
        if *level >= *v0 && *level <= *v1 && v1 > v0 {
            return Some(c0.clone() + (level.clone() - v0.clone()) / (v1.clone() - v0.clone()) * (c1.clone() - c0.clone()));
        }
    }
    let (cl, vl) = pts.last()?;
    (*level > *vl && !f.extend_slope().is_zero())
        .then(|| cl.clone() + (level.clone() - vl.clone()) / f.extend_slope().clone())
}

/// Searches block sequences whose densities form a strictly decreasing subsequence of `levels`.
/// Earlier blocks take the smallest size admitting the next density, the last block the
/// largest size of its density; a candidate succeeds when it is competitive and its final
/// reach covers `horizon`.
pub fn certify_no_solution<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    rho: &T,
    levels: &[T],
    horizon: &T,
) -> SearchOutcome<T> {
    let sets: Vec<Option<(T, Option<T>)>> = levels.iter().map(|y| level_set(f, y)).collect();
    let m = levels.len();
    let mut checked = 0usize;
    for mask in 1u64..(1u64 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if idx.windows(2).any(|w| levels[w[1]] >= levels[w[0]]) {
            continue;
        }
        checked += 1;
        if let Some(sol) = realize(f, rho, levels, &sets, &idx, horizon) {
            return SearchOutcome { witness: Some(sol), candidates_checked: checked };
        }
    }
    SearchOutcome { witness: None, candidates_checked: checked }
}

fn realize<T: Scalar>(
    f: &PiecewiseLinearValue<T>,
    rho: &T,
    levels: &[T],
    sets: &[Option<(T, Option<T>)>],
    idx: &[usize],
    horizon: &T,
) -> Option<Vec<T>> {
    let mut sol: Vec<T> = Vec::with_capacity(idx.len());
    let mut prefix = T::zero();
    for (pos, &k) in idx.iter().enumerate() {
        let (lo, hi) = sets[k].clone()?;
        if let Some(&next) = idx.get(pos + 1) {
            let hi = hi.unwrap_or_else(|| T::max_of(horizon.clone(), lo.clone()));
            let c = minimal_size(f, rho, &lo, &hi, &prefix, &levels[next])?;
            prefix = prefix + c.clone();
            sol.push(c);
        } else {
            let mut c = hi.clone().unwrap_or_else(|| T::max_of(horizon.clone(), lo.clone()));
            // an unbounded last block may need to grow past the prefix
            for _ in 0..64 {
                let mut trial = sol.clone();
                trial.push(c.clone());
                let verdict = check_competitive(f, &trial, rho);
                let covered = verdict.covered_up_to.as_ref().map_or(true, |p| T::ge_tol(p, horizon));
                if verdict.ok && covered {
                    return Some(trial);
                }
                if hi.is_some() || verdict.first_violation.map_or(false, |(i, _)| i < trial.len()) {
                    return None;
                }
                c = c.clone() + c;
            }
            return None;
        }
    }
    None
}

/// Runs the certifier on a built instance with its own density levels and horizon.
pub fn certify_det_lb(inst: &DetLbInstance) -> Certificate {
    let levels = &inst.t[..=inst.ell];
    let out = certify_no_solution(&inst.instance, &inst.rho, levels, &inst.horizon());
    Certificate {
        rho: inst.rho,
        epsilon: inst.epsilon,
        ell: inst.ell,
        t: inst.t.clone(),
        infeasible: out.witness.is_none(),
        candidates_checked: out.candidates_checked,
        witness: out.witness,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExclusionOutcome {
    /// The ladder was attached and GreedyScaling now fails.
    Excluded,
    /// GreedyScaling already fails on the base; the base is returned unchanged.
    BaseNotCompetitive,
}

#[derive(Clone, Debug)]
pub struct Exclusion {
    pub instance: PiecewiseLinearValue<f64>,
    pub outcome: ExclusionOutcome,
    /// Values beyond this size may change without rescuing the excluded run.
    pub safe_extension: f64,
    /// 1-based index of the first greedy size beyond C.
    pub k: usize,
    pub ell: usize,
    pub epsilon: f64,
    pub t: Vec<f64>,
    /// Ladder points x_0 .. x_{2 ell + 1}.
    pub points: Vec<(f64, f64)>,
}

/// Horizon for runs that have to decide competitiveness around size `c`.
fn run_horizon(c: f64) -> f64 {
    (c * 1e4).max(1e6)
}

/// Attaches a point ladder to `base` beyond GreedyScaling(c1)'s first size above `cap`
/// so that the run is no longer competitive; `base` is kept on [0, cap].
pub fn build_exclusion_instance(
    base: &PiecewiseLinearValue<f64>,
    c1: f64,
    rho: f64,
    cap: f64,
    eps: Option<f64>,
) -> Result<Exclusion> {
    if !(rho > 1.0 && rho < PHI_PLUS_ONE) {
        return Err(Error::InvalidParameter(format!("rho must lie in (1, phi + 1), got {rho}")));
    }
    if !(c1 > 0.0 && c1 < cap) {
        return Err(Error::InvalidParameter(format!("need 0 < c1 < C, got c1 = {c1}, C = {cap}")));
    }
    let run = greedy_scaling(base, &c1, &rho, &run_horizon(cap))?;
    if let GreedyStatus::NotCompetitive(_) = run.status {
        let last = run.steps.last().expect("at least one step");
        let safe = last.reach.unwrap_or(last.prefix_sum).max(last.prefix_sum) + 1.0;
        return Ok(Exclusion {
            instance: base.clone(),
            outcome: ExclusionOutcome::BaseNotCompetitive,
            safe_extension: safe,
            k: run.sizes.len(),
            ell: 0,
            epsilon: 0.0,
            t: Vec::new(),
            points: Vec::new(),
        });
    }
    let sizes = &run.sizes;
    let first = sizes
        .iter()
        .position(|&c| c > cap)
        .ok_or_else(|| Error::InvalidParameter("greedy run never passes C".into()))?;
    let mut k = first.max(1);
    // also keep the reach of the previous size on the base
    while k < sizes.len() && run.steps[k - 1].reach.map_or(true, |p| p > sizes[k]) {
        k += 1;
    }
    if k >= sizes.len() {
        return Err(Error::InvalidParameter("greedy run too short to place the ladder".into()));
    }
    let ck = sizes[k];
    let vk = base.value_at(&ck);
    let z: f64 = sizes[..k].iter().sum();
    let t0 = base.density_at(&ck);
    let mut e = eps.unwrap_or(EPSILON_START);
    let tries = if eps.is_some() { 1 } else { EPSILON_HALVINGS + 1 };
    let mut last_err = None;
    for _ in 0..tries {
        match ladder(base, c1, rho, e, k, ck, vk, z, t0) {
            Ok(ex) => return Ok(ex),
            Err(err) => last_err = Some(err),
        }
        e /= 2.0;
    }
    Err(Error::EpsilonTooLarge(format!(
        "no epsilon down to {e:e} excludes c1 = {c1}: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

#[allow(clippy::too_many_arguments)]
fn ladder(
    base: &PiecewiseLinearValue<f64>,
    c1: f64,
    rho: f64,
    eps: f64,
    k: usize,
    ck: f64,
    vk: f64,
    z: f64,
    t0: f64,
) -> Result<Exclusion> {
    let trace = recurrence_a(z / vk, t0, rho, eps, MAX_RECURRENCE_STEPS)?;
    if trace.first_negative.is_none() {
        return Err(Error::EpsilonTooLarge("recurrence stays positive".into()));
    }
    let ell = trace
        .first_non_increase(false)
        .ok_or_else(|| Error::EpsilonTooLarge("no turn before the negative entry".into()))?;
    let t = trace.values[..=ell + 1].to_vec();
    let g = rho + eps;
    let mut points = Vec::with_capacity(2 * ell + 2);
    for (n, tn) in t.iter().take(ell + 1).enumerate() {
        let level = g.powi(n as i32) * vk;
        points.push((level / tn, level));
        points.push((rho * level / ((1.0 - eps) * tn), rho * level));
    }
    points[0] = (ck, vk);
    let instance = build_from_points(base, &points).map_err(|e| Error::EpsilonTooLarge(e.to_string()))?;
    let safe_extension = points.last().expect("non-empty").0 + 1.0;
    let run = greedy_scaling(&instance, &c1, &rho, &run_horizon(safe_extension))?;
    if !matches!(run.status, GreedyStatus::NotCompetitive(_)) || !follows_ladder(&run, k, &t, ell) {
        return Err(Error::EpsilonTooLarge("greedy run escapes the ladder".into()));
    }
    Ok(Exclusion { instance, outcome: ExclusionOutcome::Excluded, safe_extension, k: k + 1, ell, epsilon: eps, t, points })
}

/// d(c_{k+n}) = t_n for n <= ell, where k is 0-based here.
fn follows_ladder(run: &GreedyRun<f64>, k: usize, t: &[f64], ell: usize) -> bool {
    (0..=ell).all(|n| {
        run.steps
            .get(k + n)
            .map_or(false, |s| (s.density - t[n]).abs() <= 1e-8 * t[n].abs().max(1.0))
    })
}

#[derive(Clone, Debug)]
pub struct Chain {
    pub instance: PiecewiseLinearValue<f64>,
    pub exclusions: Vec<Exclusion>,
}

/// Base used when no instance is given: v(c) = c up to 1, then c^0.9 on a geometric grid.
pub fn default_base() -> PiecewiseLinearValue<f64> {
    PiecewiseLinearValue::power_law(0.9, 1.5, 1e12)
}

/// Excludes every start in turn, each ladder placed beyond the previous safe extension.
pub fn chain_exclusions(base: &PiecewiseLinearValue<f64>, starts: &[f64], rho: f64) -> Result<Chain> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting values".into()));
    }
    let mut sorted = starts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite start"));
    let mut f = base.clone();
    let mut cap = sorted[sorted.len() - 1] + 1.0;
    let mut exclusions = Vec::with_capacity(sorted.len());
    for &c1 in &sorted {
        let ex = build_exclusion_instance(&f, c1, rho, cap, None)?;
        cap = cap.max(ex.safe_extension);
        f = ex.instance.clone();
        exclusions.push(ex);
    }
    Ok(Chain { instance: f, exclusions })
}

/// Whether GreedyScaling(c1, rho) stops as not competitive before `horizon`.
pub fn greedy_fails(f: &PiecewiseLinearValue<f64>, c1: f64, rho: f64, horizon: f64) -> Result<bool> {
    Ok(matches!(greedy_scaling(f, &c1, &rho, &horizon)?.status, GreedyStatus::NotCompetitive(_)))
}
