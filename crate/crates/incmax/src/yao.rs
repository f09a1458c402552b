//! Randomized lower bounds via Yao's principle on a fixed separable instance.
//!
//! A certificate is a density vector d (set R_i has i elements of density d_i)
//! and a distribution p over the requested size. Its bound is the minimum over
//! deterministic algorithms of E_p[i d_i / Alg(i)].

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{int_to_scalar, Scalar};
use crate::separable::{enumerate_sequences, SolutionClass};
use crate::Exact;

pub const ENUMERATION_CAP: usize = 20;
pub const SEARCH_CAP: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct YaoCertificate<T> {
    pub n: usize,
    pub d: Vec<T>,
    pub p: Vec<T>,
    pub claimed_rho: f64,
}

impl<T: Scalar> YaoCertificate<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyInstance);
        }
        if self.d.len() != self.n || self.p.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "expected {} densities and probabilities, got {} and {}",
                self.n,
                self.d.len(),
                self.p.len()
            )));
        }
        if self.d.iter().chain(&self.p).any(|x| x.is_negative()) {
            return Err(Error::InvalidParameter("negative entry".into()));
        }
        let total = self.p.iter().fold(T::zero(), |a, b| a + b.clone());
        if !T::eq_tol(&total, &T::one()) {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(())
    }
}

/// How a block that is only partly reached contributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgReading {
    /// min(max(i - prefix, 0), c) elements of the block.
    Clamped,
    /// max(i - prefix, c) elements once the block is started, as literally displayed.
    Literal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct YaoBound<T> {
    pub rho: T,
    pub argmin: Vec<usize>,
    pub algorithms: usize,
}

pub fn enumerate_algorithms(n: usize) -> Result<Vec<Vec<usize>>> {
    enumerate_algorithms_in(n, SolutionClass::Generous)
}

pub fn enumerate_algorithms_in(n: usize, class: SolutionClass) -> Result<Vec<Vec<usize>>> {
    if n > ENUMERATION_CAP {
        return Err(Error::NTooLarge { n, cap: ENUMERATION_CAP });
    }
    Ok(enumerate_sequences(n, class))
}

/// Value of `alg` at size `i` (1-based) on densities `d`.
pub fn alg_value<T: Scalar>(d: &[T], alg: &[usize], i: usize) -> T {
    alg_value_with(d, alg, i, AlgReading::Clamped)
}

pub fn alg_value_with<T: Scalar>(d: &[T], alg: &[usize], i: usize, reading: AlgReading) -> T {
    let mut best = T::zero();
    let mut prefix = 0usize;
    for &c in alg {
        let taken = match reading {
            AlgReading::Clamped => i.saturating_sub(prefix).min(c),
            AlgReading::Literal if i > prefix => (i - prefix).max(c),
            AlgReading::Literal => 0,
        };
        if taken > 0 {
            best = T::max_of(best, int_to_scalar::<T>(taken) * d[c - 1].clone());
        }
        prefix += c;
    }
    best
}

/// E_p[i d_i / Alg(i)], or None when Alg is zero somewhere p is positive.
fn expected_ratio<T: Scalar>(d: &[T], p: &[T], alg: &[usize], reading: AlgReading) -> Option<T> {
    let mut sum = T::zero();
    for (idx, pi) in p.iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        let i = idx + 1;
        let v = alg_value_with(d, alg, i, reading);
        if v.is_zero() {
            return None;
        }
        sum = sum + pi.clone() * int_to_scalar::<T>(i) * d[idx].clone() / v;
    }
    Some(sum)
}

pub fn yao_bound<T: Scalar>(cert: &YaoCertificate<T>, class: SolutionClass) -> Result<YaoBound<T>> {
    yao_bound_with(cert, class, AlgReading::Clamped)
}

pub fn yao_bound_with<T: Scalar>(
    cert: &YaoCertificate<T>,
    class: SolutionClass,
    reading: AlgReading,
) -> Result<YaoBound<T>> {
    cert.validate()?;
    let algs = enumerate_algorithms_in(cert.n, class)?;
    min_over(&cert.d, &cert.p, &algs, reading)
}

fn min_over<T: Scalar>(d: &[T], p: &[T], algs: &[Vec<usize>], reading: AlgReading) -> Result<YaoBound<T>> {
    let mut best: Option<(T, &Vec<usize>)> = None;
    for alg in algs {
        let Some(r) = expected_ratio(d, p, alg, reading) else {
            continue;
        };
        if best.as_ref().map_or(true, |(b, _)| r < *b) {
            best = Some((r, alg));
        }
    }
    let (rho, argmin) = best.ok_or(Error::DivisionByZero)?;
    Ok(YaoBound { rho, argmin: argmin.clone(), algorithms: algs.len() })
}

/// The N = 10 certificate with value about 1.447.
pub fn reference_certificate() -> YaoCertificate<Exact> {
    let q = |a: i64, b: i64| Exact::ratio(a, b);
    let mut d = vec![q(1, 1), q(1, 2), q(1, 2), q(1, 2), q(2, 5)];
    d.extend(std::iter::repeat(q(1, 3)).take(5));
    let mut p = vec![Exact::from_int(0); 10];
    p[0] = q(132, 1000);
    p[3] = q(395, 1000);
    p[9] = q(473, 1000);
    YaoCertificate { n: 10, d, p, claimed_rho: 1.447 }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub budget: usize,
    pub seed: u64,
    /// Keep d non-increasing.
    pub monotone: bool,
    pub class: SolutionClass,
    /// Step sizes are 2^-1 .. 2^-max_step_exp.
    pub max_step_exp: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 1000, seed: 0, monotone: true, class: SolutionClass::Generous, max_step_exp: 8 }
    }
}

pub fn search_certificate(n: usize, budget: usize, seed: u64) -> Result<YaoCertificate<Exact>> {
    search_certificate_with(n, &SearchOptions { budget, seed, ..SearchOptions::default() })
}

/// Seeded hill climbing: single-coordinate moves on d, pairwise mass transfers on p.
/// Only strict improvements are accepted, so the result never drops below the start.
pub fn search_certificate_with(n: usize, opts: &SearchOptions) -> Result<YaoCertificate<Exact>> {
    if n > SEARCH_CAP {
        return Err(Error::NTooLarge { n, cap: SEARCH_CAP });
    }
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let algs = enumerate_algorithms_in(n, opts.class)?;
    let mut cert = warm_start(n);
    let mut best = min_over(&cert.d, &cert.p, &algs, AlgReading::Clamped)?.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let two = Exact::from_int(2);
    for _ in 0..opts.budget {
        let k = rng.gen_range(1..=opts.max_step_exp.max(1));
        let step = num_traits::pow(two.clone(), k as usize).recip();
        let mut d = cert.d.clone();
        let mut p = cert.p.clone();
        if n > 1 && rng.gen_bool(0.5) {
            let from = rng.gen_range(0..n);
            let to = rng.gen_range(0..n);
            if from == to || p[from].is_zero() {
                continue;
            }
            let moved = Exact::min_of(step, p[from].clone());
            p[from] = p[from].clone() - moved.clone();
            p[to] = p[to].clone() + moved;
        } else {
            let i = rng.gen_range(0..n);
            let up = rng.gen_bool(0.5);
            d[i] = if up { d[i].clone() + step } else { d[i].clone() - step };
            if d[i].is_negative() {
                continue;
            }
            if opts.monotone && d.windows(2).any(|w| w[1] > w[0]) {
                continue;
            }
        }
        let Ok(b) = min_over(&d, &p, &algs, AlgReading::Clamped) else {
            continue;
        };
        if b.rho > best {
            best = b.rho;
            cert.d = d;
            cert.p = p;
        }
    }
    cert.claimed_rho = best.as_f64();
    Ok(cert)
}

fn warm_start(n: usize) -> YaoCertificate<Exact> {
    if n == 10 {
        return reference_certificate();
    }
    let d = (1..=n).map(|i| if i == 1 { Exact::from_int(1) } else { Exact::ratio(1, 2) }).collect();
    let p = vec![Exact::ratio(1, n as i64); n];
    YaoCertificate { n, d, p, claimed_rho: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> Exact {
        Exact::ratio(a, b)
    }

    /// Independent counter: sequences built by the next block, tracking only (last, sum).
    fn count(n: usize, last: usize, sum: usize, generous: bool) -> usize {
        (last + 1..=n)
            .filter(|&c| if generous { sum < n } else { sum + c <= n })
            .map(|c| 1 + count(n, c, sum + c, generous))
            .sum()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_algorithms(1).unwrap(), vec![vec![1]]);
        let three = enumerate_algorithms(3).unwrap();
        for a in [vec![1, 2], vec![3], vec![1, 3], vec![2, 3]] {
            assert!(three.contains(&a), "{a:?}");
        }
        let bounded = enumerate_algorithms_in(3, SolutionClass::Bounded).unwrap();
        assert!(!bounded.contains(&vec![2, 3]));
        assert!(bounded.contains(&vec![1, 2]));
        assert!(!three.contains(&vec![1, 2, 3]));
    }

    #[test]
    fn enumeration_counts_match_counter() {
        for n in 1..=12 {
            assert_eq!(enumerate_algorithms(n).unwrap().len(), count(n, 0, 0, true));
            assert_eq!(
                enumerate_algorithms_in(n, SolutionClass::Bounded).unwrap().len(),
                count(n, 0, 0, false)
            );
        }
        assert!(matches!(enumerate_algorithms(21), Err(Error::NTooLarge { .. })));
    }

    #[test]
    fn hand_values() {
        let c = reference_certificate();
        assert_eq!(alg_value(&c.d, &[1, 4, 10], 1), q(1, 1));
        assert_eq!(alg_value(&c.d, &[4], 10), q(2, 1));
        assert_eq!(alg_value_with(&c.d, &[4], 10, AlgReading::Literal), q(5, 1));
        assert_eq!(alg_value(&c.d, &[1, 4, 10], 5), q(2, 1));
    }

    #[test]
    fn reference_certificate_bound() {
        let c = reference_certificate();
        for class in [SolutionClass::Generous, SolutionClass::Bounded] {
            let b = yao_bound(&c, class).unwrap();
            assert!(b.rho >= q(1446, 1000), "{}", b.rho);
            assert_eq!(b.argmin, vec![1, 3, 4]);
        }
    }

    #[test]
    fn trivial_certificate() {
        let c = YaoCertificate { n: 1, d: vec![q(1, 1)], p: vec![q(1, 1)], claimed_rho: 1.0 };
        assert_eq!(yao_bound(&c, SolutionClass::Generous).unwrap().rho, q(1, 1));
        let s = search_certificate(1, 50, 3).unwrap();
        assert!((s.claimed_rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_is_division_by_zero() {
        let c = YaoCertificate { n: 2, d: vec![q(0, 1), q(0, 1)], p: vec![q(1, 2), q(1, 2)], claimed_rho: 0.0 };
        assert_eq!(yao_bound(&c, SolutionClass::Generous), Err(Error::DivisionByZero));
    }

    #[test]
    fn search_is_deterministic_and_keeps_warm_start() {
        let a = search_certificate(5, 300, 7).unwrap();
        let b = search_certificate(5, 300, 7).unwrap();
        assert_eq!(a, b);
        let w = search_certificate(10, 60, 1).unwrap();
        assert!(w.claimed_rho >= 1.447 - 1e-6);
    }

    fn brute(d: &[Exact], p: &[Exact]) -> Option<Exact> {
        // every subset-sequence, clamped element counting done by walking elements
        let n = d.len();
        let mut best: Option<Exact> = None;
        for alg in enumerate_sequences(n, SolutionClass::Generous) {
            let order: Vec<usize> = alg.iter().flat_map(|&c| std::iter::repeat(c).take(c)).collect();
            let mut total = Exact::from_int(0);
            let mut ok = true;
            for i in 1..=n {
                if p[i - 1].is_zero() {
                    continue;
                }
                let mut per = vec![0usize; n + 1];
                for &c in order.iter().take(i) {
                    per[c] += 1;
                }
                let v = (1..=n).map(|c| Exact::from_int(per[c] as i64) * d[c - 1].clone()).fold(q(0, 1), Exact::max_of);
                if v.is_zero() {
                    ok = false;
                    break;
                }
                total += p[i - 1].clone() * Exact::from_int(i as i64) * d[i - 1].clone() / v;
            }
            if ok && best.as_ref().map_or(true, |b| total < *b) {
                best = Some(total);
            }
        }
        best
    }

    fn arb_cert() -> impl Strategy<Value = YaoCertificate<Exact>> {
        (prop::collection::vec(1i64..20, 4), prop::collection::vec(0i64..10, 4)).prop_filter_map(
            "positive mass",
            |(d, w)| {
                let total: i64 = w.iter().sum();
                (total > 0).then(|| YaoCertificate {
                    n: 4,
                    d: d.iter().map(|&x| q(x, 10)).collect(),
                    p: w.iter().map(|&x| q(x, total)).collect(),
                    claimed_rho: 0.0,
                })
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_element_level_brute_force(c in arb_cert()) {
            let b = yao_bound(&c, SolutionClass::Generous).unwrap();
            prop_assert_eq!(Some(b.rho), brute(&c.d, &c.p));
        }

        #[test]
        fn scale_invariant(c in arb_cert(), s in 1i64..50) {
            let b = yao_bound(&c, SolutionClass::Generous).unwrap();
            let mut scaled = c.clone();
            scaled.d = c.d.iter().map(|x| x.clone() * q(s, 7)).collect();
            let bs = yao_bound(&scaled, SolutionClass::Generous).unwrap();
            prop_assert_eq!(b.rho, bs.rho);
            prop_assert_eq!(b.argmin, bs.argmin);
        }

        #[test]
        fn bounded_class_never_lower(c in arb_cert()) {
            let g = yao_bound(&c, SolutionClass::Generous).unwrap();
            let b = yao_bound(&c, SolutionClass::Bounded).unwrap();
            prop_assert!(b.rho >= g.rho);
        }

        #[test]
        fn alg_value_monotone(c in arb_cert(), pick in prop::collection::btree_set(1usize..=4, 1..4)) {
            let alg: Vec<usize> = pick.into_iter().collect();
            for i in 1..4 {
                prop_assert!(alg_value(&c.d, &alg, i) <= alg_value(&c.d, &alg, i + 1));
            }
        }
    }
}
