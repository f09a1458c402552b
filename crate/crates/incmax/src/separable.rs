//! Separable instances: disjoint sets R_i of uniform density, f(X) = max_i |X ∩ R_i| d_i.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{int_to_scalar, Scalar};

pub const DEFAULT_SEARCH_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableInstance<T> {
    /// (cardinality, density) pairs in input order.
    pub sets: Vec<(usize, T)>,
}

/// Which deterministic solutions an exhaustive search ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionClass {
    /// Strictly increasing, every prefix before the last block sums to less than N.
    Generous,
    /// Strictly increasing with total at most N.
    Bounded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompetitiveRatio<T> {
    Finite(T),
    /// Some size C >= 1 gets value zero.
    Infinite { first_zero: usize },
}

impl<T: Scalar> CompetitiveRatio<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            CompetitiveRatio::Finite(r) => Some(r),
            CompetitiveRatio::Infinite { .. } => None,
        }
    }

    fn better_than(&self, other: &Self) -> bool {
        match (self, other) {
            (CompetitiveRatio::Finite(a), CompetitiveRatio::Finite(b)) => a < b,
            (CompetitiveRatio::Finite(_), CompetitiveRatio::Infinite { .. }) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow<T> {
    pub size: usize,
    pub alg_value: T,
    pub opt_value: T,
    pub ratio: Option<T>,
}

impl<T: Scalar> SeparableInstance<T> {
    /// `densities[i]` belongs to the set of cardinality i + 1.
    pub fn from_densities(densities: Vec<T>) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::EmptyInstance);
        }
        Ok(SeparableInstance {
            sets: densities.into_iter().enumerate().map(|(i, d)| (i + 1, d)).collect(),
        })
    }

    /// Largest cardinality.
    pub fn n(&self) -> usize {
        self.sets.iter().map(|s| s.0).max().unwrap_or(0)
    }

    pub fn total_elements(&self) -> usize {
        self.sets.iter().map(|s| s.0).sum()
    }

    /// Best density among sets of cardinality `size`.
    pub fn density_of(&self, size: usize) -> Option<T> {
        self.sets
            .iter()
            .filter(|s| s.0 == size)
            .map(|s| s.1.clone())
            .fold(None, |acc: Option<T>, d| Some(acc.map_or(d.clone(), |a| T::max_of(a, d))))
    }

    /// Densities by cardinality 1..=n; only meaningful for normalized instances.
    pub fn densities(&self) -> Vec<T> {
        (1..=self.n())
            .map(|i| self.density_of(i).unwrap_or_else(T::zero))
            .collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.densities()
            .into_iter()
            .enumerate()
            .map(|(i, d)| d * int_to_scalar::<T>(i + 1))
            .collect()
    }

    /// Best value with `size` elements: max_j min(size, |R_j|) d_j.
    pub fn opt(&self, size: usize) -> T {
        self.sets.iter().fold(T::zero(), |acc, (c, d)| {
            T::max_of(acc, int_to_scalar::<T>(size.min(*c)) * d.clone())
        })
    }

    pub fn is_normalized(&self) -> bool {
        let n = self.n();
        if self.sets.len() != n || self.sets.iter().enumerate().any(|(i, s)| s.0 != i + 1) {
            return false;
        }
        let d = self.densities();
        let v = self.values();
        d[0] <= T::one()
            && d.windows(2).all(|w| w[0] >= w[1])
            && v.windows(2).all(|w| w[0] <= w[1])
            && d.iter().all(|x| *x > T::zero())
    }
}

/// One set per cardinality 1..=N, non-increasing densities with d_1 <= 1,
/// non-decreasing values; optimum values at every size are preserved up to scale.
pub fn normalize<T: Scalar>(instance: &SeparableInstance<T>) -> Result<SeparableInstance<T>> {
    if instance.sets.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if instance.sets.iter().any(|(c, d)| *c == 0 || *d <= T::zero()) {
        return Err(Error::InvalidParameter("sizes and densities must be positive".into()));
    }
    let mut best: BTreeMap<usize, T> = BTreeMap::new();
    for (c, d) in &instance.sets {
        let e = best.entry(*c).or_insert_with(|| d.clone());
        if *d > *e {
            *e = d.clone();
        }
    }
    let n = *best.keys().next_back().expect("non-empty");
    let mut dens: Vec<T> = Vec::with_capacity(n);
    let first = best.get(&1).cloned().unwrap_or_else(|| {
        // missing R_1 takes the density of the smallest present set
        best.values().next().expect("non-empty").clone()
    });
    dens.push(first);
    for i in 2..=n {
        match best.get(&i) {
            Some(d) => dens.push(d.clone()),
            None => {
                let prev = dens[i - 2].clone() * int_to_scalar::<T>(i - 1);
                dens.push(prev / int_to_scalar::<T>(i));
            }
        }
    }
    // Opt(i) = max(i * max_{j>=i} d_j, max_{j<i} v_j)
    let mut suffix = dens.clone();
    for i in (0..n.saturating_sub(1)).rev() {
        suffix[i] = T::max_of(suffix[i].clone(), suffix[i + 1].clone());
    }
    let mut values: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let own = suffix[i].clone() * int_to_scalar::<T>(i + 1);
        let v = match values.last() {
            Some(prev) => T::max_of(own, prev.clone()),
            None => own,
        };
        values.push(v);
    }
    let mut out: Vec<T> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v / int_to_scalar::<T>(i + 1))
        .collect();
    if out[0] > T::one() {
        let scale = out[0].clone();
        for d in &mut out {
            *d = d.clone() / scale.clone();
        }
    }
    SeparableInstance::from_densities(out)
}

fn check_solution<T: Scalar>(instance: &SeparableInstance<T>, solution: &[usize]) -> Result<Vec<T>> {
    if solution.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSizes("sizes must be strictly increasing".into()));
    }
    solution
        .iter()
        .map(|&c| {
            instance
                .density_of(c)
                .ok_or_else(|| Error::InvalidSizes(format!("no set of cardinality {c}")))
        })
        .collect()
}

fn evaluate_checked<T: Scalar>(solution: &[usize], dens: &[T], size: usize) -> T {
    let mut prefix = 0usize;
    let mut best = T::zero();
    for (c, d) in solution.iter().zip(dens) {
        if size <= prefix {
            break;
        }
        let taken = (size - prefix).min(*c);
        best = T::max_of(best, int_to_scalar::<T>(taken) * d.clone());
        prefix += c;
    }
    best
}

/// Value of the first `size` elements when R_{c_1}, R_{c_2}, ... are added in turn.
pub fn evaluate<T: Scalar>(
    instance: &SeparableInstance<T>,
    solution: &[usize],
    size: usize,
) -> Result<T> {
    let max = instance.total_elements();
    if size > max {
        return Err(Error::SizeOutOfRange { size, max });
    }
    let dens = check_solution(instance, solution)?;
    Ok(evaluate_checked(solution, &dens, size))
}

/// max over C in 1..=N of Opt(C) / value(C).
pub fn competitive_ratio<T: Scalar>(
    instance: &SeparableInstance<T>,
    solution: &[usize],
) -> Result<CompetitiveRatio<T>> {
    let dens = check_solution(instance, solution)?;
    let opts: Vec<T> = (1..=instance.n()).map(|c| instance.opt(c)).collect();
    Ok(ratio_checked(solution, &dens, &opts))
}

fn ratio_checked<T: Scalar>(solution: &[usize], dens: &[T], opts: &[T]) -> CompetitiveRatio<T> {
    let mut worst: Option<T> = None;
    for (i, opt) in opts.iter().enumerate() {
        let size = i + 1;
        let value = evaluate_checked(solution, dens, size);
        if value <= T::zero() {
            return CompetitiveRatio::Infinite { first_zero: size };
        }
        let r = opt.clone() / value;
        if worst.as_ref().map_or(true, |w| r > *w) {
            worst = Some(r);
        }
    }
    CompetitiveRatio::Finite(worst.unwrap_or_else(T::one))
}

pub fn value_profile<T: Scalar>(
    instance: &SeparableInstance<T>,
    solution: &[usize],
) -> Result<Vec<ProfileRow<T>>> {
    let dens = check_solution(instance, solution)?;
    Ok((1..=instance.n())
        .map(|size| {
            let alg_value = evaluate_checked(solution, &dens, size);
            let opt_value = instance.opt(size);
            let ratio = (alg_value > T::zero()).then(|| opt_value.clone() / alg_value.clone());
            ProfileRow { size, alg_value, opt_value, ratio }
        })
        .collect())
}

/// All strictly increasing sequences over 1..=n of the given class, lexicographic order.
pub fn enumerate_sequences(n: usize, class: SolutionClass) -> Vec<Vec<usize>> {
    fn rec(n: usize, class: SolutionClass, seq: &mut Vec<usize>, sum: usize, out: &mut Vec<Vec<usize>>) {
        let last = seq.last().copied().unwrap_or(0);
        for c in last + 1..=n {
            let fits = match class {
                SolutionClass::Generous => sum < n,
                SolutionClass::Bounded => sum + c <= n,
            };
            if !fits {
                continue;
            }
            seq.push(c);
            out.push(seq.clone());
            rec(n, class, seq, sum + c, out);
            seq.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, class, &mut Vec::new(), 0, &mut out);
    out
}

pub fn best_deterministic<T: Scalar>(
    instance: &SeparableInstance<T>,
) -> Result<(Vec<usize>, CompetitiveRatio<T>)> {
    best_deterministic_in(instance, SolutionClass::Generous, DEFAULT_SEARCH_CAP)
}

pub fn best_deterministic_in<T: Scalar>(
    instance: &SeparableInstance<T>,
    class: SolutionClass,
    cap: usize,
) -> Result<(Vec<usize>, CompetitiveRatio<T>)> {
    let n = instance.n();
    if n > cap {
        return Err(Error::InstanceTooLarge { n, cap });
    }
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let dens_of: Vec<Option<T>> = (0..=n).map(|c| instance.density_of(c)).collect();
    let opts: Vec<T> = (1..=n).map(|c| instance.opt(c)).collect();
    let mut best: Option<(Vec<usize>, CompetitiveRatio<T>)> = None;
    for seq in enumerate_sequences(n, class) {
        let Some(dens) = seq.iter().map(|&c| dens_of[c].clone()).collect::<Option<Vec<T>>>() else {
            continue;
        };
        let r = ratio_checked(&seq, &dens, &opts);
        if best.as_ref().map_or(true, |(_, b)| r.better_than(b)) {
            best = Some((seq, r));
        }
    }
    best.ok_or_else(|| Error::InvalidSizes("no admissible solution".into()))
}

/// The 16-set instance whose discrete ratio exceeds every monotone interpolation.
pub fn observation_instance<T: Scalar>() -> SeparableInstance<T> {
    let mut dens: Vec<T> = Vec::with_capacity(16);
    for i in 1..=16usize {
        let d = match i {
            1 => T::one(),
            3 | 4 => T::ratio(17, 40),
            12..=16 => T::ratio(16473, 107200),
            _ => dens[i - 2].clone() * int_to_scalar::<T>(i - 1) / int_to_scalar::<T>(i),
        };
        dens.push(d);
    }
    SeparableInstance::from_densities(dens).expect("non-empty")
}
