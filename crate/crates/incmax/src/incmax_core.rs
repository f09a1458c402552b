//! General instances given by a set-function oracle over a small universe.
//!
//! Subsets are bitmasks over `0..n`.

use crate::error::{Error, Result};
use crate::scalar::{int_to_scalar, Scalar};
use crate::separable::SeparableInstance;

pub type Subset = u32;

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 15;
const HARD_LIMIT: usize = 24;

pub trait Objective<T: Scalar>: Sync {
    fn universe_size(&self) -> usize;
    fn eval(&self, set: Subset) -> T;
}

pub fn members(set: Subset) -> Vec<usize> {
    (0..32).filter(|i| set >> i & 1 == 1).collect()
}

pub fn subset_of(elements: &[usize]) -> Subset {
    elements.iter().fold(0, |acc, &e| acc | 1 << e)
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit.min(HARD_LIMIT) {
        return Err(Error::UniverseTooLarge { n, limit: limit.min(HARD_LIMIT) });
    }
    Ok(())
}

/// Additive objective; covers knapsack-style values.
#[derive(Clone, Debug)]
pub struct Modular<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> Objective<T> for Modular<T> {
    fn universe_size(&self) -> usize {
        self.values.len()
    }
    fn eval(&self, set: Subset) -> T {
        members(set)
            .into_iter()
            .fold(T::zero(), |acc, e| acc + self.values[e].clone())
    }
}

/// Explicit value table indexed by bitmask.
#[derive(Clone, Debug)]
pub struct Table<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> Table<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        check_limit(n, HARD_LIMIT)?;
        if values.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "table needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(Table { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(Subset) -> T) -> Result<Self> {
        check_limit(n, HARD_LIMIT)?;
        Ok(Table { n, values: (0..1u32 << n).map(f).collect() })
    }

    pub fn tabulate(oracle: &dyn Objective<T>) -> Result<Self> {
        Self::from_fn(oracle.universe_size(), |s| oracle.eval(s))
    }
}

impl<T: Scalar> Objective<T> for Table<T> {
    fn universe_size(&self) -> usize {
        self.n
    }
    fn eval(&self, set: Subset) -> T {
        self.values[set as usize].clone()
    }
}

/// Maximum-weight matching restricted to the chosen edges. Elements are edges.
#[derive(Clone, Debug)]
pub struct Matching<T> {
    pub edges: Vec<(usize, usize, T)>,
    table: Vec<T>,
}

impl<T: Scalar> Matching<T> {
    pub fn new(edges: Vec<(usize, usize, T)>) -> Result<Self> {
        let m = edges.len();
        check_limit(m, HARD_LIMIT)?;
        let mut table = vec![T::zero(); 1 << m];
        for set in 1..(1u32 << m) {
            let e = set.trailing_zeros() as usize;
            let rest = set & !(1 << e);
            let (a, b, ref w) = edges[e];
            let clash = edges.iter().enumerate().fold(0u32, |acc, (j, &(x, y, _))| {
                if x == a || x == b || y == a || y == b {
                    acc | 1 << j
                } else {
                    acc
                }
            });
            let with = w.clone() + table[(rest & !clash) as usize].clone();
            let without = table[rest as usize].clone();
            table[set as usize] = T::max_of(with, without);
        }
        Ok(Matching { edges, table })
    }
}

impl<T: Scalar> Objective<T> for Matching<T> {
    fn universe_size(&self) -> usize {
        self.edges.len()
    }
    fn eval(&self, set: Subset) -> T {
        self.table[set as usize].clone()
    }
}

/// Weighted coverage: element `e` covers `sets[e]`, items carry `weights`.
#[derive(Clone, Debug)]
pub struct Coverage<T> {
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<T>,
}

impl<T: Scalar> Objective<T> for Coverage<T> {
    fn universe_size(&self) -> usize {
        self.sets.len()
    }
    fn eval(&self, set: Subset) -> T {
        let mut covered = vec![false; self.weights.len()];
        for e in members(set) {
            for &item in &self.sets[e] {
                covered[item] = true;
            }
        }
        covered
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| **c)
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
    }
}

/// Fixture oracles as loaded from JSON.
#[derive(Clone, Debug)]
pub enum Fixture<T: Scalar> {
    Modular(Modular<T>),
    Matching(Matching<T>),
    Coverage(Coverage<T>),
}

impl<T: Scalar> Objective<T> for Fixture<T> {
    fn universe_size(&self) -> usize {
        match self {
            Fixture::Modular(o) => o.universe_size(),
            Fixture::Matching(o) => o.universe_size(),
            Fixture::Coverage(o) => o.universe_size(),
        }
    }
    fn eval(&self, set: Subset) -> T {
        match self {
            Fixture::Modular(o) => o.eval(set),
            Fixture::Matching(o) => o.eval(set),
            Fixture::Coverage(o) => o.eval(set),
        }
    }
}

/// `opt[k]` and `witnesses[k]` for k = 0..=n.
#[derive(Clone, Debug)]
pub struct OptProfile<T> {
    pub opt: Vec<T>,
    pub witnesses: Vec<Subset>,
}

impl<T: Scalar> OptProfile<T> {
    /// Opt(1), ..., Opt(n).
    pub fn values(&self) -> &[T] {
        &self.opt[1..]
    }
}

/// Calls `visit` on every k-subset of `0..n` in lexicographic order of element lists.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(Subset)) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(subset_of(&idx));
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn opt_profile<T: Scalar>(oracle: &dyn Objective<T>) -> Result<OptProfile<T>> {
    opt_profile_with_limit(oracle, DEFAULT_EXHAUSTIVE_LIMIT)
}

pub fn opt_profile_with_limit<T: Scalar>(
    oracle: &dyn Objective<T>,
    limit: usize,
) -> Result<OptProfile<T>> {
    let n = oracle.universe_size();
    check_limit(n, limit)?;
    let mut opt = vec![T::zero()];
    let mut witnesses = vec![0];
    for k in 1..=n {
        let mut best: Option<(T, Subset)> = None;
        for_each_combination(n, k, |s| {
            let v = oracle.eval(s);
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, s));
            }
        });
        let (v, s) = best.expect("k <= n");
        opt.push(v);
        witnesses.push(s);
    }
    Ok(OptProfile { opt, witnesses })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccountabilityReport {
    pub holds: bool,
    pub violating_set: Option<Vec<usize>>,
}

fn removable<T: Scalar>(oracle: &dyn Objective<T>, set: Subset) -> Option<usize> {
    let fx = oracle.eval(set);
    let size: T = int_to_scalar(set.count_ones() as usize);
    let need = fx.clone() - fx / size;
    members(set)
        .into_iter()
        .find(|&e| T::ge_tol(&oracle.eval(set & !(1 << e)), &need))
}

pub fn is_accountable<T: Scalar>(oracle: &dyn Objective<T>) -> Result<AccountabilityReport> {
    let n = oracle.universe_size();
    check_limit(n, DEFAULT_EXHAUSTIVE_LIMIT)?;
    for k in 1..=n {
        let mut bad = None;
        for_each_combination(n, k, |s| {
            if bad.is_none() && removable(oracle, s).is_none() {
                bad = Some(s);
            }
        });
        if let Some(s) = bad {
            return Ok(AccountabilityReport { holds: false, violating_set: Some(members(s)) });
        }
    }
    Ok(AccountabilityReport { holds: true, violating_set: None })
}

pub fn is_monotone<T: Scalar>(oracle: &dyn Objective<T>) -> bool {
    let n = oracle.universe_size();
    (1..1u32 << n).all(|s| {
        let fx = oracle.eval(s);
        members(s).into_iter().all(|e| oracle.eval(s & !(1 << e)) <= fx)
    })
}

/// Ordering of `set` whose i-th prefix is worth at least i/|X| of the whole.
pub fn accountable_ordering<T: Scalar>(oracle: &dyn Objective<T>, set: Subset) -> Result<Vec<usize>> {
    let mut rest = set;
    let mut reversed = Vec::with_capacity(set.count_ones() as usize);
    while rest != 0 {
        let e = removable(oracle, rest).ok_or_else(|| Error::NotAccountable(members(rest)))?;
        reversed.push(e);
        rest &= !(1 << e);
    }
    reversed.reverse();
    Ok(reversed)
}

pub fn reduce_to_separable<T: Scalar>(oracle: &dyn Objective<T>) -> Result<SeparableInstance<T>> {
    let profile = opt_profile(oracle)?;
    let densities = profile
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v.clone() / int_to_scalar::<T>(i + 1))
        .collect();
    SeparableInstance::from_densities(densities)
}

/// Adds the witnesses O_{c_1}, O_{c_2}, ... in accountable order, skipping repeats.
pub fn lift_solution<T: Scalar>(oracle: &dyn Objective<T>, sizes: &[usize]) -> Result<Vec<usize>> {
    let profile = opt_profile(oracle)?;
    lift_with_profile(oracle, &profile, sizes)
}

pub fn lift_with_profile<T: Scalar>(
    oracle: &dyn Objective<T>,
    profile: &OptProfile<T>,
    sizes: &[usize],
) -> Result<Vec<usize>> {
    let n = oracle.universe_size();
    if sizes.iter().any(|&c| c == 0 || c > n) {
        return Err(Error::InvalidSizes(format!("sizes must lie in 1..={n}")));
    }
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::InvalidSizes(format!("total {total} exceeds {n} elements")));
    }
    let mut seen: Subset = 0;
    let mut out = Vec::new();
    for &c in sizes {
        for e in accountable_ordering(oracle, profile.witnesses[c])? {
            if seen >> e & 1 == 0 {
                seen |= 1 << e;
                out.push(e);
            }
        }
    }
    Ok(out)
}
