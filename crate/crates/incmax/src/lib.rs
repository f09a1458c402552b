//! Incremental maximization under a cardinality constraint.
//!
//! Exact separable instances, piecewise-linear continuous instances with the
//! greedy scaling algorithm, recurrence-driven adversarial constructions,
//! the randomized scaling algorithm and a Yao-style lower bound verifier.

pub mod continuous;
pub mod error;
pub mod incmax_core;
pub mod io;
pub mod lower_bounds;
pub mod randomized;
pub mod scalar;
pub mod separable;
pub mod yao;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact arithmetic used by the separable model and the Yao verifier.
pub type Exact = num_rational::BigRational;
pub type Real = f64;

pub type ExactSeparable = separable::SeparableInstance<Exact>;
pub type RealSeparable = separable::SeparableInstance<Real>;
pub type ExactPl = continuous::PiecewiseLinearValue<Exact>;
pub type RealPl = continuous::PiecewiseLinearValue<Real>;
pub type ExactCertificate = yao::YaoCertificate<Exact>;


/// Golden ratio plus one, the deterministic upper bound.
pub const PHI_PLUS_ONE: f64 = 2.618_033_988_749_895;
