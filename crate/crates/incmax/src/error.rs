use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("universe of {n} elements exceeds the exhaustive limit {limit}")]
    UniverseTooLarge { n: usize, limit: usize },
    #[error("not accountable: subset {0:?} has no removable element")]
    NotAccountable(Vec<usize>),
    #[error("invalid sizes: {0}")]
    InvalidSizes(String),
    #[error("empty instance")]
    EmptyInstance,
    #[error("size {size} out of range 0..={max}")]
    SizeOutOfRange { size: usize, max: usize },
    #[error("instance with {n} sets exceeds the search cap {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("invalid points: {0}")]
    InvalidPoints(String),
    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),
    #[error("value function is bounded; reach undefined above {0}")]
    DomainExhausted(f64),
    #[error("invalid start: c1 must be positive")]
    InvalidStart,
    #[error("epsilon too large: {0}")]
    EpsilonTooLarge(String),
    #[error("rho too large: {0}")]
    RhoTooLarge(String),
    #[error("greedy scaling already fails on the base instance")]
    BaseNotCompetitive,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("N = {n} exceeds the cap {cap}")]
    NTooLarge { n: usize, cap: usize },
    #[error("every algorithm has a zero-value size with positive probability")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
