use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("duplicate step {0:?}")]
    DuplicateStep(Vec<i64>),
    #[error("non-positive weight {0}")]
    NonPositiveWeight(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("step set is singular")]
    Singular,
    #[error("non-central weighting")]
    NonCentral,
    #[error("step lists differ")]
    StepListsDiffer,
    #[error("point {0:?} lies outside the orthant")]
    OutsideOrthant(Vec<i64>),
    #[error("length {n} out of range (table holds 0..={n_max})")]
    LengthOutOfRange { n: usize, n_max: usize },
    #[error("resource guard exceeded: {needed} > {limit}")]
    ResourceGuard { needed: u128, limit: u128 },
    #[error("empty layer at length {0}")]
    EmptyLayer(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),
}

pub type Result<T> = std::result::Result<T, Error>;
