use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the direction table maximum of {max}")]
    UnsupportedDimension { requested: usize, max: usize },

    #[error("requested an empty batch (n = 0)")]
    EmptyRequest,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point count {n} exceeds the brute-force guard of {max}")]
    CostGuard { n: usize, max: usize },

    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("matrix is not symmetric positive definite (failing pivot {index})")]
    NotPositiveDefinite { index: usize },

    #[error("rate fit needs at least {min} points with positive values, got {got}")]
    DegenerateFit { min: usize, got: usize },

    #[error("non-finite gradient encountered at iteration {iter}")]
    NonFiniteGradient { iter: usize },

    #[error("{count} of {total} resampled gradients were non-finite (> 1% tolerated)")]
    TooManyNonFinite { count: usize, total: usize },

    #[error("malformed direction table at line {line}: {reason}")]
    BadDirectionTable { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
