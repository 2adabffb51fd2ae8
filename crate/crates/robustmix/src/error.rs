use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A covariance that must be invertible is numerically singular.
    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// The filter removed more mass than the contamination budget allows,
    /// which signals that the caller's covariance promise was violated.
    #[error("filter divergence: removed mass {removed:.4} exceeds budget {budget:.4}")]
    FilterDivergence { removed: f64, budget: f64 },

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
