use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid (zero-mass weighting, bad step size, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Every rank weight in a batch is zero, so no target expectation exists.
    #[error("degenerate batch: all rank weights are zero")]
    DegenerateBatch,

    /// All component densities underflow at a point.
    #[error("degenerate point: every component density vanishes")]
    DegeneratePoint,

    /// Cholesky factorization failed even after the full jitter escalation.
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// A proposal update produced an unusable parameter.
    #[error("step failure: {0}")]
    StepFailure(String),

    /// The operation is not available for the given model or family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The estimator's preconditions cannot be verified from the sample.
    #[error("refused: {0}")]
    Refused(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
