use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched vector or matrix dimensions.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Degenerate input, e.g. a zero range difference.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A chain produced a non-finite gradient.
    #[error("non-finite gradient at step {step}")]
    NonFinite { step: usize },

    /// Problem size exceeds a hard cap.
    #[error("size {size} exceeds cap {cap}")]
    Size { size: usize, cap: usize },

    /// Sample sets of different sizes.
    #[error("sample counts differ ({0} vs {1}); resample both sets to a common size")]
    CountMismatch(usize, usize),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
