use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    /// A field became nonfinite or exceeded the configured growth limit.
    /// `step` counts accepted steps before the failing one.
    #[error("numeric overflow at step {step} (t = {t})")]
    NumericOverflow { step: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
