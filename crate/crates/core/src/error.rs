use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The coupling pushed a transition frequency to zero or below.
    #[error("model regime violated: {0}")]
    ModelRegime(String),

    #[error("integration failed at t = {t:.6e} (step {step:.3e}): {reason}")]
    IntegrationFailure { t: f64, step: f64, reason: String },

    /// Two routes to the same quantity disagreed beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
