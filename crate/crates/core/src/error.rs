use thiserror::Error;

/// Errors raised by the numerical kernels, flows and file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of the operands do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input violates the documented precondition of an operation
    /// (non-skew algebra element, non-unitary group element, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration file is well-formed JSON but a field is unusable.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A run-time invariant of an iteration broke, e.g. spectrum drift on
    /// an adjoint orbit or loss of unitarity.
    #[error("integrity violation: {0}")]
    Integrity(String),

    /// The gradient vanished, so there is no step to take.
    #[error("gradient vanishes at the current point")]
    ZeroGradient,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}

pub(crate) fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}
