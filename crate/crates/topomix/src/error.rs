use thiserror::Error;

/// Errors surfaced by this crate.
///
/// `Parse` and the input-validation variants indicate bad user input; `Contract`
/// indicates an internal numeric guarantee failed and the result cannot be trusted.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("target grid does not cover the support of the density")]
    DomainCoverage,

    #[error("numeric contract violated: {0}")]
    Contract(String),
}

impl Error {
    /// Shorthand for an [`Error::InvalidParameter`].
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error is caused by user-supplied input rather than an
    /// internal numeric failure. CLI maps input errors to exit code 2 and
    /// contract violations to exit code 3.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Contract(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
