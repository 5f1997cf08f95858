use std::fmt;

use thiserror::Error;

/// Every failure the library can report. The variant is the error *kind*;
/// the CLI and the C ABI map kinds onto exit codes and status codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed inconsistent arguments (length mismatch, empty input, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A kernel, integrand or basis function produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A mathematical invariant failed (indefinite Gram, violated bound, ...).
    #[error("invariant violation: {message}")]
    InvariantViolation {
        message: String,
        /// Diagnostic report serialized as JSON, when one is available.
        report: Option<serde_json::Value>,
    },

    /// A Hermitian factorization broke down even after diagonal jitter.
    #[error("conditioning error: {message} (condition estimate {condition_estimate:.3e})")]
    Conditioning { message: String, condition_estimate: f64 },

    /// A computed quantity left its admissible range by more than rounding.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Malformed JSON/CSV input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Unknown kernel family in a spec file.
    #[error("unknown kernel family {name:?}; known families: {known}")]
    UnknownFamily { name: String, known: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Stable machine-readable kind names, used in CLI error JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Argument,
    Domain,
    Evaluation,
    InvariantViolation,
    Conditioning,
    NumericalFailure,
    Parse,
    UnknownFamily,
    Io,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Argument => "argument",
            ErrorKind::Domain => "domain",
            ErrorKind::Evaluation => "evaluation",
            ErrorKind::InvariantViolation => "invariant_violation",
            ErrorKind::Conditioning => "conditioning",
            ErrorKind::NumericalFailure => "numerical_failure",
            ErrorKind::Parse => "parse",
            ErrorKind::UnknownFamily => "unknown_family",
            ErrorKind::Io => "io",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Argument(_) => ErrorKind::Argument,
            Error::Domain(_) => ErrorKind::Domain,
            Error::Evaluation(_) => ErrorKind::Evaluation,
            Error::InvariantViolation { .. } => ErrorKind::InvariantViolation,
            Error::Conditioning { .. } => ErrorKind::Conditioning,
            Error::NumericalFailure(_) => ErrorKind::NumericalFailure,
            Error::Parse(_) => ErrorKind::Parse,
            Error::UnknownFamily { .. } => ErrorKind::UnknownFamily,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn invariant(message: impl Into<String>, report: Option<serde_json::Value>) -> Self {
        Error::InvariantViolation {
            message: message.into(),
            report,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serde_json's message already ends with "at line L column C"
        Error::Parse(e.to_string())
    }
}
