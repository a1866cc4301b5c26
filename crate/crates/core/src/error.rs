use thiserror::Error;

use crate::scalar::ParseScalarError;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions or references that do not fit together.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A documented precondition failed; `witness` names the offending points.
    #[error("precondition failed: {reason} (witness {witness:?})")]
    Precondition { reason: String, witness: Vec<usize> },

    #[error("not a metric: {0}")]
    Metric(String),

    /// Two certificates that must agree did not.
    #[error("certificate mismatch: {0}")]
    Certificate(String),

    #[error(transparent)]
    Parse(#[from] ParseScalarError),

    /// Malformed input file content at `location`.
    #[error("{location}: {message}")]
    Input { location: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn precondition(reason: impl Into<String>, witness: Vec<usize>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            witness,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
