use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain (bad `k`, mismatched
    /// sizes, invalid anchors, too-small generator range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The ordinal data cannot be realized by any embedding on a line.
    #[error("profile is not line-consistent: {0}")]
    Inconsistent(String),

    /// An invariant that the analysis relies on does not hold for the input.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("refusing brute force for n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("ordering fallback needs {unresolved} unresolved items, cap is {cap}")]
    FallbackCap { unresolved: usize, cap: usize },

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn inconsistent(msg: impl Into<String>) -> Self {
        Error::Inconsistent(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
