use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown benchmark function {0} (catalog holds 1..=24)")]
    Catalog(u32),

    /// A caller broke an operation's precondition (shapes, empty inputs, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The sample is too small or too degenerate for a feature group.
    #[error("degenerate input for {group}: {reason}")]
    Degenerate { group: &'static str, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn degenerate(group: &'static str, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            group,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            Error::Contract(_) => 3,
            _ => 2,
        }
    }
}
