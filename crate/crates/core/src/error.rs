use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed caller input: bad index, wrong shape, inconsistent lengths.
    #[error("invalid input: {0}")]
    Input(String),

    /// Input is well formed but mathematically degenerate for the operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A dense oracle was asked to materialise something too large.
    #[error("size guard exceeded: {what} has n = {n}, limit is {limit}")]
    Size {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    /// A mathematical precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by dataset files rather than by configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io { .. } | Error::Degenerate(_)
        )
    }
}
