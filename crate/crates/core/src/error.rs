use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum NelError {
    /// A dataset or embedding file failed to parse; carries the offending line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A domain invariant was violated (bad prior, oversized context, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("ingest error: {0}")]
    Ingest(String),
}

pub type Result<T> = std::result::Result<T, NelError>;

impl NelError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NelError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        NelError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
