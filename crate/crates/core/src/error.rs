use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A caller broke an operation's precondition (e.g. unsorted insert).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("corrupt or incompatible index: {0}")]
    Format(String),

    #[error("index is opened read-only")]
    ReadOnly,

    #[error("transaction id {0} collides with the existing index")]
    TidCollision(u64),

    #[error("brute-force oracle refused: {0}")]
    OracleGuard(String),

    #[error("inconsistent input: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
