use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol {symbol:?} at offset {offset}")]
    InvalidSymbol { offset: usize, symbol: char },

    #[error("invalid k = {0}: k must be odd and within 3..=31")]
    InvalidK(usize),

    #[error("sequence of length {len} is shorter than k = {k}")]
    TooShort { len: usize, k: usize },

    #[error("edge list is not sorted at index {0}")]
    Unsorted(usize),

    #[error("edge list has not been deduplicated")]
    NotUnique,

    #[error("edge endpoint {0} is missing from the vertex list")]
    DanglingEndpoint(String),

    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),

    #[error("walk is not incident at step {0}")]
    NonIncidentWalk(usize),

    #[error("walk is not strand-consistent")]
    InvalidWalk,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
