//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::block_model::BlockIndex;

/// Everything that can go wrong while loading data, building a scenario or
/// checking a result.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid money literal {0:?}")]
    MoneyParse(String),

    #[error("block {index} outside grid")]
    OutOfRange { index: BlockIndex },

    #[error("duplicate block {index}")]
    DuplicateBlock { index: BlockIndex },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("crown shape template: {0}")]
    CrownShape(String),

    #[error("arc endpoint {index} refers to no known vertex")]
    DanglingArc { index: BlockIndex },

    #[error("brute-force closure limited to 24 vertices, got {n}")]
    BruteForceTooLarge { n: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 2 for configuration and
    /// input-file problems, 3 for internal consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Inconsistency(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Error {
        Error::Csv {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
