use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants are grouped by how a caller is expected to react: bad input
/// data, a failing generator, or plain I/O trouble. [`Error::kind`] exposes
/// that grouping so front ends can map it to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty query")]
    EmptyQuery,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("instance sets differ: {0:?}")]
    IdMismatch(Vec<String>),

    #[error("embedder failed on {facet:?}: {message}")]
    Embedder { facet: String, message: String },

    #[error("generator: {message}")]
    Generator { message: String, retriable: bool },
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Generator,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Generator { .. } => ErrorKind::Generator,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn generator(message: impl Into<String>) -> Self {
        Error::Generator {
            message: message.into(),
            retriable: false,
        }
    }

    pub fn is_retriable(&self) -> bool {
        matches!(
            self,
            Error::Generator {
                retriable: true,
                ..
            }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
