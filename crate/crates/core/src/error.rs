use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied parameters outside an operation's domain.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path} is not valid UTF-8 (invalid byte at offset {offset})")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    #[error("empty corpus: no files matching {extensions:?} under {root}")]
    EmptyCorpus {
        root: PathBuf,
        extensions: Vec<String>,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("invalid stop word {word:?}: {reason}")]
    InvalidStopword { word: String, reason: &'static str },

    #[error(
        "vocabulary is empty at min term frequency {min_term_freq}; try a lower --min-term-freq"
    )]
    EmptyVocabulary { min_term_freq: usize },

    #[error("no pairs involve document {0:?}")]
    NoPairs(String),

    #[error("n-gram size mismatch: {left} vs {right}")]
    NgramMismatch { left: usize, right: usize },

    #[error("report serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code for this error: 1 for usage errors, 2 for I/O and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_)
            | Error::NgramMismatch { .. }
            | Error::EmptyVocabulary { .. }
            | Error::NoPairs(_)
            | Error::InvalidStopword { .. } => 1,
            Error::Read { .. }
            | Error::Write { .. }
            | Error::InvalidUtf8 { .. }
            | Error::EmptyCorpus { .. }
            | Error::DuplicateId(_)
            | Error::Serialize(_) => 2,
        }
    }
}
