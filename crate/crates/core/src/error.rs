use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate pmid {0}")]
    DuplicatePmid(String),

    #[error("topic {topic}: missing section {section}")]
    MissingSection { topic: String, section: &'static str },

    #[error("topic {0}: query has no terms after preprocessing")]
    EmptyQuery(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing embedding for key {0}")]
    MissingEmbedding(String),

    #[error("record {key}: expected {expected} values, found {found}")]
    DimensionMismatch {
        key: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate key {0}")]
    DuplicateKey(String),

    #[error("index file: {0}")]
    IndexFormat(String),

    #[error("unknown metric {name:?} (valid: {})", valid.join(", "))]
    UnknownMetric {
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("topic sets differ; missing topics: {}", missing.join(", "))]
    TopicMismatch { missing: Vec<String> },

    #[error("topic {topic}: no sentence data for pmid {pmid}")]
    MissingSentenceData { topic: String, pmid: String },

    #[error("{0}")]
    InsufficientData(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("{} topic(s) failed: {}", .0.len(), .0.join("; "))]
    TopicFailures(Vec<String>),

    #[error("usage: {0}")]
    Usage(String),

    #[error("selftest failed: {0}")]
    SelfTest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl std::fmt::Display, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numeric/convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Convergence(_) | Error::SelfTest(_) => 3,
            _ => 2,
        }
    }
}
