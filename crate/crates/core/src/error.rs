use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: duplicate screen name `{name}`")]
    DuplicateName {
        path: PathBuf,
        line: usize,
        name: String,
    },

    #[error("entity `{entity}` references unknown tweet `{tweet}`")]
    DanglingTweet { entity: String, tweet: String },

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("missing feature record `{0}`")]
    MissingKey(String),

    #[error("dimension mismatch for `{key}`: expected {expected}, got {got}")]
    DimMismatch {
        key: String,
        expected: usize,
        got: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
