use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
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

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("similarity undefined for a zero vector")]
    ZeroVector,

    #[error("query term '{0}' has no embedding")]
    QueryNotEmbedded(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Self::Stage { .. } => e,
            e => Self::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 validation, 2 stage failure, 3 I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Io { .. } => 3,
            Self::Stage { source, .. } => match source.as_ref() {
                Self::Io { .. } => 3,
                Self::Config(_) => 1,
                _ => 2,
            },
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
