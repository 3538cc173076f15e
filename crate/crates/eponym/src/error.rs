//! Pipeline errors with the exit-code classification used by the binary:
//! 1 usage, 2 data, 3 internal. Every error names the stage and the input it
//! came from.

use std::path::{Path, PathBuf};

use eponym_core::eval::EvalError;
use eponym_core::features::FeatureError;
use eponym_core::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{stage}: invalid usage: {message}")]
    Usage { stage: &'static str, message: String },

    #[error("{stage}: cannot access '{path}': {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: '{path}' line {line}: {message}")]
    Parse {
        stage: &'static str,
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{stage}: '{path}': {message}")]
    Format {
        stage: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("{stage}: {source}")]
    Model {
        stage: &'static str,
        #[source]
        source: ModelError,
    },

    #[error("{stage}: {source}")]
    Eval {
        stage: &'static str,
        #[source]
        source: EvalError,
    },

    #[error("{stage}: {source}")]
    Feature {
        stage: &'static str,
        #[source]
        source: FeatureError,
    },

    #[error("{stage}: internal error: {message}")]
    Internal { stage: &'static str, message: String },
}

impl Error {
    pub fn io(stage: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            stage,
            path: path.into(),
            source,
        }
    }

    pub fn format(stage: &'static str, path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            stage,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn usage(stage: &'static str, message: impl Into<String>) -> Self {
        Error::Usage {
            stage,
            message: message.into(),
        }
    }

    /// Exit code contract: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage { .. } => 1,
            Error::Internal { .. } => 3,
            _ => 2,
        }
    }
}

/// Attaches stage/path context to module-level errors.
pub trait StageContext<T> {
    fn stage_io(self, stage: &'static str, path: &Path) -> Result<T, Error>;
}

impl<T> StageContext<T> for Result<T, std::io::Error> {
    fn stage_io(self, stage: &'static str, path: &Path) -> Result<T, Error> {
        self.map_err(|source| Error::io(stage, path, source))
    }
}
