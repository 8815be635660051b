use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit status for a validation failure (bad config or arguments).
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit status for a failure while running (I/O, data files).
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } | CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { context: path.display().to_string(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<fedfdp::Error> for CliError {
    fn from(e: fedfdp::Error) -> Self {
        use fedfdp::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Shape { .. } | E::PartitionInfeasible(_) => {
                CliError::Validation(e.to_string())
            }
            E::CurveFormat { .. } | E::Checkpoint(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<fedfdp::data::IdxError> for CliError {
    fn from(e: fedfdp::data::IdxError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}
