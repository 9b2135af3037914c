use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] escape_dim_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Core(escape_dim_core::Error::Parse(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Output { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}
