use std::path::Path;

use thiserror::Error;

/// Command failure, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, missing or malformed input.
    #[error("{0}")]
    Input(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Training(_) => 3,
            CliError::Evaluation(_) => 4,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn file(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    pub fn training(err: impl std::fmt::Display) -> Self {
        CliError::Training(err.to_string())
    }

    pub fn evaluation(err: impl std::fmt::Display) -> Self {
        CliError::Evaluation(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
