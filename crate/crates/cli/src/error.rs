use thiserror::Error;

/// A failed command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    /// Wraps a library error with the path or step it came from.
    pub fn data(context: impl std::fmt::Display, e: popcent::Error) -> Self {
        CliError::Data(format!("{context}: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
