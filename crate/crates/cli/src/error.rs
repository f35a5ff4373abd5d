use thiserror::Error;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable inputs, ill-formed files, failed numerics (exit 2).
    #[error("{0:#}")]
    Data(#[from] anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<p300_core::Error> for CliError {
    fn from(e: p300_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
