use gdbound_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Dataset(String),
    /// The run finished but found violations.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Dataset(_) => 3,
            CliError::Failed(_) | CliError::Core(_) | CliError::Io(_) => 1,
        }
    }

    /// Core errors raised while checking user parameters are usage errors.
    pub fn usage(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) | Error::Mode(_) | Error::DegenerateLabel(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Core(other),
        }
    }

    /// Parse and format failures while loading a dataset.
    pub fn dataset(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Format(_) | Error::Io(_) => CliError::Dataset(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
