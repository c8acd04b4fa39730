use thiserror::Error;

/// Failures that stop a command before a report is produced.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("set `{set}`: {source}")]
    Precondition { set: String, source: dindep::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn precondition(set: impl Into<String>, source: dindep::Error) -> Self {
        CliError::Precondition { set: set.into(), source }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => exit::PARSE,
            CliError::Precondition { .. } | CliError::Usage(_) => exit::PRECONDITION,
            CliError::Io(_) => exit::IO,
        }
    }
}

pub mod exit {
    pub const PASS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const IO: i32 = 4;
}
