use thiserror::Error;

/// Process exit statuses. These values are part of the command-line
/// contract and do not change between versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    /// Success; for `predict`, a stable verdict.
    Ok = 0,
    /// Bad flags or an invalid configuration.
    Usage = 2,
    /// `predict` finished with a drifted verdict.
    Drifted = 3,
    /// `predict` could not estimate one of the windows.
    Withheld = 4,
    /// Input data could not be ingested.
    Ingest = 5,
    /// A model or numerical failure during simulation or estimation.
    Model = 6,
    /// Reading or writing a file failed.
    Io = 7,
}

pub const EXIT_CODE_HELP: &str = "\
Exit status:
  0  success (predict: stable)
  2  usage or configuration error
  3  predict: drifted
  4  predict: withheld (a window could not be estimated)
  5  input ingestion error
  6  model or numerical error
  7  file i/o error";

#[derive(Error, Debug)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Ingest {
        path: String,
        source: rfluct_core::Error,
    },

    #[error(transparent)]
    Model(#[from] rfluct_core::Error),

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Usage,
            CliError::Ingest { .. } => ExitCode::Ingest,
            CliError::Model(rfluct_core::Error::Parameter { .. }) => ExitCode::Usage,
            CliError::Model(_) => ExitCode::Model,
            CliError::Io { .. } => ExitCode::Io,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
