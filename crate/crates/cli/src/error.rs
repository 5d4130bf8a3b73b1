//! Error categories with stable exit codes.

use thiserror::Error;

/// One variant per documented failure class; the exit code is part of the
/// interface, so scripts can distinguish a typo from a missing data file.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag value or invalid parameter combination (exit 2, matching
    /// clap's own code for unknown flags).
    #[error("usage: {0}")]
    Usage(String),
    /// A drag table or input sweep file could not be read (exit 3).
    #[error("data: {0}")]
    Data(String),
    /// The output directory cannot be created or written (exit 4).
    #[error("output-dir: {0}")]
    OutputDir(String),
    /// The --config file is unreadable or malformed (exit 5).
    #[error("config: {0}")]
    Config(String),
    /// An experiment failed while running (exit 1).
    #[error("runtime: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::OutputDir(_) => 4,
            CliError::Config(_) => 5,
        }
    }
}
