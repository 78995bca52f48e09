use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bbdet_core::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown preset '{name}'; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// Configuration problems exit with 2, failed estimates with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Parse { .. } | CliError::UnknownPreset { .. } => 2,
            CliError::Core(bbdet_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
