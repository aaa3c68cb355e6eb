//! Experiment runner for collateralized CDS pricing under default contagion.

pub mod config;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] contagion_core::Error),
    #[error("cannot write `{path}`: {source}")]
    Output { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Output { .. } => EXIT_CONFIG,
            _ => EXIT_CHECK_FAILED,
        }
    }
}
