//! Command-line front end for the market-maker laboratory: feed
//! validation, synthetic feed generation, and scenario runs with CSV
//! outputs and a reproducibility manifest.

pub mod commands;
pub mod config;
pub mod feed_io;
pub mod manifest;
pub mod outputs;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad inputs: malformed feeds, invalid configuration, failed
    /// validation. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Failures during a run: IO, simulation errors. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ammlab_core::Error> for CliError {
    fn from(e: ammlab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
