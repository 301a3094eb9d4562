//! Command-line front end and WebSocket service for `hidwire`.

use std::path::Path;

pub mod commands;
pub mod config;
pub mod serve;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input data: unreadable or malformed descriptor, log or hex.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("PortInUse: port {0} is already bound")]
    PortInUse(u16),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
