//! TOML configuration. Unknown keys are rejected.
//!
//! ```toml
//! [jump]
//! t_high_g = 1.8
//! t_low_g = 1.2
//! debounce_ms = 250
//!
//! [serve]
//! port = 9001
//! realtime = false
//! wait_clients = 1
//! permission_store = "grants.json"
//! ```

use std::path::{Path, PathBuf};

use hidwire::jump::JumpConfig;
use serde::Deserialize;

pub const DEFAULT_PORT: u16 = 9001;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub jump: JumpConfig,
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServeConfig {
    pub port: u16,
    pub realtime: bool,
    /// Clients to wait for before a replay starts.
    pub wait_clients: usize,
    pub permission_store: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            port: DEFAULT_PORT,
            realtime: false,
            wait_clients: 1,
            permission_store: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("ConfigError: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("ConfigError: {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("ConfigError: {path}: {source}")]
    Invalid {
        path: PathBuf,
        source: hidwire::jump::JumpError,
    },
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let config = Self::parse(&text).map_err(|source| ConfigError::Toml {
            path: path.into(),
            source,
        })?;
        config.jump.validate().map_err(|source| ConfigError::Invalid {
            path: path.into(),
            source,
        })?;
        Ok(config)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }
}
