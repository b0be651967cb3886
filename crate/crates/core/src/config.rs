//! Controller config files.
//!
//! A config file is flat TOML whose keys are the [`ControllerConfig`] field
//! names. Omitted keys keep their defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::controller::{ControllerConfig, ControllerError};

/// Fallback config path when none is passed on the command line.
pub const CONFIG_ENV_VAR: &str = "ROTOBLUR_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ControllerError,
    },
}

pub fn parse_config(text: &str) -> Result<ControllerConfig, String> {
    let config: ControllerConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

pub fn to_toml(config: &ControllerConfig) -> String {
    toml::to_string(config).expect("flat config serializes")
}

pub fn load_config(path: &Path) -> Result<ControllerConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config: ControllerConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    config.validate().map_err(|source| ConfigError::Invalid {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(config)
}

/// Explicit path first, then `ROTOBLUR_CONFIG`, then `None` for defaults.
pub fn resolve_config_path(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(CONFIG_ENV_VAR)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
}
