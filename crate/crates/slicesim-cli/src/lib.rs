//! Library side of the `slicesim` binary: config schema, report encoding,
//! subcommand implementations, and the reference reproductions.

pub mod commands;
pub mod config;
pub mod report;
pub mod reproduce;

use std::fmt;

/// Environment variable holding the default output directory; the `--out`
/// flag overrides it.
pub const OUT_DIR_ENV: &str = "SLICESIM_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad config file or arguments (exit code 2).
    Config(String),
    /// Failure while running or writing results (exit code 3).
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<slicesim::ConfigError> for CliError {
    fn from(e: slicesim::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<slicesim::SimError> for CliError {
    fn from(e: slicesim::SimError) -> Self {
        match e {
            slicesim::SimError::Config(c) => CliError::Config(c.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
