//! Batch front-end: parse experiment configs, dispatch the scenario
//! runners, and emit analysis-ready tabular data. Everything the binary can
//! do lives here so it stays testable in-process.

pub mod config;
pub mod figures;
pub mod output;
pub mod runner;

use std::fmt;

/// Failures classified by exit status: 2 for config/validation problems,
/// 3 for numerical failures, 4 for I/O.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(cavity1d::Error),
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => {
                if e.is_numerical() {
                    3
                } else {
                    2
                }
            }
            CliError::Io { .. } => 4,
        }
    }

    /// One-line machine-readable error record.
    pub fn record(&self) -> String {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "validation",
            CliError::Io { .. } => "io",
        };
        format!(
            "error kind={kind} exit={} message={:?}",
            self.exit_code(),
            self.to_string()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cavity1d::Error> for CliError {
    fn from(e: cavity1d::Error) -> Self {
        CliError::Core(e)
    }
}
