//! `tavis` command-line front end: configuration, execution and output.

pub mod app;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use app::{run, Cli};
pub use config::{parse_config, RunConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SOLVE: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("solve: {0}")]
    Solve(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solve(_) => EXIT_SOLVE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}
