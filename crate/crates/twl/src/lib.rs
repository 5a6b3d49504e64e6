//! Experiment harness for `twl-core`: configuration, spectrum cache, result
//! tables and the subcommands of the `twl` binary.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{run, Experiment};
pub use output::{Report, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("configuration error at {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] twl_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => EXIT_USAGE,
            HarnessError::Numerical(_) | HarnessError::Io(_) => EXIT_NUMERICAL,
        }
    }
}
