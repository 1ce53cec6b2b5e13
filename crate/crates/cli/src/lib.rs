//! Orchestration for the `qae` command: configuration, suites, reports.

pub mod config;
pub mod matrix_io;
pub mod report;
pub mod suites;

use qae_core::QaeError;
use thiserror::Error;

pub use config::{RunConfig, Suite};
pub use report::RunReport;
pub use suites::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("cap violation: {0}")]
    Cap(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(QaeError),
}

impl CliError {
    /// Process exit status: 2 config, 3 cap, 4 I/O, 5 any other failure.
    /// Status 1 is reserved for failed assertions in a completed run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Cap(_) => 3,
            CliError::Io(_) => 4,
            CliError::Core(_) => 5,
        }
    }
}

impl From<QaeError> for CliError {
    fn from(e: QaeError) -> Self {
        match e {
            QaeError::Resource(m) => CliError::Cap(m),
            QaeError::Io(m) => CliError::Io(m),
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
