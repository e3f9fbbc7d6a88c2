//! Experiments over HHL stage states: solution reports, sweeps over the
//! right-hand side, the condition number and rotation disorder, and the
//! per-qubit GGM of the eigenvalue register.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{execute, Command, Output};
pub use config::RunConfig;
pub use table::{format_number, Header, Table};

use hhl_lab_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input; exit code 2.
    #[error("{name}: {message}")]
    Validation { name: &'static str, message: String },
    /// The computation or I/O failed; exit code 3.
    #[error("{name}: {message}")]
    Runtime { name: &'static str, message: String },
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError::Validation { name: "ConfigError", message: message.into() }
    }

    pub fn io(err: std::io::Error) -> Self {
        CliError::Runtime { name: "IoError", message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Runtime { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Validation { name, .. } | CliError::Runtime { name, .. } => name,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let name = e.name();
        let message = e.to_string();
        match e {
            CoreError::ZeroPostselection
            | CoreError::DegenerateReference
            | CoreError::TooManySkipped { .. }
            | CoreError::Numerical(_) => CliError::Runtime { name, message },
            _ => CliError::Validation { name, message },
        }
    }
}
