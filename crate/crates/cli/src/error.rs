//! Exit-code classification of command failures.

use std::fmt;

use qls_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Solver,
    PartialSweep,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: FailureKind::Config, message: message.into() }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError { kind: FailureKind::Solver, message: message.into() }
    }

    pub fn partial(message: impl Into<String>) -> Self {
        CliError { kind: FailureKind::PartialSweep, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 2,
            FailureKind::Solver => 3,
            FailureKind::PartialSweep => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::NoConvergence(_) | CoreError::SvdFailed(..) => CliError::solver(message),
            // everything else is a consequence of the requested parameters
            _ => CliError::config(message),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::solver(format!("{e:#}"))
    }
}
