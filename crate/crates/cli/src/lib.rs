//! Command-line front end: equation files in, symmetry reports out.

pub mod commands;
pub mod input;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ill-formed equation: {0}")]
    IllFormed(String),
    #[error("internal contradiction: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::IllFormed(_) => exit::ILL_FORMED,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    /// A residual did not vanish, or a numerical check failed.
    pub const FAILED: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const ILL_FORMED: i32 = 3;
    /// A solved generator failed verification.
    pub const INTERNAL: i32 = 4;
}
