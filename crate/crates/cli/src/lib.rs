//! Command-line front end: `cast`, `project` and the batch `pipeline`.
//!
//! Exit codes: 0 success, 2 input/usage error, 3 processing error,
//! 4 batch finished with at least one failed tile.

pub mod commands;
pub mod manifest;
pub mod tile;

use std::fmt;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PROCESSING: u8 = 3;
pub const EXIT_PARTIAL: u8 = 4;

/// A failure that ends a command with a specific exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<geoshadow::Error> for CliError {
    fn from(e: geoshadow::Error) -> Self {
        CliError {
            code: if e.is_input_error() { EXIT_INPUT } else { EXIT_PROCESSING },
            msg: e.to_string(),
        }
    }
}
