use std::fmt;
use std::path::Path;

use serde_json::json;

pub const EXIT_IO: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// File could not be read or written.
    Io(String),
    /// Input file could not be decoded as an image.
    Decode(String),
    /// Flags, config file or parameters are invalid for the given input.
    Config(String),
}

impl CliError {
    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Decode(_) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Decode(_) => "decode",
            CliError::Config(_) => "config",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exitCode": self.exit_code(),
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Decode(m) | CliError::Config(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<camo_core::Error> for CliError {
    fn from(e: camo_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Decode(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
