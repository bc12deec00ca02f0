use std::path::Path;
use std::process::ExitCode;

use sfp_core::SfpError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Schema(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Numerical(_) => ExitCode::from(3),
            _ => ExitCode::from(2),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Schema(m) => write!(f, "schema mismatch: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<SfpError> for CliError {
    fn from(e: SfpError) -> Self {
        if e.is_config() {
            // the core error already carries a "config error:" prefix
            CliError::Config(
                e.to_string()
                    .trim_start_matches("config error: ")
                    .to_string(),
            )
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
