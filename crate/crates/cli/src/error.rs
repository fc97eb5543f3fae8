use std::fmt;

/// Errors surfaced by the command-line layer, carrying the process exit
/// code contract: 0 success, 1 estimator/numeric failure, 2 input error.
#[derive(Debug)]
pub enum CliError {
    /// Bad command line.
    Usage(String),
    /// A data file failed to parse; the row is 1-based.
    Parse { path: String, row: usize, message: String },
    /// Invalid configuration; every offending field is listed.
    Config(Vec<String>),
    /// Estimator or numerical failure.
    Numeric(scattershrink_core::Error),
    /// Filesystem failure.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Parse { path, row, message } => {
                write!(f, "parse error in {path}, row {row}: {message}")
            }
            CliError::Config(problems) => {
                writeln!(f, "invalid configuration:")?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
            CliError::Numeric(e) => write!(f, "estimation failed: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<scattershrink_core::Error> for CliError {
    fn from(e: scattershrink_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
