use std::fmt;
use std::path::PathBuf;

use qanalog_core::ErrorKind;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Config(Vec<ConfigError>),
    Core(qanalog_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_PARSE,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Parse => EXIT_PARSE,
                ErrorKind::Numerical => EXIT_NUMERICAL,
                ErrorKind::Invariant => EXIT_INVARIANT,
            },
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(errors) => {
                write!(
                    f,
                    "invalid configuration ({} problem{})",
                    errors.len(),
                    if errors.len() == 1 { "" } else { "s" }
                )?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qanalog_core::Error> for CliError {
    fn from(e: qanalog_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Core error raised while reading an input file, with the file named.
pub(crate) fn in_file(path: &std::path::Path, e: qanalog_core::Error) -> CliError {
    match e {
        qanalog_core::Error::Parse { line, message } => CliError::Core(qanalog_core::Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        }),
        other => CliError::Core(other),
    }
}
