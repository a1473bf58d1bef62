//! CLI error type with a stable exit-code contract.

use emfield_core::CoreError;
use thiserror::Error;

use crate::format::FormatError;

/// Top-level CLI error. Every failure maps to one of four exit codes:
///
/// | code | class                                                  |
/// |------|--------------------------------------------------------|
/// | 1    | validation: bad flags, malformed manifests, shape/domain errors |
/// | 2    | I/O: missing, unreadable, corrupt, or truncated files  |
/// | 3    | numerical breakdown inside a solver or optimizer       |
/// | 4    | self-test failure                                      |
#[derive(Debug, Error)]
pub enum CliError {
    /// An input violated a documented precondition.
    #[error("{0}")]
    Validation(String),

    /// A file could not be read, written, or decoded.
    #[error("{0}")]
    Io(String),

    /// A numerical routine broke down.
    #[error("{0}")]
    Numerical(String),

    /// One or more self-test checks failed.
    #[error("{0}")]
    SelfTest(String),
}

impl CliError {
    /// Exit code of the process when this error reaches `main`.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::SelfTest(_) => 4,
        }
    }

    /// Annotates a raw `std::io::Error` with the path it concerned.
    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.as_ref().display()))
    }

    /// A validation failure with a formatted message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::NumericalBreakdown(msg) => {
                CliError::Numerical(format!("numerical breakdown: {msg}"))
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(err: FormatError) -> Self {
        CliError::Io(err.to_string())
    }
}

/// Convenience alias for CLI-level results.
pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_the_contract() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 1);
        assert_eq!(CliError::Io(String::new()).exit_code(), 2);
        assert_eq!(CliError::Numerical(String::new()).exit_code(), 3);
        assert_eq!(CliError::SelfTest(String::new()).exit_code(), 4);
    }

    #[test]
    fn core_errors_map_by_class() {
        let num = CoreError::NumericalBreakdown("diverged".into());
        assert_eq!(CliError::from(num).exit_code(), 3);
        let val = CoreError::Validation {
            field: "height",
            reason: "zero".into(),
        };
        assert_eq!(CliError::from(val).exit_code(), 1);
    }
}
