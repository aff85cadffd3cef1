use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// `Io` is kept separate from the validation-style variants so callers
/// (notably the CLI) can distinguish "your inputs are wrong" from "the
/// filesystem failed".
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration document failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A data file parsed but its content is invalid. `line` counts from 1
    /// including the header; `column` is the 1-based field index.
    #[error("{path}: line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Data {
        path: PathBuf,
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn data(
        path: &std::path::Path,
        line: usize,
        column: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Error::Data {
            path: path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors a user can fix by editing their inputs.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

/// Reads a file to a string, folding the path into the error message so
/// IO failures name what could not be read.
pub(crate) fn read_with_context(path: &std::path::Path) -> crate::Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
