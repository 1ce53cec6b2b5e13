use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaeError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl QaeError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        QaeError::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        QaeError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for QaeError {
    fn from(e: std::io::Error) -> Self {
        QaeError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QaeError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QaeError::DimensionMismatch { expected, found });
    }
    Ok(())
}
