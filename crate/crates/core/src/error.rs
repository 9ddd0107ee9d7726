use thiserror::Error;

/// Failures reported by the library. The CLI maps each kind to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical consistency error: {0}")]
    Numerical(String),
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
}

impl Error {
    /// True for errors caused by an explicit size or enumeration cap.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
