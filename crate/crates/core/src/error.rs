use std::io;

use thiserror::Error;

/// Errors produced by the light-field library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a parametrization.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index:?} out of bounds for dims {dims:?}")]
    Index { index: [usize; 4], dims: [usize; 4] },

    /// A caller-side contract was violated (bad dimensions, observer inside the proxy, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid format: {0}")]
    Format(String),

    #[error("scene parse error at line {line}, column {column}: {message}")]
    SceneParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("image size mismatch: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
