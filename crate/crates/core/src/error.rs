//! Error taxonomy shared by the whole workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition or parameter relation.
    /// The message quotes the violated relation, e.g. "q ∈ (1,∞)".
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configured resource cap (grid dof, dense-eigendecomposition size) was exceeded.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// An iterative or quadrature scheme failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A spectral multiplier or fractional power is undefined on part of the spectrum.
    #[error("domain error: {0}")]
    Domain(String),

    /// A test function is degenerate for the requested experiment (e.g. zero gradient norm).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Run-configuration parse or validation failure, with a line number when known.
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
