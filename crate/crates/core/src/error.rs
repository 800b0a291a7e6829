use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid mismatch: expected {expected} points, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("query point {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("operation requires a non-empty list")]
    EmptyList,

    #[error("degenerate polynomial fit: index values do not span degree {0}")]
    DegenerateFit(usize),

    #[error("singular design matrix (numerical rank {rank} < {columns})")]
    SingularDesign { rank: usize, columns: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
