use thiserror::Error;

/// Errors raised anywhere in the recovery toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("column {0} is identically zero")]
    DegenerateColumn(usize),

    #[error("subset {subset} selects a submatrix whose column {column} is identically zero")]
    DegenerateSubset { subset: usize, column: usize },

    #[error("ADMM iterate became non-finite at iteration {0}")]
    Divergence(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration of {required} column subsets exceeds the cap of {cap}; use a smaller n or s")]
    Resource { required: u128, cap: u128 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
