use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// Shapes given as `(width, height, bit_depth)`.
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize, u8),
        right: (usize, usize, u8),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} index {index} out of bounds (limit {limit})")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("mean shift window is empty")]
    EmptyWindow,

    #[error("criterion mismatch: driver expects {expected}, config selects {actual}")]
    CriterionMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("malformed image file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
