use thiserror::Error;

pub type Result<T> = std::result::Result<T, RatchetError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RatchetError {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("position {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("density is not normalized: total mass {0}")]
    Unnormalized(f64),

    #[error("negative density {value:e} in cell {cell}")]
    Negativity { cell: usize, value: f64 },

    #[error("grid of {cells} cells cannot be split into {wells} equal wells")]
    MisalignedGrid { cells: usize, wells: usize },

    #[error("grid of {0} cells is too small (need at least {1})")]
    GridTooSmall(usize, usize),

    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("matrix is not ergodic: {0}")]
    NotErgodic(String),

    #[error("linear system is singular")]
    Singular,

    #[error("no periodic orbit after {cycles} cycles (last L1 residual {last_residual:e})")]
    NotConverged {
        cycles: usize,
        last_residual: f64,
        trace: Vec<f64>,
    },
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> RatchetError {
    RatchetError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
