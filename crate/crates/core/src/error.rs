use thiserror::Error;

/// Errors raised by LGF evaluation and the applications built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LgfError {
    #[error("anisotropy alpha1 must lie in (0, 1], got {0}")]
    InvalidAnisotropy(f64),

    #[error("screening coefficient c2 must be positive and finite, got {0}")]
    NotScreened(f64),

    #[error("tolerance {0:e} is below the attainable floor of 1e-15")]
    ToleranceTooSmall(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("slack eta = {eta} must lie in (0, c2/alpha1 = {limit})")]
    EtaOutOfRange { eta: f64, limit: f64 },

    #[error("quadrature point count {n_pts} must exceed the index n = {n}")]
    TooFewPoints { n_pts: usize, n: usize },

    #[error("tolerance is met without quadrature (log argument {0} <= 1)")]
    DegenerateQuadrature(f64),

    #[error("row needs {needed} transform samples, above the cap of {cap}; split the row")]
    RowTooLong { needed: usize, cap: usize },

    #[error("truncated solve radius {radius} exceeds the cap of {cap}")]
    SolveTooLarge { radius: usize, cap: usize },

    #[error("table of {rows}x{cols} is too small for a stencil residual (need 3x3)")]
    TableTooSmall { rows: usize, cols: usize },

    #[error("source is not negligible at the truncation boundary ({ratio:e} of its max)")]
    SourceNotDecayed { ratio: f64 },

    #[error("walk probabilities invalid: {0}")]
    InvalidWalk(String),
}

pub type Result<T> = std::result::Result<T, LgfError>;
