//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular matrix: pivot magnitude {pivot:.3e} below {threshold:.3e} in column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("CFL violation: ratio {ratio:.4} exceeds limit {limit}")]
    CflViolation { ratio: f64, limit: f64 },

    #[error("explicit step unstable: dt = {dt:.3e} exceeds stability bound {bound:.3e}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("domain too small: width {width:.4} but at least {required:.4} required for kernel decay")]
    DomainTooSmall { width: f64, required: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("horizon under-resolved: delta = {delta:.4e} but at least 2*dx = {min:.4e} required")]
    HorizonUnderResolved { delta: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
