use thiserror::Error;

/// Errors raised by the array model, the solvers and the beamforming stage.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("source is not representable in the DPSS subspace (relative residual {residual:.3e} exceeds {tolerance:.3e})")]
    ModelMismatch { residual: f64, tolerance: f64 },

    #[error("only {found} well-separated grid points reach the threshold gamma0 = {gamma0:.4}, need at least {needed}; lower gamma0")]
    ThresholdTooHigh {
        found: usize,
        needed: usize,
        gamma0: f64,
    },

    #[error("estimated frequencies are not distinct (Vandermonde matrix is rank deficient); coincident carriers need the 2D method")]
    DuplicateFrequencies,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("the 2D method needs equispaced element positions")]
    NonEquispaced,

    #[error("weight vector is zero")]
    ZeroWeights,
}

pub type Result<T> = std::result::Result<T, Error>;
