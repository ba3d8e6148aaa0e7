//! Error type shared by every solver and calculator in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FracError {
    /// Parameter outside its admissible range (nonpositive horizon, zero
    /// step count, grading exponent below one, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Fractional order outside the regime a scheme or theorem is defined for.
    #[error("wrong regime: {0}")]
    WrongRegime(String),

    /// Waveforms, meshes or grids that must agree do not.
    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    /// A scheme was asked to run on a mesh it does not support.
    #[error("unsupported mesh: {0}")]
    UnsupportedMesh(String),

    /// Spatial grid too small for the requested stencil.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Contour inversion blew up (overflow / NaN on the contour).
    #[error("contour evaluation failed: {0}")]
    ContourFailure(String),

    /// Quadrature refinement did not settle to the requested accuracy.
    #[error("quadrature accuracy failure: {0}")]
    QuadratureFailure(String),

    /// Kernel constructed with the wrong number of length parameters.
    #[error("kernel parameter error: {0}")]
    KernelParameter(String),
}

pub type Result<T> = std::result::Result<T, FracError>;
