//! Waveform-relaxation domain decomposition for time-fractional diffusion
//! and diffusion-wave equations, the matching superlinear convergence-bound
//! calculators, and a Laplace-domain verification lab.

// validations use `!(x > 0.0)` deliberately so NaN parameters are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dnwr;
pub mod error;
pub mod laplace;
pub mod linalg;
pub mod nnwr;
pub mod problem;
pub mod solver1d;
pub mod solver2d;
pub mod special;
pub mod timegrid;

pub use error::{FracError, Result};
pub use problem::{
    interface_error, DecompositionSpec, IterationHistory, PiecewiseConstant, ProblemSpec,
    Quantity, SpaceFn, SpaceTimeFn, Termination, Waveform, WaveformTag,
};
pub use timegrid::{CaputoScheme, CaputoWeights, MeshKind, TimeMesh};
