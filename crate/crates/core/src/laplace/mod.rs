//! Laplace-domain verification lab: Talbot inversion, the hyperbolic kernel
//! catalog with L1-norm quadrature, and the interface-error iteration matrix.

pub mod kernels;
pub mod rho;
pub mod talbot;

pub use kernels::{kernel_catalog, kernel_l1_norm, Kernel, KernelKind, StableDensity};
pub use rho::{eval_rho_blocks, eval_rho_closed, propagate_error_frequency, RhoParams};
pub use talbot::{talbot_invert, talbot_invert_nodes, LaplaceSymbol};
