//! Experiment configuration, presets and the sweep runner behind the
//! `fracwr` binary.

// validations use `!(x > 0.0)` deliberately so NaN parameters are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod config;
pub mod presets;
pub mod runner;
pub mod verify;
