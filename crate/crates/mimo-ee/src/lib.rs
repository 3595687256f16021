//! IO and experiment companion to `mimo-ee-core`: Monte-Carlo oracles that
//! check the closed forms against actual clipped waveforms, sweep/CSV
//! plumbing for the figure-style experiments, config-file loading, and the
//! validation report the CLI renders.
//!
//! The core crate owns every formula; this crate owns randomness, files,
//! and process exit codes.

// domain guards use `!(x > 0.0)` to reject NaN along with the wrong sign
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod mc;
pub mod sweep;
pub mod validate;

pub use error::AppError;
