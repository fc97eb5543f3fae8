//! Command-line surface and file formats for the scatter-shrinkage toolkit.
//!
//! The numerical work lives in `scattershrink-core`; this crate adds the
//! pieces that need an operating system: a deterministic threaded trial
//! driver, INI-style experiment configs, CSV outputs with atomic writes, a
//! whitespace-free sample file format, and the `scattershrink` binary.

// NaN-rejecting range guards read as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod csvout;
pub mod dataio;
pub mod error;
pub mod parallel;
pub mod runner;

pub use error::CliError;
