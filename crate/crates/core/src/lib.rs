//! Robust, regularized estimation of scatter (covariance) matrices from
//! complex-valued multivariate data.
//!
//! The crate provides:
//!
//! * [`hpd`] — complex Hermitian positive-definite matrix algebra
//!   (Cholesky, inverses, fractional powers, geodesics),
//! * [`rho`] — the Gaussian / Tyler / Huber loss families used by the
//!   M-estimators, together with chi-square machinery for Huber tuning,
//! * [`estimators`] — the sample covariance matrix, the diagonally loaded
//!   (GLC) estimator, the regularized M-estimator fixed-point solver, Tyler's
//!   M-estimator, its regularized variant, and the trace-normalized
//!   diagonally loaded (CWH) iteration,
//! * [`tuning`] — closed-form oracle shrinkage selection and its plug-in
//!   estimate,
//! * [`sampling`] — reproducible, stream-seeded generation of complex
//!   elliptical data, Toeplitz and random covariance structures,
//! * [`metrics`] — the scale-invariant shape distance and subspace
//!   concentration checks,
//! * [`detection`] — the normalized matched filter statistic and CFAR
//!   thresholds,
//! * [`experiments`] — the Monte-Carlo harnesses (false-alarm, detection
//!   probability, and shape-distance sweeps) built on the above.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the companion
//! `scattershrink` crate adds the CLI, file formats, and threaded
//! experiment drivers.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN-rejecting range guards read as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

extern crate alloc;

pub mod detection;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod hpd;
pub mod metrics;
pub mod rho;
pub mod sampling;
pub mod tuning;

pub use error::Error;
pub use hpd::{CMatrix, ComplexVector, HpdMatrix};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
