//! Normalized matched filter (NMF) detection.
//!
//! The statistic
//!
//! ```text
//! Λ(z; p, Σ) = |p† Σ⁻¹ z|² / ((z† Σ⁻¹ z)(p† Σ⁻¹ p)) ∈ [0, 1]
//! ```
//!
//! is invariant to the scale of both `z` and `Σ`. Under the null it is
//! `Beta(1, p−1)`-distributed for every CES clutter family, so a constant
//! false-alarm threshold is `λ = 1 − P_FA^{1/(p−1)}`.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hpd::{ComplexVector, HpdMatrix};
use crate::C64;

/// NMF statistic; `z` and `steer` must be nonzero.
///
/// Evaluated through the cached Cholesky factor: with `y = L⁻¹z` and
/// `w = L⁻¹p`, `Λ = |w†y|²/(‖y‖²‖w‖²)`, clamped to `[0, 1]` against
/// rounding overshoot of the Cauchy-Schwarz bound.
pub fn nmf_statistic(z: &ComplexVector, steer: &ComplexVector, sigma: &HpdMatrix) -> Result<f64> {
    if z.is_zero() || steer.is_zero() {
        return Err(Error::ZeroVector);
    }
    if z.dim() != sigma.dim() || steer.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: z.dim() });
    }
    let y = sigma.solve_lower(z);
    let w = sigma.solve_lower(steer);
    let num = w.inner(&y).norm_sqr();
    let den = y.norm_sqr() * w.norm_sqr();
    Ok((num / den).clamp(0.0, 1.0))
}

/// CFAR threshold `λ = 1 − pfa^{1/(p−1)}` for dimension `p ≥ 2`.
pub fn threshold_for_pfa(pfa: f64, p: usize) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::Domain("false-alarm probability must lie in (0, 1)"));
    }
    if p < 2 {
        return Err(Error::Domain("threshold needs dimension at least 2"));
    }
    Ok(1.0 - pfa.powf(1.0 / (p as f64 - 1.0)))
}

/// Null CDF of the statistic: `Beta(1, p−1)`, i.e. `F(x) = 1 − (1−x)^{p−1}`.
pub fn null_cdf(x: f64, p: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - x).powi(p as i32 - 1)
    }
}

/// Steering vector with unit-modulus entries, `‖p‖² = p`.
pub fn uniform_steering(p: usize) -> ComplexVector {
    ComplexVector::new(alloc::vec![C64::new(1.0, 0.0); p])
}

/// A detector: steering vector, target false-alarm rate, and the matching
/// threshold.
#[derive(Debug, Clone)]
pub struct DetectorSetup {
    steering: ComplexVector,
    pfa_target: f64,
    threshold: f64,
}

impl DetectorSetup {
    /// The steering vector must satisfy `‖p‖² = dim` (the pulse-norm
    /// convention the threshold formula assumes).
    pub fn new(steering: ComplexVector, pfa_target: f64) -> Result<Self> {
        let p = steering.dim();
        let norm_sqr = steering.norm_sqr();
        if (norm_sqr - p as f64).abs() > 1e-8 * p as f64 {
            return Err(Error::Domain("steering vector must have squared norm equal to dim"));
        }
        let threshold = threshold_for_pfa(pfa_target, p)?;
        Ok(Self { steering, pfa_target, threshold })
    }

    pub fn steering(&self) -> &ComplexVector {
        &self.steering
    }

    pub fn pfa_target(&self) -> f64 {
        self.pfa_target
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn dim(&self) -> usize {
        self.steering.dim()
    }

    /// Decide on a statistic value.
    pub fn decide(&self, statistic: f64) -> bool {
        statistic > self.threshold
    }
}
