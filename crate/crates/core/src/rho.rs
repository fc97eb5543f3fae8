//! Loss/weight function families for M-estimation of scatter.
//!
//! A family supplies the loss `ρ(t)`, the weight `u(t) = ρ'(t)` and
//! `ψ(t) = t·u(t)`. Three families are built in:
//!
//! * Gaussian: `ρ(t) = t`, `u ≡ 1` (the sample covariance matrix loss),
//! * Tyler: `ρ(t) = p ln t`, `u(t) = p/t` (distribution-free, scale-free),
//! * Huber: `u(t) = 1/b` for `t ≤ c²` and `c²/(t b)` beyond, with `(c², b)`
//!   calibrated from a chi-square quantile so the estimator is consistent
//!   for the covariance matrix under Gaussian data.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// A weight-function family.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoFamily {
    Gaussian,
    Tyler { dim: usize },
    Huber { dim: usize, q: f64, c2: f64, b: f64 },
}

impl RhoFamily {
    pub fn gaussian() -> Self {
        RhoFamily::Gaussian
    }

    pub fn tyler(dim: usize) -> Self {
        assert!(dim >= 1);
        RhoFamily::Tyler { dim }
    }

    /// Huber family with tuning fraction `q ∈ (0, 1)`; the constants
    /// `(c², b)` are computed by [`huber_constants`].
    pub fn huber(dim: usize, q: f64) -> Result<Self> {
        let (c2, b) = huber_constants(dim, q)?;
        Ok(RhoFamily::Huber { dim, q, c2, b })
    }

    /// Loss `ρ(t)`.
    ///
    /// Huber's family is specified through its weight `u`; the loss here is
    /// the continuous antiderivative pinned at `ρ(c²) = c²/b`. The additive
    /// constant cancels everywhere the loss is used (cost monitoring).
    pub fn rho(&self, t: f64) -> Result<f64> {
        match *self {
            RhoFamily::Gaussian => Ok(t),
            RhoFamily::Tyler { dim } => {
                if t <= 0.0 {
                    return Err(Error::Domain("tyler loss requires t > 0"));
                }
                Ok(dim as f64 * t.ln())
            }
            RhoFamily::Huber { c2, b, .. } => {
                if t <= 0.0 {
                    return Err(Error::Domain("huber loss requires t > 0"));
                }
                if t <= c2 {
                    Ok(t / b)
                } else {
                    Ok(c2 / b * (1.0 + (t / c2).ln()))
                }
            }
        }
    }

    /// Weight `u(t) = ρ'(t)`.
    pub fn weight(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::Domain("weight requires t > 0"));
        }
        match *self {
            RhoFamily::Gaussian => Ok(1.0),
            RhoFamily::Tyler { dim } => Ok(dim as f64 / t),
            RhoFamily::Huber { c2, b, .. } => {
                if t <= c2 {
                    Ok(1.0 / b)
                } else {
                    Ok(c2 / (t * b))
                }
            }
        }
    }

    /// `ψ(t) = t · u(t)`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        Ok(t * self.weight(t)?)
    }

    /// Whether `ρ` is bounded below (Gaussian, Huber). Tyler's log loss is
    /// not, which is why its existence theory needs sample conditions.
    pub fn is_bounded_below(&self) -> bool {
        !matches!(self, RhoFamily::Tyler { .. })
    }

    /// Tyler-type weights blow up at `t = 0`, so zero samples are excluded
    /// from the sums and `n*` replaces `n`.
    pub fn excludes_zero_vectors(&self) -> bool {
        matches!(self, RhoFamily::Tyler { .. })
    }
}

/// Hooks for user-defined families; the built-in checker is generic over
/// this so deliberately invalid families can be probed in tests.
pub trait RhoSpec {
    fn rho(&self, t: f64) -> Result<f64>;
    fn weight(&self, t: f64) -> Result<f64>;
    fn psi(&self, t: f64) -> Result<f64> {
        Ok(t * self.weight(t)?)
    }
}

impl RhoSpec for RhoFamily {
    fn rho(&self, t: f64) -> Result<f64> {
        RhoFamily::rho(self, t)
    }
    fn weight(&self, t: f64) -> Result<f64> {
        RhoFamily::weight(self, t)
    }
    fn psi(&self, t: f64) -> Result<f64> {
        RhoFamily::psi(self, t)
    }
}

/// Outcome of the numeric loss-shape check.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition1Report {
    pub holds: bool,
    /// First violating grid point and which property failed.
    pub violation: Option<(f64, &'static str)>,
}

/// Numerically verify, on a grid, the shape conditions needed for the
/// fixed-point theory: `ρ` nondecreasing, `u ≥ 0`, and `ψ(t) = t·u(t)`
/// nondecreasing (the differentiable characterization of geodesic convexity
/// of the loss).
///
/// The grid must be sorted ascending with at least 3 points.
pub fn check_condition1<F: RhoSpec>(family: &F, grid: &[f64]) -> Condition1Report {
    assert!(grid.len() >= 3, "condition check needs at least 3 grid points");
    assert!(
        grid.windows(2).all(|w| w[0] < w[1]) && grid[0] > 0.0,
        "grid must be positive and strictly ascending"
    );
    let mut prev_rho = f64::NEG_INFINITY;
    let mut prev_psi = f64::NEG_INFINITY;
    for &t in grid {
        let (r, u, psi) = match (family.rho(t), family.weight(t), family.psi(t)) {
            (Ok(r), Ok(u), Ok(s)) => (r, u, s),
            _ => return Condition1Report { holds: false, violation: Some((t, "evaluation failed")) },
        };
        if u < 0.0 {
            return Condition1Report { holds: false, violation: Some((t, "negative weight")) };
        }
        let slack_r = 1e-12 * prev_rho.abs().max(1.0);
        if r < prev_rho - slack_r {
            return Condition1Report { holds: false, violation: Some((t, "loss decreased")) };
        }
        let slack_p = 1e-12 * prev_psi.abs().max(1.0);
        if psi < prev_psi - slack_p {
            return Condition1Report { holds: false, violation: Some((t, "psi decreased")) };
        }
        prev_rho = r.max(prev_rho);
        prev_psi = psi.max(prev_psi);
    }
    Condition1Report { holds: true, violation: None }
}

/// Default log-spaced grid for [`check_condition1`]: 2000 points over
/// `[1e-6, 1e6]`.
pub fn default_condition1_grid() -> Vec<f64> {
    let n = 2000usize;
    let (lo, hi) = (-6.0f64, 6.0f64);
    (0..n)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            10f64.powf(e)
        })
        .collect()
}

/// Huber tuning constants: `c²` from `q = F_{χ²_{2p}}(2c²)` and the Gaussian
/// consistency factor `b = F_{χ²_{2(p+1)}}(2c²) + c²(1−q)/p`.
pub fn huber_constants(p: usize, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("huber fraction q must lie in (0, 1)"));
    }
    assert!(p >= 1);
    let c2 = chi2_quantile(q, 2 * p as u32)? / 2.0;
    let b = chi2_cdf(2.0 * c2, 2 * (p as u32 + 1)) + c2 * (1.0 - q) / p as f64;
    Ok((c2, b))
}

/// Chi-square CDF with `k` degrees of freedom: the regularized lower
/// incomplete gamma `P(k/2, x/2)`.
pub fn chi2_cdf(x: f64, k: u32) -> f64 {
    assert!(k >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    reg_lower_gamma(k as f64 / 2.0, x / 2.0)
}

/// Chi-square quantile by bisection on the CDF, to 1e-10.
pub fn chi2_quantile(q: f64, k: u32) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("quantile level must lie in (0, 1)"));
    }
    let mut hi = k as f64 + 10.0;
    while chi2_cdf(hi, k) < q {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain("quantile bracket failed"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, k) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Regularized lower incomplete gamma `P(a, x)`, series for `x < a + 1`
/// and Lentz continued fraction otherwise; ~1e-14 absolute.
fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ax = a * x.ln() - x - ln_gamma(a);
    if ax < -700.0 {
        return if x < a { 0.0 } else { 1.0 };
    }
    let eps = 1e-16;
    if x < a + 1.0 {
        // series representation
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        loop {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * eps {
                break;
            }
        }
        sum * ax.exp()
    } else {
        // continued fraction for Q(a, x), modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0f64;
        loop {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < eps {
                break;
            }
            i += 1.0;
            if i > 1e6 {
                break;
            }
        }
        1.0 - ax.exp() * h
    }
}

/// Lanczos log-gamma (g = 7, n = 9), ~1e-13 relative.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * core::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
