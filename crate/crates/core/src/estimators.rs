//! Scatter-matrix estimators.
//!
//! The central object is the diagonally loaded M-estimating equation
//!
//! ```text
//! Σ̂ = (β/n) Σ_i u(zᵢ† Σ̂⁻¹ zᵢ) zᵢ zᵢ† + α I,        α > 0, β > 0,
//! ```
//!
//! the critical-point equation of the penalized cost
//!
//! ```text
//! L(Σ) = (β/n) Σ_i ρ(zᵢ† Σ⁻¹ zᵢ) − ln|Σ⁻¹| + α tr(Σ⁻¹),
//! ```
//!
//! solved by plain fixed-point iteration from any positive-definite start.
//! Specializations: the Gaussian family collapses to the closed-form
//! `β S + α I` (GLC); Tyler weights give the regularized Tyler estimator
//! (zero samples dropped, `n*` bookkeeping); `α = 0, β = 1` with Tyler
//! weights is the classic scale-free Tyler estimator, which we normalize to
//! `tr(Σ̂⁻¹) = p`. The trace-normalized diagonally loaded (CWH) iteration is
//! provided for comparison; it is an iteration, not the minimizer of a known
//! cost, so only its own residual is reported.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hpd::{cholesky_lower, CMatrix, ComplexVector, HpdMatrix};
use crate::rho::RhoFamily;
use crate::C64;

/// The shrinkage pair `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    alpha: f64,
    beta: f64,
}

impl RegParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::Domain("alpha must be finite and nonnegative"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain("beta must be finite and positive"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// A sample of complex `p`-vectors with zero-vector bookkeeping.
#[derive(Debug, Clone)]
pub struct SampleSet {
    dim: usize,
    vectors: Vec<ComplexVector>,
    n_star: usize,
}

impl SampleSet {
    pub fn new(dim: usize, vectors: Vec<ComplexVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Domain("sample must contain at least one vector"));
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
            }
            if !v.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Domain("sample vectors must be finite"));
            }
        }
        let n_star = vectors.iter().filter(|v| !v.is_zero()).count();
        Ok(Self { dim, vectors, n_star })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// Count of nonzero vectors.
    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &ComplexVector {
        &self.vectors[i]
    }

    /// Every vector multiplied by the same complex constant.
    pub fn scaled(&self, c: C64) -> SampleSet {
        let vectors = self.vectors.iter().map(|v| v.scaled(c)).collect();
        SampleSet::new(self.dim, vectors).expect("scaling preserves well-formedness")
    }

    /// Whether the nonzero vectors span the full space. Rank is decided by
    /// Gram-Schmidt with a relative cutoff, not by raw factorization pivots
    /// (exactly singular Gram matrices can round to tiny positive pivots).
    pub fn spans_full_space(&self) -> bool {
        if self.n_star < self.dim {
            return false;
        }
        let scale = self.nonzero().map(|v| v.norm()).fold(0.0f64, f64::max);
        if scale == 0.0 {
            return false;
        }
        let cutoff = 1e-10 * scale;
        let mut basis: Vec<ComplexVector> = Vec::new();
        for v in self.nonzero() {
            let mut r = v.clone();
            for b in &basis {
                let coef = b.inner(&r);
                r = r.add(&b.scaled(-coef));
            }
            if r.norm() > cutoff {
                basis.push(r.normalized());
                if basis.len() == self.dim {
                    return true;
                }
            }
        }
        false
    }

    fn nonzero(&self) -> impl Iterator<Item = &ComplexVector> {
        self.vectors.iter().filter(|v| !v.is_zero())
    }
}

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub sigma_hat: HpdMatrix,
    pub iterations: usize,
    /// Relative Frobenius change between the last two iterates.
    pub residual: f64,
    pub converged: bool,
    /// Residual of the trace identity `α·tr(Σ̂⁻¹) = p − β·mean ψ(zᵢ†Σ̂⁻¹zᵢ)`
    /// implied by the estimating equation (for the CWH iteration, which has
    /// no such identity, this is `|tr(V) − p|` instead).
    pub trace_identity_residual: f64,
}

/// Iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Run the exact subspace-concentration check before Tyler-type solves
    /// with `β ≥ 1/p`. Off by default: the check is exponential in `n`, and
    /// random continuous data is in general position almost surely.
    pub verify_tyler_conditions: bool,
    /// Subset budget for the exact check.
    pub condition_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000, verify_tyler_conditions: false, condition_budget: 1_000_000 }
    }
}

/// Sample covariance matrix `(1/n) Σ zᵢzᵢ†`, possibly singular.
#[derive(Debug, Clone)]
pub struct Scm {
    pub matrix: CMatrix,
    /// Whether the matrix is (certifiably) positive definite.
    pub positive_definite: bool,
}

pub fn scm(data: &SampleSet) -> Scm {
    let mut s = CMatrix::zeros(data.dim());
    for v in data.vectors() {
        s.add_scaled_outer(v, 1.0 / data.n() as f64);
    }
    s.hermitize();
    let positive_definite = cholesky_lower(&s).is_ok();
    Scm { matrix: s, positive_definite }
}

/// General linear combination estimator `β S + α I` — the unique minimizer
/// of the penalized cost under the Gaussian loss.
pub fn glc(data: &SampleSet, params: &RegParams) -> Result<HpdMatrix> {
    let s = scm(data);
    let mut m = s.matrix.scale(params.beta());
    for i in 0..m.dim() {
        let d = m.get(i, i) + params.alpha();
        m.set(i, i, d);
    }
    HpdMatrix::new(m)
}

/// Estimated distance from the fixed point after a step of size `change`,
/// assuming the locally linear convergence of the iteration: the geometric
/// tail `change · r/(1−r)` with the rate estimated from consecutive steps.
/// Termination on this quantity (rather than on the raw step) keeps the
/// reported solution within `tol` of the fixed point even when the
/// contraction is slow (small ridge weights).
fn geometric_tail(change: f64, prev_change: f64) -> f64 {
    if change == 0.0 {
        return 0.0;
    }
    if !prev_change.is_finite() || prev_change <= 0.0 {
        return f64::INFINITY;
    }
    let rate = change / prev_change;
    if rate >= 1.0 {
        return f64::INFINITY;
    }
    change.max(change * rate / (1.0 - rate))
}

fn effective_n(data: &SampleSet, family: &RhoFamily) -> usize {
    if family.excludes_zero_vectors() {
        data.n_star()
    } else {
        data.n()
    }
}

/// One application of the fixed-point map
/// `G(Σ) = (β/n) Σ_i u(zᵢ†Σ⁻¹zᵢ) zᵢzᵢ† + αI`.
///
/// Zero vectors contribute nothing to the sum; for Tyler-type weights they
/// are also excluded from the divisor (`n*`).
pub fn regularized_m_step(
    data: &SampleSet,
    family: &RhoFamily,
    params: &RegParams,
    sigma: &HpdMatrix,
) -> Result<HpdMatrix> {
    let p = data.dim();
    let n_eff = effective_n(data, family);
    if n_eff == 0 {
        return Err(Error::ZeroVector);
    }
    let scale = params.beta() / n_eff as f64;
    let mut next = CMatrix::zeros(p);
    for z in data.nonzero() {
        let t = sigma.quad_form_inv(z);
        let w = family.weight(t)?;
        next.add_scaled_outer(z, scale * w);
    }
    for i in 0..p {
        let d = next.get(i, i) + params.alpha();
        next.set(i, i, d);
    }
    HpdMatrix::new(next)
}

/// Relative fixed-point residual `‖Σ − G(Σ)‖ / ‖Σ‖`.
pub fn fixed_point_residual(
    data: &SampleSet,
    family: &RhoFamily,
    params: &RegParams,
    sigma: &HpdMatrix,
) -> Result<f64> {
    let g = regularized_m_step(data, family, params, sigma)?;
    Ok(sigma.matrix().sub(g.matrix()).frobenius_norm() / sigma.frobenius_norm())
}

/// Penalized cost `(β/n) Σ ρ(zᵢ†Σ⁻¹zᵢ) − ln|Σ⁻¹| + α tr(Σ⁻¹)`.
pub fn penalized_cost(
    data: &SampleSet,
    family: &RhoFamily,
    params: &RegParams,
    sigma: &HpdMatrix,
) -> Result<f64> {
    let n_eff = effective_n(data, family);
    if n_eff == 0 {
        return Err(Error::ZeroVector);
    }
    let mut acc = 0.0;
    for z in data.nonzero() {
        acc += family.rho(sigma.quad_form_inv(z))?;
    }
    Ok(params.beta() / n_eff as f64 * acc - sigma.log_det_inverse()
        + params.alpha() * sigma.trace_inverse())
}

/// Residual of the estimating-equation trace identity
/// `α·tr(Σ⁻¹) = p − β·mean ψ(zᵢ†Σ⁻¹zᵢ)` at a candidate solution.
pub fn trace_identity_gap(
    data: &SampleSet,
    family: &RhoFamily,
    params: &RegParams,
    sigma: &HpdMatrix,
) -> Result<f64> {
    let p = data.dim() as f64;
    let n_eff = effective_n(data, family) as f64;
    let mut psi_sum = 0.0;
    for z in data.nonzero() {
        psi_sum += family.psi(sigma.quad_form_inv(z))?;
    }
    Ok((params.alpha() * sigma.trace_inverse() - p + params.beta() * psi_sum / n_eff).abs())
}

fn check_tyler_preconditions(data: &SampleSet, params: &RegParams, opts: &SolveOptions) -> Result<()> {
    let p = data.dim() as f64;
    if !(params.beta() < 1.0) {
        return Err(Error::Domain("tyler weights require beta < 1"));
    }
    if params.beta() < 1.0 / p {
        return Ok(()); // unconditional existence range
    }
    if opts.verify_tyler_conditions {
        match crate::metrics::tyler_condition_advisory(data, params.beta(), opts.condition_budget)? {
            crate::metrics::TylerAdvisory::ViolatesB => {
                return Err(Error::ConditionViolated("subspace concentration: no solution exists"))
            }
            // On the boundary (B holds, A fails) existence is not settled;
            // proceed and let the iteration report non-convergence.
            crate::metrics::TylerAdvisory::Indeterminate | crate::metrics::TylerAdvisory::SatisfiesA => {}
        }
    }
    Ok(())
}

/// Solve the regularized M-estimating equation by fixed-point iteration.
///
/// Requires `α > 0`. For bounded-below losses (Gaussian, Huber) the solution
/// exists and is unique for any sample; for Tyler weights `β < 1` is
/// required and, unless `β < 1/p`, the sample must satisfy the subspace
/// concentration condition (verified only if
/// [`SolveOptions::verify_tyler_conditions`] is set).
///
/// On `max_iter` exhaustion the best iterate is returned with
/// `converged = false`; definiteness loss of an iterate is an error and
/// indicates a precondition violation.
pub fn solve_regularized_m(
    data: &SampleSet,
    family: &RhoFamily,
    params: &RegParams,
    init: &HpdMatrix,
    opts: &SolveOptions,
) -> Result<EstimateReport> {
    if init.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: init.dim() });
    }
    if !(params.alpha() > 0.0) {
        return Err(Error::Domain("regularized solve requires alpha > 0"));
    }
    if family.excludes_zero_vectors() {
        check_tyler_preconditions(data, params, opts)?;
    }

    let mut sigma = init.clone();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        let next = regularized_m_step(data, family, params, &sigma)?;
        let change = next.matrix().sub(sigma.matrix()).frobenius_norm() / sigma.frobenius_norm();
        sigma = next;
        iterations = k;
        let prev_change = residual;
        residual = change;
        if geometric_tail(residual, prev_change) <= opts.tol {
            converged = true;
            break;
        }
    }
    let trace_identity = trace_identity_gap(data, family, params, &sigma)?;
    Ok(EstimateReport {
        sigma_hat: sigma,
        iterations,
        residual,
        converged,
        trace_identity_residual: trace_identity,
    })
}

/// Tyler's M-estimator (no regularization), normalized to `tr(Σ̂⁻¹) = p`.
///
/// Requires at least `p` nonzero vectors spanning the full space. Zero
/// vectors are excluded throughout. Iterates are trace-normalized (the raw
/// fixed point is defined only up to scale), and the reported solution is
/// rescaled to the trace-inverse convention used by the shrinkage plug-in.
pub fn tyler(data: &SampleSet, tol: f64, max_iter: usize) -> Result<EstimateReport> {
    let p = data.dim();
    if data.n_star() < p || !data.spans_full_space() {
        return Err(Error::RankDeficient);
    }
    let nz: Vec<&ComplexVector> = data.nonzero().collect();
    let n_star = nz.len() as f64;
    let mut sigma = HpdMatrix::identity(p);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=max_iter {
        let mut next = CMatrix::zeros(p);
        for z in &nz {
            let t = sigma.quad_form_inv(z);
            next.add_scaled_outer(z, p as f64 / (n_star * t));
        }
        let mut next = HpdMatrix::new(next)?;
        next = next.scaled(p as f64 / next.trace()).expect("trace of HPD matrix is positive");
        let change = next.rel_diff(&sigma);
        sigma = next;
        iterations = k;
        let prev_change = residual;
        residual = change;
        if geometric_tail(residual, prev_change) <= tol {
            converged = true;
            break;
        }
    }
    let sigma = sigma
        .scaled(sigma.trace_inverse() / p as f64)
        .expect("trace-inverse of HPD matrix is positive");
    // Estimating-equation identity with (α, β) = (0, 1): ψ ≡ p makes the
    // mean-ψ term cancel the dimension exactly.
    let family = RhoFamily::tyler(p);
    let params = RegParams::new(0.0, 1.0)?;
    let trace_identity = trace_identity_gap(data, &family, &params, &sigma)?;
    Ok(EstimateReport { sigma_hat: sigma, iterations, residual, converged, trace_identity_residual: trace_identity })
}

/// Regularized Tyler's M-estimator: the fixed point of
/// `Σ̂ = (pβ/n*) Σ_{zᵢ≠0} zᵢzᵢ†/(zᵢ†Σ̂⁻¹zᵢ) + αI`.
///
/// With `β = 1 − α` the solution satisfies `tr(Σ̂⁻¹) = p` and is the shape
/// estimator used throughout the experiments.
pub fn reg_tyler(data: &SampleSet, alpha: f64, beta: f64, opts: &SolveOptions) -> Result<EstimateReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("regularized tyler requires alpha in (0, 1)"));
    }
    let family = RhoFamily::tyler(data.dim());
    let params = RegParams::new(alpha, beta)?;
    solve_regularized_m(data, &family, &params, &HpdMatrix::identity(data.dim()), opts)
}

/// CWH iteration from a given start.
///
/// ```text
/// Σ_{k+1} = (1−α)(p/n*) Σ_i zᵢzᵢ†/(zᵢ†V_k⁻¹zᵢ) + αI,   V_{k+1} = p Σ_{k+1}/tr(Σ_{k+1})
/// ```
///
/// Convergence is measured on `V_k` (not `Σ_k`); the reported matrix is the
/// trace-normalized limit `V` with `tr(V) = p`.
pub fn cwh_from(
    data: &SampleSet,
    alpha: f64,
    init: &HpdMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<EstimateReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("cwh requires alpha in (0, 1)"));
    }
    if init.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: init.dim() });
    }
    let p = data.dim();
    let nz: Vec<&ComplexVector> = data.nonzero().collect();
    if nz.is_empty() {
        return Err(Error::ZeroVector);
    }
    let n_star = nz.len() as f64;
    let mut v = init.clone();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=max_iter {
        let mut next = CMatrix::zeros(p);
        for z in &nz {
            let t = v.quad_form_inv(z);
            next.add_scaled_outer(z, (1.0 - alpha) * p as f64 / (n_star * t));
        }
        for i in 0..p {
            let d = next.get(i, i) + alpha;
            next.set(i, i, d);
        }
        let sigma_next = HpdMatrix::new(next)?;
        let v_next = sigma_next
            .scaled(p as f64 / sigma_next.trace())
            .expect("trace of HPD matrix is positive");
        let change = v_next.rel_diff(&v);
        v = v_next;
        iterations = k;
        let prev_change = residual;
        residual = change;
        if geometric_tail(residual, prev_change) <= tol {
            converged = true;
            break;
        }
    }
    let trace_identity = (v.trace() - p as f64).abs();
    Ok(EstimateReport { sigma_hat: v, iterations, residual, converged, trace_identity_residual: trace_identity })
}

/// CWH iteration from the identity start.
pub fn cwh(data: &SampleSet, alpha: f64, tol: f64, max_iter: usize) -> Result<EstimateReport> {
    cwh_from(data, alpha, &HpdMatrix::identity(data.dim()), tol, max_iter)
}
