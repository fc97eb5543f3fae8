//! Estimator evaluation: the scale-invariant shape distance, and exact
//! subspace-concentration checks for Tyler-type existence theory.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::SampleSet;
use crate::hpd::{ComplexVector, HpdMatrix};

/// Squared shape distance
/// `D²(M, S) = ‖ (p / tr(M⁻¹S)) · M⁻¹S − I ‖²_F`.
///
/// Zero iff `S ∝ M`; invariant to separate rescaling of both arguments.
pub fn shape_distance(m: &HpdMatrix, s: &HpdMatrix) -> Result<f64> {
    if m.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: s.dim() });
    }
    let p = m.dim();
    let w = m.inverse().matrix().mul(s.matrix());
    let c = p as f64 / w.trace().re;
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..p {
            let mut v = w.get(i, j) * c;
            if i == j {
                v -= 1.0;
            }
            acc += v.norm_sqr();
        }
    }
    Ok(acc)
}

/// Verdict of a subspace-concentration check.
#[derive(Debug, Clone)]
pub enum ConditionVerdict {
    Holds,
    /// A violating subspace was found; `witness` is an orthonormal basis.
    Fails { witness: Vec<ComplexVector>, dim: usize, members: usize },
}

impl ConditionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionVerdict::Holds)
    }
}

/// Strict check: for every proper subspace `V` spanned by sample points,
/// `#{zᵢ ∈ V}/n < dim(V)/(pβ)`.
///
/// Sufficient for existence and uniqueness of the regularized Tyler
/// solution at `β ≥ 1/p`. Exact but exponential: refuses above `budget`
/// candidate subsets.
pub fn check_condition_a(data: &SampleSet, beta: f64, budget: u64) -> Result<ConditionVerdict> {
    check_condition(data, beta, budget, true)
}

/// Non-strict variant (`≤`); its failure rules out any solution.
pub fn check_condition_b(data: &SampleSet, beta: f64, budget: u64) -> Result<ConditionVerdict> {
    check_condition(data, beta, budget, false)
}

/// Combined pre-solve advisory for the regularized Tyler iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TylerAdvisory {
    /// The strict condition holds: unique solution, iteration converges.
    SatisfiesA,
    /// Boundary case (non-strict holds, strict fails): existence not settled
    /// by the theory.
    Indeterminate,
    /// The non-strict condition fails: no solution exists.
    ViolatesB,
}

pub fn tyler_condition_advisory(data: &SampleSet, beta: f64, budget: u64) -> Result<TylerAdvisory> {
    if check_condition_a(data, beta, budget)?.holds() {
        return Ok(TylerAdvisory::SatisfiesA);
    }
    if check_condition_b(data, beta, budget)?.holds() {
        return Ok(TylerAdvisory::Indeterminate);
    }
    Ok(TylerAdvisory::ViolatesB)
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn check_condition(data: &SampleSet, beta: f64, budget: u64, strict: bool) -> Result<ConditionVerdict> {
    assert!(beta > 0.0, "beta must be positive");
    let p = data.dim();
    let n = data.n();
    let max_k = (p - 1).min(n);

    let mut required: u64 = 0;
    for k in 1..=max_k {
        required = required.saturating_add(binomial(n as u64, k as u64));
    }
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }

    // Only subspaces spanned by sample points can maximize the membership
    // count at fixed dimension, so enumerating subsets is exact.
    for k in 1..=max_k {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let basis = orthonormal_basis(data, &subset);
            let d = basis.len();
            if d >= 1 {
                let members = data.vectors().iter().filter(|z| in_span(&basis, z)).count();
                // m/n vs d/(pβ), compared as m·pβ vs d·n to avoid division.
                let lhs = members as f64 * p as f64 * beta;
                let rhs = d as f64 * n as f64;
                let violated = if strict { lhs >= rhs } else { lhs > rhs };
                if violated {
                    return Ok(ConditionVerdict::Fails { witness: basis, dim: d, members });
                }
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    Ok(ConditionVerdict::Holds)
}

/// Advance a k-subset of `{0..n-1}` to its lexicographic successor.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Orthonormal basis of the span of the selected vectors via modified
/// Gram-Schmidt with a relative cutoff (rank-revealing at sample scale).
fn orthonormal_basis(data: &SampleSet, subset: &[usize]) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::new();
    let cutoff_scale = subset
        .iter()
        .map(|&i| data.vector(i).norm())
        .fold(0.0f64, f64::max);
    if cutoff_scale == 0.0 {
        return basis;
    }
    let cutoff = 1e-10 * cutoff_scale;
    for &i in subset {
        let mut v = data.vector(i).clone();
        for b in &basis {
            let coef = b.inner(&v);
            v = v.add(&b.scaled(-coef));
        }
        if v.norm() > cutoff {
            basis.push(v.normalized());
        }
    }
    basis
}

/// Membership `z ∈ span(basis)`: projection residual at most `1e-10·‖z‖`
/// (zero vectors belong to every subspace).
fn in_span(basis: &[ComplexVector], z: &ComplexVector) -> bool {
    let norm = z.norm();
    if norm == 0.0 {
        return true;
    }
    let mut r = z.clone();
    for b in basis {
        let coef = b.inner(&r);
        r = r.add(&b.scaled(-coef));
    }
    r.norm() <= 1e-10 * norm
}
