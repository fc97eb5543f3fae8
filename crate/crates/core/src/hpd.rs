//! Complex Hermitian positive-definite matrix algebra.
//!
//! Everything here works on dense, desk-scale matrices (p up to a few
//! hundred). Positive definiteness is certified once, at construction of
//! [`HpdMatrix`], by a successful Cholesky factorization; the factor is
//! cached so inverses, quadratic forms and determinants reuse it. There is
//! no eigenvalue clipping or silent repair: a failed pivot is an error.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// A complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![C64::new(0.0, 0.0); dim] }
    }

    /// The k-th standard basis vector of dimension `dim`.
    pub fn standard_basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Exact-zero test; simulated data never produces near-zero vectors, so
    /// no epsilon is applied.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Hermitian inner product `self† · other`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            data: self.data.iter().zip(other.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(C64::new(1.0 / n, 0.0))
    }
}

/// A dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(c, 0.0));
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m.set(i, i, C64::new(d, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let p = self.dim;
        let mut out = Self::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let aik = self.get(i, k);
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..p {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim());
        let p = self.dim;
        let mut out = ComplexVector::zeros(p);
        for i in 0..p {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..p {
                acc += self.get(i, j) * v.as_slice()[j];
            }
            out.data[i] = acc;
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let p = self.dim;
        Self::from_fn(p, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// `self += w · z z†` for a real weight `w`.
    pub fn add_scaled_outer(&mut self, z: &ComplexVector, w: f64) {
        assert_eq!(self.dim, z.dim());
        let p = self.dim;
        let zs = z.as_slice();
        for i in 0..p {
            let wi = zs[i] * w;
            for j in 0..p {
                let v = self.get(i, j) + wi * zs[j].conj();
                self.set(i, j, v);
            }
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Replace the matrix by `(A + A†)/2`. Fixed-point iterations accumulate
    /// rounding asymmetry; this keeps iterates exactly Hermitian.
    pub fn hermitize(&mut self) {
        let p = self.dim;
        for i in 0..p {
            let d = self.get(i, i);
            self.set(i, i, C64::new(d.re, 0.0));
            for j in (i + 1)..p {
                let a = self.get(i, j);
                let b = self.get(j, i);
                let m = (a + b.conj()) * 0.5;
                self.set(i, j, m);
                self.set(j, i, m.conj());
            }
        }
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the matching unitary
    /// eigenvector matrix (columns). The input must be Hermitian and finite;
    /// that is the caller's contract, checked by debug assertion only.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let p = self.dim;
        assert!(self.is_finite(), "eigh: non-finite input");
        let mut a = self.clone();
        a.hermitize();
        let mut v = CMatrix::identity(p);
        if p == 1 {
            return (vec![a.get(0, 0).re], v);
        }

        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let tol = 1e-30 * scale * scale;
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..p {
                for j in (i + 1)..p {
                    off += a.get(i, j).norm_sqr();
                }
            }
            if off <= tol {
                break;
            }
            for i in 0..p {
                for j in (i + 1)..p {
                    let aij = a.get(i, j);
                    let r = aij.norm();
                    if r == 0.0 {
                        continue;
                    }
                    let phase = aij / r;
                    let alpha = a.get(i, i).re;
                    let beta = a.get(j, j).re;
                    let tau = (beta - alpha) / (2.0 * r);
                    // smaller root of t^2 - 2 tau t - 1 = 0
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // A <- U† A U with U = I except
                    // U[i][i]=c, U[i][j]=-s·phase, U[j][i]=s·conj(phase), U[j][j]=c
                    for k in 0..p {
                        let aki = a.get(k, i);
                        let akj = a.get(k, j);
                        a.set(k, i, aki * c + akj * (phase.conj() * s));
                        a.set(k, j, akj * c - aki * (phase * s));
                    }
                    for k in 0..p {
                        let aik = a.get(i, k);
                        let ajk = a.get(j, k);
                        a.set(i, k, aik * c + ajk * (phase * s));
                        a.set(j, k, ajk * c - aik * (phase.conj() * s));
                    }
                    a.set(i, j, C64::new(0.0, 0.0));
                    a.set(j, i, C64::new(0.0, 0.0));
                    let dii = a.get(i, i);
                    let djj = a.get(j, j);
                    a.set(i, i, C64::new(dii.re, 0.0));
                    a.set(j, j, C64::new(djj.re, 0.0));
                    for k in 0..p {
                        let vki = v.get(k, i);
                        let vkj = v.get(k, j);
                        v.set(k, i, vki * c + vkj * (phase.conj() * s));
                        v.set(k, j, vkj * c - vki * (phase * s));
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&x, &y| a.get(x, x).re.partial_cmp(&a.get(y, y).re).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&k| a.get(k, k).re).collect();
        let vectors = CMatrix::from_fn(p, |r, cidx| v.get(r, order[cidx]));
        (eigenvalues, vectors)
    }
}

/// Cholesky factorization `A = L L†` of a Hermitian matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] if a pivot is non-positive or
/// non-finite, which certifies that the input was not in PDH(p).
pub fn cholesky_lower(a: &CMatrix) -> Result<CMatrix> {
    let p = a.dim();
    let mut l = CMatrix::zeros(p);
    for j in 0..p {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l.set(j, j, C64::new(djj, 0.0));
        for i in (j + 1)..p {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular factor, forward substitution column by column.
fn invert_lower(l: &CMatrix) -> CMatrix {
    let p = l.dim();
    let mut w = CMatrix::zeros(p);
    for j in 0..p {
        w.set(j, j, C64::new(1.0 / l.get(j, j).re, 0.0));
        for i in (j + 1)..p {
            let mut s = C64::new(0.0, 0.0);
            for k in j..i {
                s += l.get(i, k) * w.get(k, j);
            }
            w.set(i, j, -s / l.get(i, i).re);
        }
    }
    w
}

/// A certified Hermitian positive-definite matrix with its cached lower
/// Cholesky factor.
///
/// Values are immutable after construction; the factor is populated at
/// construction, so sharing across threads needs no synchronization.
#[derive(Debug, Clone)]
pub struct HpdMatrix {
    mat: CMatrix,
    chol: CMatrix,
}

impl HpdMatrix {
    /// Certify a matrix as Hermitian positive definite.
    ///
    /// The input is symmetrized to `(A + A†)/2` first, then factorized.
    pub fn new(mut mat: CMatrix) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        mat.hermitize();
        let chol = cholesky_lower(&mat)?;
        Ok(Self { mat, chol })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(CMatrix::identity(dim)).expect("identity is PD")
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self> {
        Self::new(CMatrix::scaled_identity(dim, c))
    }

    pub fn from_diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(CMatrix::diagonal(entries))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j)
    }

    /// The cached lower Cholesky factor `L` with `L L† = A`.
    pub fn cholesky_lower(&self) -> &CMatrix {
        &self.chol
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    /// `A⁻¹`, computed from the cached factor as `L⁻† L⁻¹`.
    pub fn inverse(&self) -> HpdMatrix {
        let w = invert_lower(&self.chol);
        let inv = w.conj_transpose().mul(&w);
        HpdMatrix::new(inv).expect("inverse of certified HPD matrix is HPD")
    }

    /// `ln |A⁻¹| = −ln |A| = −2 Σ_j ln L_jj`.
    pub fn log_det_inverse(&self) -> f64 {
        -2.0 * (0..self.dim()).map(|j| self.chol.get(j, j).re.ln()).sum::<f64>()
    }

    /// `tr(A⁻¹) = ‖L⁻¹‖²_F`.
    pub fn trace_inverse(&self) -> f64 {
        let w = invert_lower(&self.chol);
        w.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Forward-substitution solve `L y = z` against the cached factor.
    pub fn solve_lower(&self, z: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), z.dim());
        let p = self.dim();
        let mut y = ComplexVector::zeros(p);
        for i in 0..p {
            let mut s = z.as_slice()[i];
            for k in 0..i {
                s -= self.chol.get(i, k) * y.data[k];
            }
            y.data[i] = s / self.chol.get(i, i).re;
        }
        y
    }

    /// Quadratic form `z† A⁻¹ z`, evaluated as `‖L⁻¹ z‖²`.
    pub fn quad_form_inv(&self, z: &ComplexVector) -> f64 {
        self.solve_lower(z).norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.mat.eigh().0
    }

    pub fn eigendecomposition(&self) -> (Vec<f64>, CMatrix) {
        self.mat.eigh()
    }

    /// Fractional (or negative) matrix power `A^t = U diag(λ^t) U†`.
    pub fn matrix_power(&self, t: f64) -> HpdMatrix {
        let (vals, vecs) = self.mat.eigh();
        let p = self.dim();
        let mut scaled = CMatrix::zeros(p);
        // scaled = U diag(λ^t)
        for j in 0..p {
            let lt = vals[j].powf(t);
            for i in 0..p {
                scaled.set(i, j, vecs.get(i, j) * lt);
            }
        }
        let out = scaled.mul(&vecs.conj_transpose());
        HpdMatrix::new(out).expect("power of certified HPD matrix is HPD")
    }

    /// Relative Frobenius distance `‖A − B‖ / ‖B‖`.
    pub fn rel_diff(&self, other: &HpdMatrix) -> f64 {
        self.mat.sub(&other.mat).frobenius_norm() / other.mat.frobenius_norm()
    }

    /// Rescale by a positive constant.
    pub fn scaled(&self, c: f64) -> Result<HpdMatrix> {
        if !(c > 0.0) {
            return Err(Error::Domain("scale factor must be positive"));
        }
        HpdMatrix::new(self.mat.scale(c))
    }
}

/// Point `Σ_t = Σ₀^{1/2} (Σ₀^{−1/2} Σ₁ Σ₀^{−1/2})^t Σ₀^{1/2}` on the
/// geodesic from `s0` to `s1`.
pub fn geodesic_point(s0: &HpdMatrix, s1: &HpdMatrix, t: f64) -> Result<HpdMatrix> {
    if s0.dim() != s1.dim() {
        return Err(Error::DimensionMismatch { expected: s0.dim(), got: s1.dim() });
    }
    let half = s0.matrix_power(0.5);
    let neg_half = s0.matrix_power(-0.5);
    let inner = neg_half.matrix().mul(s1.matrix()).mul(neg_half.matrix());
    let inner = HpdMatrix::new(inner)?;
    let powered = inner.matrix_power(t);
    HpdMatrix::new(half.matrix().mul(powered.matrix()).mul(half.matrix()))
}

/// Householder QR of a square complex matrix; returns unitary `Q` and
/// upper-triangular `R` with `A = Q R`.
pub fn householder_qr(a: &CMatrix) -> (CMatrix, CMatrix) {
    let p = a.dim();
    let mut r = a.clone();
    let mut q = CMatrix::identity(p);
    for k in 0..p {
        // reflector for column k, rows k..p
        let mut norm_sqr = 0.0;
        for i in k..p {
            norm_sqr += r.get(i, k).norm_sqr();
        }
        let norm = norm_sqr.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k..p).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sqr;
        // R <- H R, Q <- Q H  with H = I - tau v v†
        for j in 0..p {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, i) in (k..p).enumerate() {
                dot += v[idx].conj() * r.get(i, j);
            }
            dot *= tau;
            for (idx, i) in (k..p).enumerate() {
                let val = r.get(i, j) - v[idx] * dot;
                r.set(i, j, val);
            }
        }
        for i in 0..p {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, j) in (k..p).enumerate() {
                dot += q.get(i, j) * v[idx];
            }
            dot *= tau;
            for (idx, j) in (k..p).enumerate() {
                let val = q.get(i, j) - dot * v[idx].conj();
                q.set(i, j, val);
            }
        }
    }
    (q, r)
}
