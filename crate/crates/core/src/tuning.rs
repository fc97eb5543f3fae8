//! Shrinkage-parameter selection.
//!
//! The scale of a scatter matrix is `τ(Σ) = p / tr(Σ⁻¹)`; dividing by it
//! yields the shape matrix `V = Σ/τ(Σ)` with `tr(V⁻¹) = p`. For the
//! trace-inverse-normalized regularized Tyler estimator, the shrinkage
//! weight minimizing the expected squared shape mismatch of the one-shot
//! clairvoyant estimator has the closed form implemented by
//! [`oracle_alpha_complex`] (and its real-data counterpart); the practical
//! rule [`plugin_alpha`] evaluates it at a Tyler-type pilot estimate.

use crate::error::{Error, Result};
use crate::estimators::{reg_tyler, tyler, SampleSet, SolveOptions};
use crate::hpd::{CMatrix, HpdMatrix};

/// Scale measure `τ(S) = p / tr(S⁻¹)`.
pub fn scale_measure(s: &HpdMatrix) -> f64 {
    s.dim() as f64 / s.trace_inverse()
}

/// A scatter matrix normalized to `tr(M⁻¹) = p`.
#[derive(Debug, Clone)]
pub struct ShapeMatrix {
    inner: HpdMatrix,
}

impl ShapeMatrix {
    /// Relative tolerance on `|tr(M⁻¹) − p|` for accepting an input as
    /// already normalized. Inputs outside it are rejected, not silently
    /// rescaled.
    pub const NORMALIZATION_TOL: f64 = 1e-6;

    pub fn new(m: HpdMatrix) -> Result<Self> {
        let p = m.dim() as f64;
        let residual = (m.trace_inverse() - p).abs() / p;
        if residual > Self::NORMALIZATION_TOL {
            return Err(Error::NormalizationViolated { residual });
        }
        Ok(Self { inner: m })
    }

    /// Rescale an arbitrary HPD matrix to its shape, `S / τ(S)`.
    pub fn normalize(s: &HpdMatrix) -> Self {
        let tau = scale_measure(s);
        let inner = s.scaled(1.0 / tau).expect("scale measure is positive");
        Self { inner }
    }

    pub fn matrix(&self) -> &HpdMatrix {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Oracle shrinkage weight for complex data:
///
/// ```text
/// α_o = (p·tr(M) − 1) / (p·tr(M) − 1 + n(p+1)·(tr(M⁻²)/p − 1))
/// ```
///
/// Always in `(0, 1]`, and 1 exactly when `M = I`.
pub fn oracle_alpha_complex(m: &ShapeMatrix, n: usize) -> f64 {
    assert!(n >= 1);
    let p = m.dim() as f64;
    let tr_m = m.matrix().trace();
    // tr(M⁻²) = ‖M⁻¹‖²_F for Hermitian M⁻¹.
    let inv = m.matrix().inverse();
    let tr_m_inv2 = inv.matrix().frobenius_norm_sqr();
    let a = p * tr_m - 1.0;
    let b = (n as f64) * (p + 1.0) * (tr_m_inv2 / p - 1.0).max(0.0);
    (a / (a + b)).min(1.0)
}

/// Oracle shrinkage weight for real data:
///
/// ```text
/// α_o = (p − 2 + p·tr(M)) / (p − 2 + p·tr(M) + n(p+2)·(tr(M⁻²)/p − 1))
/// ```
pub fn oracle_alpha_real(m: &ShapeMatrix, n: usize) -> Result<f64> {
    assert!(n >= 1);
    let p = m.dim() as f64;
    let fro = m.matrix().frobenius_norm();
    let imag: f64 = {
        let mut worst = 0.0f64;
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                worst = worst.max(m.matrix().entry(i, j).im.abs());
            }
        }
        worst
    };
    if imag > 1e-12 * fro.max(1.0) {
        return Err(Error::NotReal);
    }
    let tr_m = m.matrix().trace();
    let inv = m.matrix().inverse();
    let tr_m_inv2 = inv.matrix().frobenius_norm_sqr();
    let a = p - 2.0 + p * tr_m;
    let b = (n as f64) * (p + 2.0) * (tr_m_inv2 / p - 1.0).max(0.0);
    Ok((a / (a + b)).min(1.0))
}

/// Options for the pilot solve inside [`plugin_alpha`].
fn pilot_options() -> SolveOptions {
    SolveOptions::default()
}

/// Plug-in estimate of the oracle shrinkage weight.
///
/// The pilot is Tyler's M-estimator when `n ≥ p`. In the insufficient
/// sample-support case `n < p` the pilot is the regularized Tyler estimator
/// with `β = (n/p)/2` and `α = 1 − β` (the midpoint of the admissible
/// range, avoiding both the degenerate `β → 0` and the `β → n/p` boundary),
/// renormalized to `tr⁻¹ = p` before evaluating the oracle formula.
pub fn plugin_alpha(data: &SampleSet) -> Result<f64> {
    let p = data.dim();
    let n = data.n();
    let pilot = if n >= p {
        tyler(data, 1e-9, 1000)?
    } else {
        let beta = 0.5 * (n as f64 / p as f64);
        reg_tyler(data, 1.0 - beta, beta, &pilot_options())?
    };
    let shape = ShapeMatrix::normalize(&pilot.sigma_hat);
    Ok(oracle_alpha_complex(&shape, n))
}

/// The Tyler-weighted sample scatter
/// `C = (p/n) Σ zᵢzᵢ† / (zᵢ† M⁻¹ zᵢ)` used by the clairvoyant estimator.
///
/// All vectors must be nonzero.
pub fn normalized_sample_scatter(data: &SampleSet, m: &ShapeMatrix) -> Result<CMatrix> {
    if data.n_star() != data.n() {
        return Err(Error::ZeroVector);
    }
    if data.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: data.dim() });
    }
    let p = data.dim();
    let n = data.n() as f64;
    let mut c = CMatrix::zeros(p);
    for z in data.vectors() {
        let t = m.matrix().quad_form_inv(z);
        c.add_scaled_outer(z, p as f64 / (n * t));
    }
    c.hermitize();
    Ok(c)
}

/// Clairvoyant shrinkage estimate `Σ_α = (1−α) C + α I` for a known shape
/// matrix `M`; one-shot, no iteration. `α = 1` returns the identity exactly.
pub fn clairvoyant_estimate(data: &SampleSet, m: &ShapeMatrix, alpha: f64) -> Result<HpdMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain("clairvoyant weight must lie in [0, 1]"));
    }
    let c = normalized_sample_scatter(data, m)?;
    let mut out = c.scale(1.0 - alpha);
    for i in 0..out.dim() {
        let d = out.get(i, i) + alpha;
        out.set(i, i, d);
    }
    HpdMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::scm;
    use crate::hpd::ComplexVector;
    use crate::sampling::{random_cov, sample_ces, sample_uniform_sphere, CesModel, Field, SeedSpec};
    use crate::C64;

    fn random_shape(p: usize, seed: u64) -> ShapeMatrix {
        ShapeMatrix::normalize(&random_cov(p, SeedSpec::new(seed, 0)))
    }

    #[test]
    fn scale_measure_cases() {
        let c = 3.25;
        let m = HpdMatrix::scaled_identity(4, c).unwrap();
        assert!((scale_measure(&m) - c).abs() < 1e-12);
        let d = HpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        assert!((scale_measure(&d) - 1.6).abs() < 1e-12);
        // homogeneity
        let s = random_cov(5, SeedSpec::new(1, 0));
        let scaled = s.scaled(3.5).unwrap();
        assert!((scale_measure(&scaled) - 3.5 * scale_measure(&s)).abs() < 1e-10);
    }

    #[test]
    fn shape_matrix_normalization_gate() {
        let p = 4;
        let ok = ShapeMatrix::new(HpdMatrix::identity(p));
        assert!(ok.is_ok());
        let off = HpdMatrix::scaled_identity(p, 1.5).unwrap();
        assert!(matches!(ShapeMatrix::new(off.clone()), Err(Error::NormalizationViolated { .. })));
        let fixed = ShapeMatrix::normalize(&off);
        assert!((fixed.matrix().trace_inverse() - p as f64).abs() < 1e-12);
    }

    #[test]
    fn oracle_alpha_identity_is_one() {
        for p in [2usize, 5, 12] {
            let m = ShapeMatrix::new(HpdMatrix::identity(p)).unwrap();
            assert_eq!(oracle_alpha_complex(&m, 7), 1.0);
            assert_eq!(oracle_alpha_real(&m, 7).unwrap(), 1.0);
        }
    }

    #[test]
    fn oracle_alpha_hand_evaluated() {
        // p = 2, M = diag(2, 2/3): tr(M⁻¹) = 2, tr(M) = 8/3, tr(M⁻²) = 2.5
        let m = ShapeMatrix::new(HpdMatrix::from_diagonal(&[2.0, 2.0 / 3.0]).unwrap()).unwrap();
        let n = 24;
        let want = (13.0 / 3.0) / (13.0 / 3.0 + 0.75 * n as f64);
        let got = oracle_alpha_complex(&m, n);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!((got - 0.1941).abs() < 1e-4);

        let want_real = (16.0 / 3.0) / (16.0 / 3.0 + 24.0);
        let got_real = oracle_alpha_real(&m, n).unwrap();
        assert!((got_real - want_real).abs() < 1e-12);
        assert!((got_real - 0.1818).abs() < 1e-4);
    }

    #[test]
    fn oracle_alpha_rejects_complex_for_real_form() {
        let mut m = CMatrix::identity(2);
        m.set(0, 1, C64::new(0.1, 0.4));
        m.set(1, 0, C64::new(0.1, -0.4));
        let shape = ShapeMatrix::normalize(&HpdMatrix::new(m).unwrap());
        assert!(matches!(oracle_alpha_real(&shape, 5), Err(Error::NotReal)));
    }

    #[test]
    fn oracle_alpha_decreases_with_sample_size() {
        let m = random_shape(6, 3);
        let mut last = 1.1;
        for n in [1usize, 4, 16, 64, 256] {
            let a = oracle_alpha_complex(&m, n);
            assert!(a > 0.0 && a < last);
            last = a;
        }
    }

    #[test]
    fn plugin_alpha_is_one_for_identity_pilot() {
        // replicated scaled basis vectors give the identity as Tyler pilot
        let p = 3;
        let mut vectors = alloc::vec::Vec::new();
        for rep in 0..4 {
            for k in 0..p {
                vectors.push(
                    ComplexVector::standard_basis(p, k).scaled(C64::new(1.0 + rep as f64, 0.5)),
                );
            }
        }
        let data = SampleSet::new(p, vectors).unwrap();
        let alpha = plugin_alpha(&data).unwrap();
        assert!((alpha - 1.0).abs() < 1e-9, "{alpha}");
    }

    #[test]
    fn plugin_alpha_composes_oracle_with_tyler_pilot() {
        let p = 12;
        let n = 24;
        let scatter = random_cov(p, SeedSpec::new(8, 0));
        let data = sample_ces(&CesModel::complex_normal(scatter), n, SeedSpec::new(8, 1));
        let got = plugin_alpha(&data).unwrap();
        let pilot = tyler(&data, 1e-9, 1000).unwrap();
        let want = oracle_alpha_complex(&ShapeMatrix::normalize(&pilot.sigma_hat), n);
        assert_eq!(got, want);
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn plugin_alpha_insufficient_sample_support() {
        let p = 12;
        let n = 8;
        let scatter = random_cov(p, SeedSpec::new(9, 0));
        let data = sample_ces(&CesModel::complex_normal(scatter), n, SeedSpec::new(9, 1));
        let alpha = plugin_alpha(&data).unwrap();
        assert!(alpha.is_finite() && alpha > 0.0 && alpha < 1.0, "{alpha}");
    }

    #[test]
    fn plugin_alpha_scale_invariant() {
        let p = 4;
        let scatter = random_cov(p, SeedSpec::new(10, 0));
        let data = sample_ces(&CesModel::complex_normal(scatter), 16, SeedSpec::new(10, 1));
        let a = plugin_alpha(&data).unwrap();
        let b = plugin_alpha(&data.scaled(C64::new(7.0, 3.0))).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn clairvoyant_cases() {
        let p = 3;
        let m = random_shape(p, 11);
        let scatter = random_cov(p, SeedSpec::new(11, 5));
        let data = sample_ces(&CesModel::complex_normal(scatter), 9, SeedSpec::new(11, 1));
        let at_one = clairvoyant_estimate(&data, &m, 1.0).unwrap();
        assert!(at_one.matrix().sub(&CMatrix::identity(p)).frobenius_norm() == 0.0);

        // α = 0 with identity shape and a scaled standard basis: each term
        // p·zz†/(z†z) sums to the identity
        let id_shape = ShapeMatrix::new(HpdMatrix::identity(p)).unwrap();
        let basis = SampleSet::new(
            p,
            (0..p)
                .map(|k| ComplexVector::standard_basis(p, k).scaled(C64::new(0.5 + k as f64, -1.0)))
                .collect(),
        )
        .unwrap();
        let at_zero = clairvoyant_estimate(&basis, &id_shape, 0.0).unwrap();
        assert!(at_zero.matrix().sub(&CMatrix::identity(p)).frobenius_norm() < 1e-14);

        assert!(clairvoyant_estimate(&data, &m, 1.5).is_err());
    }

    #[test]
    fn clairvoyant_preserves_weighted_trace() {
        // tr(M⁻¹ Σ_α) = p exactly when tr(M⁻¹) = p
        let p = 5;
        let m = random_shape(p, 12);
        let scatter = random_cov(p, SeedSpec::new(12, 5));
        let data = sample_ces(&CesModel::complex_normal(scatter), 10, SeedSpec::new(12, 1));
        for alpha in [0.0, 0.3, 0.8, 1.0] {
            let est = clairvoyant_estimate(&data, &m, alpha).unwrap();
            let tr = m.matrix().inverse().matrix().mul(est.matrix()).trace().re;
            assert!((tr - p as f64).abs() < 1e-10, "alpha {alpha}: {tr}");
        }
    }

    #[test]
    fn clairvoyant_rejects_zero_vectors() {
        let p = 2;
        let m = ShapeMatrix::new(HpdMatrix::identity(p)).unwrap();
        let data = SampleSet::new(
            p,
            alloc::vec![ComplexVector::standard_basis(p, 0), ComplexVector::zeros(p)],
        )
        .unwrap();
        assert!(matches!(clairvoyant_estimate(&data, &m, 0.5), Err(Error::ZeroVector)));
    }

    #[test]
    fn first_moment_of_weighted_scatter_is_shape() {
        // E[C] = M, Monte-Carlo over complex-normal draws under scatter M
        let p = 4;
        let n = 8;
        let trials = 50_000;
        let m = random_shape(p, 13);
        let model = CesModel::complex_normal(m.matrix().clone());
        let mut acc = CMatrix::zeros(p);
        for t in 0..trials {
            let data = sample_ces(&model, n, SeedSpec::new(130, t as u64));
            let c = normalized_sample_scatter(&data, &m).unwrap();
            acc = acc.add(&c);
        }
        let mean = acc.scale(1.0 / trials as f64);
        let err = mean.sub(m.matrix().matrix()).frobenius_norm();
        assert!(err < 0.02, "|E[C] - M| = {err}");
    }

    #[test]
    fn plugin_matches_scm_free_pilot_even_under_heavy_tails() {
        // Tyler pilot ignores the texture: plug-in weights agree between
        // Gaussian and compound-Gaussian data with shared directions.
        let p = 4;
        let scatter = random_cov(p, SeedSpec::new(14, 0));
        let seed = SeedSpec::new(14, 1);
        let cn = sample_ces(&CesModel::complex_normal(scatter.clone()), 20, seed);
        let kd = sample_ces(&CesModel::k_dist(4.5, scatter).unwrap(), 20, seed);
        let a = plugin_alpha(&cn).unwrap();
        let b = plugin_alpha(&kd).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        let s_cn = scm(&cn).matrix;
        let s_kd = scm(&kd).matrix;
        assert!(s_cn.sub(&s_kd).frobenius_norm() > 1e-3); // data genuinely differ
    }

    #[test]
    fn second_moment_identity_complex_and_real() {
        // E[C²] closed forms, sphere-driven: complex case
        // p{M² + tr(M)M}/(n(p+1)) + ((n−1)/n)M²; real case
        // p{2M² + tr(M)M}/(n(p+2)) + ((n−1)/n)M².
        let p = 3;
        let n = 5;
        let trials = 50_000;

        let run = |field: Field, m: &ShapeMatrix, seed: u64| -> CMatrix {
            let root = m.matrix().matrix_power(0.5);
            let mut acc = CMatrix::zeros(p);
            for t in 0..trials {
                let u = sample_uniform_sphere(p, n, SeedSpec::new(seed, t as u64), field);
                let mut s = CMatrix::zeros(p);
                for v in u.vectors() {
                    s.add_scaled_outer(v, p as f64 / n as f64);
                }
                let c = root.matrix().mul(&s).mul(root.matrix());
                acc = acc.add(&c.mul(&c));
            }
            acc.scale(1.0 / trials as f64)
        };

        let pf = p as f64;
        let nf = n as f64;

        let m = ShapeMatrix::normalize(&toeplitz_like(p));
        let mm = m.matrix().matrix();
        let m2 = mm.mul(mm);
        let want = m2
            .add(&mm.scale(m.matrix().trace()))
            .scale(pf / (nf * (pf + 1.0)))
            .add(&m2.scale((nf - 1.0) / nf));
        let got = run(Field::Complex, &m, 601);
        let rel = got.sub(&want).frobenius_norm() / want.frobenius_norm();
        assert!(rel < 0.03, "complex second-moment error {rel}");

        let want_real = m2
            .scale(2.0)
            .add(&mm.scale(m.matrix().trace()))
            .scale(pf / (nf * (pf + 2.0)))
            .add(&m2.scale((nf - 1.0) / nf));
        let got_real = run(Field::Real, &m, 602);
        let rel = got_real.sub(&want_real).frobenius_norm() / want_real.frobenius_norm();
        assert!(rel < 0.03, "real second-moment error {rel}");
    }

    fn toeplitz_like(p: usize) -> HpdMatrix {
        crate::sampling::toeplitz_cov(p, 0.6).unwrap()
    }
}
