//! Reproducible generation of complex elliptically symmetric (CES) data and
//! covariance structures for the Monte-Carlo harnesses.
//!
//! Every draw is a pure function of `(master_seed, stream_id, counter)`, so
//! identical seeds give bit-identical samples regardless of thread count or
//! call ordering. Streams are cheap to derive; experiments give each trial
//! (and each independent quantity within a trial) its own substream.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::estimators::SampleSet;
use crate::hpd::{householder_qr, CMatrix, ComplexVector, HpdMatrix};
use crate::C64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Texture draws for compound-Gaussian sampling live on their own substream
/// so that the underlying Gaussian stream is shared with the plain
/// complex-normal model (the two models then produce identical directions
/// `z/‖z‖` under the same seed).
const TEXTURE_SUBSTREAM: u64 = 0x7465_7874_7572_6531;

#[inline]
fn mix64(mut z: u64) -> u64 {
    // Stafford variant 13 of the SplitMix64 finalizer.
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one reproducible draw stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Derive a child stream. Distinct indices give distinct streams under
    /// the same parent.
    pub fn substream(&self, index: u64) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id: mix64(self.stream_id ^ mix64(index.wrapping_add(GOLDEN_GAMMA))),
        }
    }
}

/// Counter-based generator: draw `k` of a stream is `mix64(key + k·γ)`, a
/// pure function of `(master_seed, stream_id, k)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: &SeedSpec) -> Self {
        let key = mix64(
            mix64(seed.master_seed ^ 0x5851_F42D_4C95_7F2D) ^ seed.stream_id.wrapping_mul(GOLDEN_GAMMA),
        );
        Self { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe under `ln`.
    #[inline]
    fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals (Box-Muller; consumes exactly
    /// two raw draws).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * core::f64::consts::PI * u2;
        (r * th.cos(), r * th.sin())
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    /// Standard circular complex normal with `E|z|² = 1`.
    pub fn complex_standard_normal(&mut self) -> C64 {
        let (a, b) = self.normal_pair();
        C64::new(a * core::f64::consts::FRAC_1_SQRT_2, b * core::f64::consts::FRAC_1_SQRT_2)
    }

    /// Gamma variate (Marsaglia-Tsang squeeze for shape ≥ 1, boosted for
    /// shape < 1). Consumes a variable number of raw draws.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        assert!(shape > 0.0 && scale > 0.0, "gamma: parameters must be positive");
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0, scale);
            let u = self.next_open01();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.next_open01();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v * scale;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v * scale;
            }
        }
    }

    /// Rayleigh variate with scale parameter `sigma` (zero allowed).
    pub fn rayleigh(&mut self, sigma: f64) -> f64 {
        sigma * (-2.0 * self.next_open01().ln()).sqrt()
    }
}

/// Data model family for CES sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CesKind {
    ComplexNormal,
    /// Compound Gaussian with Gamma texture of shape `nu` and unit mean
    /// (`τ ~ Gamma(ν, 1/ν)`), the K-distributed clutter model.
    KDist { nu: f64 },
}

/// A CES model: a family kind plus the scatter matrix.
#[derive(Debug, Clone)]
pub struct CesModel {
    pub kind: CesKind,
    pub scatter: HpdMatrix,
}

impl CesModel {
    pub fn complex_normal(scatter: HpdMatrix) -> Self {
        Self { kind: CesKind::ComplexNormal, scatter }
    }

    pub fn k_dist(nu: f64, scatter: HpdMatrix) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Domain("K-distribution shape must be positive"));
        }
        Ok(Self { kind: CesKind::KDist { nu }, scatter })
    }
}

/// Draw `n` samples from a CES model.
///
/// Complex normal: `z = L x` with `L` the lower Cholesky factor of the
/// scatter and `x` standard complex normal, so `E[z z†] = Σ`. K-distributed:
/// `z = √τ · L x` with the texture `τ` drawn from a separate substream.
pub fn sample_ces(model: &CesModel, n: usize, seed: SeedSpec) -> SampleSet {
    let p = model.scatter.dim();
    let l = model.scatter.cholesky_lower();
    let mut gauss = CounterRng::new(&seed);
    let mut texture = CounterRng::new(&seed.substream(TEXTURE_SUBSTREAM));
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        let x = ComplexVector::new((0..p).map(|_| gauss.complex_standard_normal()).collect());
        let mut z = l.mul_vec(&x);
        if let CesKind::KDist { nu } = model.kind {
            let tau = texture.gamma(nu, 1.0 / nu);
            z = z.scaled(C64::new(tau.sqrt(), 0.0));
        }
        vectors.push(z);
    }
    SampleSet::new(p, vectors).expect("generated sample is well formed")
}

/// Scalar field for sphere sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Complex,
    Real,
}

/// Unit-norm vectors uniform on the complex (or real) p-sphere.
pub fn sample_uniform_sphere(p: usize, n: usize, seed: SeedSpec, field: Field) -> SampleSet {
    let mut rng = CounterRng::new(&seed);
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        let x = ComplexVector::new(
            (0..p)
                .map(|_| match field {
                    Field::Complex => rng.complex_standard_normal(),
                    Field::Real => C64::new(rng.standard_normal(), 0.0),
                })
                .collect(),
        );
        vectors.push(x.normalized());
    }
    SampleSet::new(p, vectors).expect("generated sample is well formed")
}

/// Toeplitz correlation matrix with entries `ρ^{|i−j|}`.
pub fn toeplitz_cov(p: usize, rho: f64) -> Result<HpdMatrix> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain("toeplitz correlation must lie in (0, 1)"));
    }
    let m = CMatrix::from_fn(p, |i, j| C64::new(rho.powi(i.abs_diff(j) as i32), 0.0));
    HpdMatrix::new(m)
}

/// The pieces of a randomly generated covariance `Σ = P D P†`.
#[derive(Debug, Clone)]
pub struct RandomCovParts {
    pub cov: HpdMatrix,
    /// Haar-distributed unitary factor.
    pub unitary: CMatrix,
    /// Diagonal of `D`, in draw order (i.i.d. `Unif(0,1)`).
    pub eigenvalues: Vec<f64>,
}

/// Random covariance with Haar unitary eigenvectors and `Unif(0,1)`
/// eigenvalues.
///
/// The unitary comes from the QR factorization of a complex Ginibre matrix
/// with the R-diagonal phases absorbed into Q (plain QR is not Haar).
/// Eigenvalues below 1e-12 are redrawn so the result is certifiably positive
/// definite; the redraw consumes the stream deterministically.
pub fn random_cov_parts(p: usize, seed: SeedSpec) -> RandomCovParts {
    let mut rng = CounterRng::new(&seed);
    let g = CMatrix::from_fn(p, |_, _| rng.complex_standard_normal());
    let (q, r) = householder_qr(&g);
    let mut unitary = q;
    for j in 0..p {
        let rjj = r.get(j, j);
        let mag = rjj.norm();
        let phase = if mag == 0.0 { C64::new(1.0, 0.0) } else { rjj / mag };
        for i in 0..p {
            let v = unitary.get(i, j) * phase;
            unitary.set(i, j, v);
        }
    }
    let mut eigenvalues = Vec::with_capacity(p);
    for _ in 0..p {
        let mut d = rng.next_f64();
        while d < 1e-12 {
            d = rng.next_f64();
        }
        eigenvalues.push(d);
    }
    // Σ = (P D) P†
    let mut pd = CMatrix::zeros(p);
    for j in 0..p {
        for i in 0..p {
            pd.set(i, j, unitary.get(i, j) * eigenvalues[j]);
        }
    }
    let cov = HpdMatrix::new(pd.mul(&unitary.conj_transpose())).expect("P D P† with positive D is HPD");
    RandomCovParts { cov, unitary, eigenvalues }
}

/// Random covariance `Σ = P D P†`; see [`random_cov_parts`].
pub fn random_cov(p: usize, seed: SeedSpec) -> HpdMatrix {
    random_cov_parts(p, seed).cov
}
