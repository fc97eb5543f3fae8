//! Monte-Carlo experiment engines.
//!
//! Each engine is split into a pure per-trial kernel and an order-insensitive
//! aggregation step, so drivers may map trials sequentially (the `run`
//! functions here) or across threads (the companion crate) and obtain
//! byte-identical tables: trial `t` draws only from substreams of
//! `(master_seed, t)`, and aggregation always consumes the trial-ordered
//! outcome slice.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::detection::{nmf_statistic, threshold_for_pfa, uniform_steering};
use crate::error::{Error, Result};
use crate::estimators::{cwh, glc, reg_tyler, scm, tyler, RegParams, SampleSet, SolveOptions};
use crate::hpd::HpdMatrix;
use crate::sampling::{random_cov, sample_ces, CesKind, CesModel, CounterRng, SeedSpec};
use crate::tuning::{oracle_alpha_complex, plugin_alpha, ShapeMatrix};
use crate::C64;

/// Iteration controls for estimator solves inside experiments.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500 }
    }
}

impl SolverSettings {
    fn options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, ..SolveOptions::default() }
    }
}

/// Scatter estimators available to the detection experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Tyler's M-estimator (no shrinkage).
    Tyler,
    /// `β S + α I` with the simple fallback tuning `β̂ = 1`,
    /// `α̂ = tr(S)/(p·n)`; flagged as fallback in the output.
    Glc,
    /// Regularized Tyler with the plug-in oracle weight, `β = 1 − α̂`.
    RegTyler,
    /// Trace-normalized diagonally loaded iteration; its published tuning
    /// rule lives in an external reference, so the same plug-in weight as
    /// RegTyler is used and flagged as fallback.
    Cwh,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Tyler => "tyl",
            EstimatorKind::Glc => "glc",
            EstimatorKind::RegTyler => "regtyl",
            EstimatorKind::Cwh => "cwh",
        }
    }
}

fn clamp_unit_open(alpha: f64) -> f64 {
    alpha.clamp(1e-9, 1.0 - 1e-9)
}

/// False-alarm-rate experiment: adaptive NMF detection on signal-free data.
pub mod pfa {
    use super::*;

    #[derive(Debug, Clone)]
    pub struct PfaConfig {
        pub dim: usize,
        pub clutter: CesKind,
        pub n_list: Vec<usize>,
        pub pfa_targets: Vec<f64>,
        pub estimators: Vec<EstimatorKind>,
        pub trials: usize,
        pub master_seed: u64,
        /// Also evaluate the detector with the true per-trial scatter
        /// (the `n = ∞` reference rows).
        pub include_known_baseline: bool,
        pub solver: SolverSettings,
    }

    /// One estimator arm of one trial.
    #[derive(Debug, Clone)]
    pub struct ArmOutcome {
        pub estimator: EstimatorKind,
        pub n: usize,
        pub alpha_used: Option<f64>,
        /// The shrinkage weight came from a fallback rule rather than the
        /// oracle plug-in of this framework.
        pub fallback_tuning: bool,
        /// `None` records an estimator failure; the trial is counted and
        /// excluded from the rate, never silently dropped.
        pub statistic: Option<f64>,
    }

    #[derive(Debug, Clone)]
    pub struct PfaTrialRecord {
        pub trial_id: u64,
        pub known_statistic: Option<f64>,
        /// Ordered `n`-major, estimator-minor, matching the config lists.
        pub arms: Vec<ArmOutcome>,
    }

    /// Run one trial: draw a scatter, a primary vector and secondary sets,
    /// and evaluate the statistic for every arm.
    pub fn trial(cfg: &PfaConfig, trial_id: u64) -> PfaTrialRecord {
        let p = cfg.dim;
        let steer = uniform_steering(p);
        let base = SeedSpec::new(cfg.master_seed, trial_id);
        let sigma = random_cov(p, base.substream(0));
        let model = CesModel { kind: cfg.clutter, scatter: sigma.clone() };
        let primary = sample_ces(&model, 1, base.substream(1));
        let z = primary.vector(0);
        let known_statistic = if cfg.include_known_baseline {
            nmf_statistic(z, &steer, &sigma).ok()
        } else {
            None
        };
        let mut arms = Vec::with_capacity(cfg.n_list.len() * cfg.estimators.len());
        for (j, &n) in cfg.n_list.iter().enumerate() {
            let secondary = sample_ces(&model, n, base.substream(2 + j as u64));
            for &estimator in &cfg.estimators {
                let (alpha_used, fallback_tuning, sigma_hat) =
                    estimate(&secondary, estimator, &cfg.solver);
                let statistic = sigma_hat.and_then(|s| nmf_statistic(z, &steer, &s).ok());
                arms.push(ArmOutcome { estimator, n, alpha_used, fallback_tuning, statistic });
            }
        }
        PfaTrialRecord { trial_id, known_statistic, arms }
    }

    fn estimate(
        secondary: &SampleSet,
        estimator: EstimatorKind,
        solver: &SolverSettings,
    ) -> (Option<f64>, bool, Option<HpdMatrix>) {
        let p = secondary.dim();
        match estimator {
            EstimatorKind::Tyler => {
                let sigma = tyler(secondary, solver.tol, solver.max_iter).ok().map(|r| r.sigma_hat);
                (None, false, sigma)
            }
            EstimatorKind::Glc => {
                let s = scm(secondary);
                let alpha = s.matrix.trace().re / (p as f64 * secondary.n() as f64);
                let params = match RegParams::new(alpha, 1.0) {
                    Ok(p) => p,
                    Err(_) => return (None, true, None),
                };
                (Some(alpha), true, glc(secondary, &params).ok())
            }
            EstimatorKind::RegTyler => match plugin_alpha(secondary) {
                Ok(alpha) => {
                    let a = clamp_unit_open(alpha);
                    let sigma = reg_tyler(secondary, a, 1.0 - a, &solver.options())
                        .ok()
                        .map(|r| r.sigma_hat);
                    (Some(alpha), false, sigma)
                }
                Err(_) => (None, false, None),
            },
            EstimatorKind::Cwh => match plugin_alpha(secondary) {
                Ok(alpha) => {
                    let a = clamp_unit_open(alpha);
                    let sigma =
                        cwh(secondary, a, solver.tol, solver.max_iter).ok().map(|r| r.sigma_hat);
                    (Some(alpha), true, sigma)
                }
                Err(_) => (None, true, None),
            },
        }
    }

    /// One aggregated table row per (estimator, n, target); the known-Σ
    /// baseline rows carry `n = None`.
    #[derive(Debug, Clone, PartialEq)]
    pub struct PfaRow {
        pub estimator: &'static str,
        pub n: Option<usize>,
        pub pfa_target: f64,
        pub threshold: f64,
        pub trials: usize,
        pub failures: usize,
        pub hits: usize,
        pub empirical_pfa: f64,
    }

    pub fn aggregate(cfg: &PfaConfig, records: &[PfaTrialRecord]) -> Result<Vec<PfaRow>> {
        let mut rows = Vec::new();
        if records.is_empty() {
            return Ok(rows);
        }
        let thresholds: Vec<f64> = cfg
            .pfa_targets
            .iter()
            .map(|&t| threshold_for_pfa(t, cfg.dim))
            .collect::<Result<_>>()?;
        if cfg.include_known_baseline {
            for (ti, &target) in cfg.pfa_targets.iter().enumerate() {
                let lambda = thresholds[ti];
                let mut hits = 0;
                let mut failures = 0;
                for r in records {
                    match r.known_statistic {
                        Some(s) if s > lambda => hits += 1,
                        Some(_) => {}
                        None => failures += 1,
                    }
                }
                let valid = records.len() - failures;
                rows.push(PfaRow {
                    estimator: "known",
                    n: None,
                    pfa_target: target,
                    threshold: lambda,
                    trials: records.len(),
                    failures,
                    hits,
                    empirical_pfa: if valid > 0 { hits as f64 / valid as f64 } else { f64::NAN },
                });
            }
        }
        for (j, &n) in cfg.n_list.iter().enumerate() {
            for (e, &estimator) in cfg.estimators.iter().enumerate() {
                let arm_index = j * cfg.estimators.len() + e;
                for (ti, &target) in cfg.pfa_targets.iter().enumerate() {
                    let lambda = thresholds[ti];
                    let mut hits = 0;
                    let mut failures = 0;
                    for r in records {
                        let arm = &r.arms[arm_index];
                        debug_assert_eq!(arm.n, n);
                        debug_assert_eq!(arm.estimator, estimator);
                        match arm.statistic {
                            Some(s) if s > lambda => hits += 1,
                            Some(_) => {}
                            None => failures += 1,
                        }
                    }
                    let valid = records.len() - failures;
                    rows.push(PfaRow {
                        estimator: estimator.name(),
                        n: Some(n),
                        pfa_target: target,
                        threshold: lambda,
                        trials: records.len(),
                        failures,
                        hits,
                        empirical_pfa: if valid > 0 { hits as f64 / valid as f64 } else { f64::NAN },
                    });
                }
            }
        }
        Ok(rows)
    }

    /// Per-trial decision vector for one arm at one threshold (`None` where
    /// the estimator failed). Useful for distribution-freeness checks.
    pub fn decisions(
        records: &[PfaTrialRecord],
        cfg: &PfaConfig,
        estimator: EstimatorKind,
        n: usize,
        threshold: f64,
    ) -> Vec<Option<bool>> {
        let j = cfg.n_list.iter().position(|&x| x == n).expect("n not in config");
        let e = cfg.estimators.iter().position(|&x| x == estimator).expect("estimator not in config");
        let arm_index = j * cfg.estimators.len() + e;
        records.iter().map(|r| r.arms[arm_index].statistic.map(|s| s > threshold)).collect()
    }

    #[derive(Debug, Clone)]
    pub struct PfaOutput {
        pub records: Vec<PfaTrialRecord>,
        pub rows: Vec<PfaRow>,
    }

    /// Sequential driver.
    pub fn run(cfg: &PfaConfig) -> Result<PfaOutput> {
        let records: Vec<PfaTrialRecord> = (0..cfg.trials).map(|t| trial(cfg, t as u64)).collect();
        let rows = aggregate(cfg, &records)?;
        Ok(PfaOutput { records, rows })
    }
}

/// Detection-probability experiment under a fluctuating-amplitude target.
pub mod pd {
    use super::*;

    #[derive(Debug, Clone)]
    pub struct PdConfig {
        pub dim: usize,
        /// K-distribution shape of the clutter texture.
        pub nu: f64,
        pub n_secondary: usize,
        pub pfa_target: f64,
        /// Signal-to-clutter ratios in dB; the ratio is `σ²_{|γ|}/σ²` with
        /// `σ_{|γ|}` the Rayleigh scale of the amplitude.
        pub scr_grid_db: Vec<f64>,
        pub trials: usize,
        pub master_seed: u64,
        pub solver: SolverSettings,
    }

    #[derive(Debug, Clone)]
    pub struct PdTrialOutcome {
        pub scr_index: usize,
        pub trial_id: u64,
        pub alpha_used: Option<f64>,
        /// Adaptive decision (`None` = estimator failure).
        pub adaptive: Option<bool>,
        /// Decision with the true scatter.
        pub known: bool,
    }

    /// One trial at one SCR grid point.
    ///
    /// The received vector is `z = γ·steer + c` with `|γ|` Rayleigh and the
    /// phase uniform (the standard fluctuating-target completion; the
    /// statistic depends on the phase only through rounding). Clutter is
    /// K-distributed with scatter `I` — the detector is scale-invariant, so
    /// a unit clutter power loses nothing.
    pub fn trial(cfg: &PdConfig, scr_index: usize, trial_id: u64) -> PdTrialOutcome {
        let p = cfg.dim;
        let steer = uniform_steering(p);
        let threshold = threshold_for_pfa(cfg.pfa_target, p).expect("validated config");
        let scatter = HpdMatrix::identity(p);
        let model = CesModel::k_dist(cfg.nu, scatter.clone()).expect("validated config");
        let base = SeedSpec::new(cfg.master_seed, trial_id).substream(10_000 + scr_index as u64);

        let mut signal_rng = CounterRng::new(&base.substream(0));
        let scr_linear = 10f64.powf(cfg.scr_grid_db[scr_index] / 10.0);
        let amplitude = signal_rng.rayleigh(scr_linear.sqrt());
        let phase = 2.0 * core::f64::consts::PI * signal_rng.next_f64();
        let gamma = C64::new(amplitude * phase.cos(), amplitude * phase.sin());

        let clutter = sample_ces(&model, 1, base.substream(1));
        let z = steer.scaled(gamma).add(clutter.vector(0));

        let known = nmf_statistic(&z, &steer, &scatter).map(|s| s > threshold).unwrap_or(false);

        let secondary = sample_ces(&model, cfg.n_secondary, base.substream(2));
        let (alpha_used, adaptive) = match plugin_alpha(&secondary) {
            Ok(alpha) => {
                let a = clamp_unit_open(alpha);
                let decision = reg_tyler(&secondary, a, 1.0 - a, &cfg.solver.options())
                    .ok()
                    .and_then(|r| nmf_statistic(&z, &steer, &r.sigma_hat).ok())
                    .map(|s| s > threshold);
                (Some(alpha), decision)
            }
            Err(_) => (None, None),
        };
        PdTrialOutcome { scr_index, trial_id, alpha_used, adaptive, known }
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct PdRow {
        pub scr_db: f64,
        pub threshold: f64,
        pub trials: usize,
        pub failures: usize,
        pub hits_adaptive: usize,
        pub pd_adaptive: f64,
        pub hits_known: usize,
        pub pd_known: f64,
    }

    /// Aggregate outcomes ordered SCR-major, trial-minor.
    pub fn aggregate(cfg: &PdConfig, outcomes: &[PdTrialOutcome]) -> Result<Vec<PdRow>> {
        let threshold = threshold_for_pfa(cfg.pfa_target, cfg.dim)?;
        let mut rows = Vec::with_capacity(cfg.scr_grid_db.len());
        if cfg.trials == 0 {
            return Ok(rows);
        }
        for (si, &scr_db) in cfg.scr_grid_db.iter().enumerate() {
            let slice = &outcomes[si * cfg.trials..(si + 1) * cfg.trials];
            let mut hits_adaptive = 0;
            let mut hits_known = 0;
            let mut failures = 0;
            for o in slice {
                debug_assert_eq!(o.scr_index, si);
                match o.adaptive {
                    Some(true) => hits_adaptive += 1,
                    Some(false) => {}
                    None => failures += 1,
                }
                if o.known {
                    hits_known += 1;
                }
            }
            let valid = cfg.trials - failures;
            rows.push(PdRow {
                scr_db,
                threshold,
                trials: cfg.trials,
                failures,
                hits_adaptive,
                pd_adaptive: if valid > 0 { hits_adaptive as f64 / valid as f64 } else { f64::NAN },
                hits_known,
                pd_known: hits_known as f64 / cfg.trials as f64,
            });
        }
        Ok(rows)
    }

    #[derive(Debug, Clone)]
    pub struct PdOutput {
        pub outcomes: Vec<PdTrialOutcome>,
        pub rows: Vec<PdRow>,
    }

    /// Sequential driver.
    pub fn run(cfg: &PdConfig) -> Result<PdOutput> {
        let mut outcomes = Vec::with_capacity(cfg.scr_grid_db.len() * cfg.trials);
        for si in 0..cfg.scr_grid_db.len() {
            for t in 0..cfg.trials {
                outcomes.push(trial(cfg, si, t as u64));
            }
        }
        let rows = aggregate(cfg, &outcomes)?;
        Ok(PdOutput { outcomes, rows })
    }
}

/// Shape-distance sweep over the shrinkage weight.
pub mod shape {
    use super::*;
    use crate::metrics::shape_distance;
    use crate::sampling::toeplitz_cov;

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum ShapeEstimator {
        Tyler,
        RegTyler,
        Cwh,
    }

    impl ShapeEstimator {
        pub fn name(&self) -> &'static str {
            match self {
                ShapeEstimator::Tyler => "tyl",
                ShapeEstimator::RegTyler => "regtyl",
                ShapeEstimator::Cwh => "cwh",
            }
        }
    }

    #[derive(Debug, Clone)]
    pub struct ShapeSweepConfig {
        pub dim: usize,
        pub rho_list: Vec<f64>,
        pub n_list: Vec<usize>,
        /// Shrinkage grid, subset of (0, 1).
        pub alpha_grid: Vec<f64>,
        pub estimators: Vec<ShapeEstimator>,
        pub trials: usize,
        pub master_seed: u64,
        pub solver: SolverSettings,
    }

    /// One (correlation, sample-size) cell of the sweep.
    #[derive(Debug, Clone)]
    pub struct ShapeCell {
        pub rho_index: usize,
        pub n_index: usize,
        pub rho: f64,
        pub n: usize,
        pub scatter: HpdMatrix,
        /// Exact oracle weight computed from the true (shape-normalized)
        /// scatter — the vertical-marker value.
        pub alpha_oracle: f64,
    }

    pub fn plan(cfg: &ShapeSweepConfig) -> Result<Vec<ShapeCell>> {
        if !cfg.alpha_grid.iter().all(|&a| a > 0.0 && a < 1.0) {
            return Err(Error::Domain("alpha grid must lie strictly inside (0, 1)"));
        }
        let mut cells = Vec::new();
        for (ri, &rho) in cfg.rho_list.iter().enumerate() {
            let scatter = toeplitz_cov(cfg.dim, rho)?;
            let shape = ShapeMatrix::normalize(&scatter);
            for (ni, &n) in cfg.n_list.iter().enumerate() {
                cells.push(ShapeCell {
                    rho_index: ri,
                    n_index: ni,
                    rho,
                    n,
                    scatter: scatter.clone(),
                    alpha_oracle: oracle_alpha_complex(&shape, n),
                });
            }
        }
        Ok(cells)
    }

    #[derive(Debug, Clone)]
    pub struct ShapeCellOutcome {
        pub trial_id: u64,
        pub tyler_d2: Option<f64>,
        /// Per grid weight, in grid order; empty when the estimator is not
        /// in the config.
        pub regtyl_d2: Vec<Option<f64>>,
        pub cwh_d2: Vec<Option<f64>>,
    }

    /// One complex-normal trial of one cell.
    pub fn trial(cfg: &ShapeSweepConfig, cell: &ShapeCell, trial_id: u64) -> ShapeCellOutcome {
        let stream = SeedSpec::new(cfg.master_seed, trial_id)
            .substream(20_000 + cell.rho_index as u64 * 1024 + cell.n_index as u64);
        let model = CesModel::complex_normal(cell.scatter.clone());
        let data = sample_ces(&model, cell.n, stream);
        let want = |e: ShapeEstimator| cfg.estimators.contains(&e);

        let tyler_d2 = if want(ShapeEstimator::Tyler) {
            tyler(&data, cfg.solver.tol, cfg.solver.max_iter)
                .ok()
                .and_then(|r| shape_distance(&cell.scatter, &r.sigma_hat).ok())
        } else {
            None
        };
        let regtyl_d2 = if want(ShapeEstimator::RegTyler) {
            cfg.alpha_grid
                .iter()
                .map(|&a| {
                    reg_tyler(&data, a, 1.0 - a, &cfg.solver.options())
                        .ok()
                        .and_then(|r| shape_distance(&cell.scatter, &r.sigma_hat).ok())
                })
                .collect()
        } else {
            Vec::new()
        };
        let cwh_d2 = if want(ShapeEstimator::Cwh) {
            cfg.alpha_grid
                .iter()
                .map(|&a| {
                    cwh(&data, a, cfg.solver.tol, cfg.solver.max_iter)
                        .ok()
                        .and_then(|r| shape_distance(&cell.scatter, &r.sigma_hat).ok())
                })
                .collect()
        } else {
            Vec::new()
        };
        ShapeCellOutcome { trial_id, tyler_d2, regtyl_d2, cwh_d2 }
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct ShapeRow {
        pub rho: f64,
        pub n: usize,
        pub estimator: &'static str,
        /// `None` for the shrinkage-free Tyler row.
        pub alpha: Option<f64>,
        pub mean_d2: f64,
        pub stderr: f64,
        /// Successful trials behind the mean.
        pub trials: usize,
        pub failures: usize,
    }

    /// Marker values per cell: the exact oracle weight, and (when the CWH
    /// arm was swept) the Monte-Carlo minimizer of its distance curve.
    #[derive(Debug, Clone, PartialEq)]
    pub struct ShapeMarker {
        pub rho: f64,
        pub n: usize,
        pub alpha_oracle: f64,
        pub cwh_alpha_mc_min: Option<f64>,
    }

    #[derive(Debug, Clone)]
    pub struct ShapeOutput {
        pub rows: Vec<ShapeRow>,
        pub markers: Vec<ShapeMarker>,
    }

    fn mean_stderr(values: impl Iterator<Item = Option<f64>>) -> (f64, f64, usize, usize) {
        let mut xs: Vec<f64> = Vec::new();
        let mut failures = 0;
        for v in values {
            match v {
                Some(x) => xs.push(x),
                None => failures += 1,
            }
        }
        if xs.is_empty() {
            return (f64::NAN, f64::NAN, 0, failures);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        (mean, stderr, xs.len(), failures)
    }

    /// Aggregate outcomes ordered cell-major, trial-minor.
    pub fn aggregate(
        cfg: &ShapeSweepConfig,
        cells: &[ShapeCell],
        outcomes: &[ShapeCellOutcome],
    ) -> ShapeOutput {
        let mut rows = Vec::new();
        let mut markers = Vec::new();
        for (ci, cell) in cells.iter().enumerate() {
            let slice = &outcomes[ci * cfg.trials..(ci + 1) * cfg.trials];
            if cfg.estimators.contains(&ShapeEstimator::Tyler) {
                let (mean, stderr, ok, fail) = mean_stderr(slice.iter().map(|o| o.tyler_d2));
                rows.push(ShapeRow {
                    rho: cell.rho,
                    n: cell.n,
                    estimator: "tyl",
                    alpha: None,
                    mean_d2: mean,
                    stderr,
                    trials: ok,
                    failures: fail,
                });
            }
            let mut cwh_curve: Vec<(f64, f64)> = Vec::new();
            for (which, included) in [
                (ShapeEstimator::RegTyler, cfg.estimators.contains(&ShapeEstimator::RegTyler)),
                (ShapeEstimator::Cwh, cfg.estimators.contains(&ShapeEstimator::Cwh)),
            ] {
                if !included {
                    continue;
                }
                for (ai, &alpha) in cfg.alpha_grid.iter().enumerate() {
                    let (mean, stderr, ok, fail) = mean_stderr(slice.iter().map(|o| match which {
                        ShapeEstimator::RegTyler => o.regtyl_d2[ai],
                        ShapeEstimator::Cwh => o.cwh_d2[ai],
                        ShapeEstimator::Tyler => unreachable!(),
                    }));
                    if which == ShapeEstimator::Cwh && ok > 0 {
                        cwh_curve.push((alpha, mean));
                    }
                    rows.push(ShapeRow {
                        rho: cell.rho,
                        n: cell.n,
                        estimator: which.name(),
                        alpha: Some(alpha),
                        mean_d2: mean,
                        stderr,
                        trials: ok,
                        failures: fail,
                    });
                }
            }
            let cwh_alpha_mc_min = cwh_curve
                .iter()
                .fold(None::<(f64, f64)>, |best, &(a, m)| match best {
                    Some((_, bm)) if bm <= m => best,
                    _ => Some((a, m)),
                })
                .map(|(a, _)| a);
            markers.push(ShapeMarker {
                rho: cell.rho,
                n: cell.n,
                alpha_oracle: cell.alpha_oracle,
                cwh_alpha_mc_min,
            });
        }
        ShapeOutput { rows, markers }
    }

    /// Sequential driver.
    pub fn run(cfg: &ShapeSweepConfig) -> Result<ShapeOutput> {
        let cells = plan(cfg)?;
        let mut outcomes = Vec::with_capacity(cells.len() * cfg.trials);
        for cell in &cells {
            for t in 0..cfg.trials {
                outcomes.push(trial(cfg, cell, t as u64));
            }
        }
        Ok(aggregate(cfg, &cells, &outcomes))
    }
}
