//! Experiment execution: threaded trial mapping, aggregation, and output
//! files (CSV tables plus a manifest), written atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use scattershrink_core::estimators::{
    cwh, glc, reg_tyler, scm, solve_regularized_m, tyler, trace_identity_gap, EstimateReport,
    RegParams, SampleSet, SolveOptions,
};
use scattershrink_core::experiments::{pd, pfa, shape};
use scattershrink_core::hpd::HpdMatrix;
use scattershrink_core::rho::RhoFamily;
use scattershrink_core::tuning::plugin_alpha;

use crate::config::{EstimateSpec, Experiment};
use crate::csvout;
use crate::dataio;
use crate::error::CliError;
use crate::parallel::run_trials;

pub struct RunOutcome {
    pub files: Vec<PathBuf>,
}

/// Execute a `run` experiment and write its outputs under `output_dir`.
pub fn run_experiment(
    experiment: &Experiment,
    config_text: &str,
    output_dir: &Path,
    threads: usize,
) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let mut files = Vec::new();
    let master_seed;
    match experiment {
        Experiment::Pfa(cfg) => {
            master_seed = cfg.master_seed;
            let records = run_trials(threads, cfg.trials, |t| pfa::trial(cfg, t as u64));
            let rows = pfa::aggregate(cfg, &records)?;
            let path = output_dir.join("pfa.csv");
            csvout::write_atomic(&path, &csvout::pfa_csv(&rows, cfg.master_seed))?;
            files.push(path);
        }
        Experiment::Pd(cfg) => {
            master_seed = cfg.master_seed;
            let total = cfg.scr_grid_db.len() * cfg.trials;
            let outcomes = if cfg.trials == 0 {
                Vec::new()
            } else {
                run_trials(threads, total, |i| {
                    pd::trial(cfg, i / cfg.trials, (i % cfg.trials) as u64)
                })
            };
            let rows = pd::aggregate(cfg, &outcomes)?;
            let path = output_dir.join("pd.csv");
            csvout::write_atomic(&path, &csvout::pd_csv(&rows, cfg.n_secondary, cfg.master_seed))?;
            files.push(path);
        }
        Experiment::ShapeSweep(cfg) => {
            master_seed = cfg.master_seed;
            let cells = shape::plan(cfg)?;
            let total = cells.len() * cfg.trials;
            let outcomes = if cfg.trials == 0 {
                Vec::new()
            } else {
                run_trials(threads, total, |i| {
                    shape::trial(cfg, &cells[i / cfg.trials], (i % cfg.trials) as u64)
                })
            };
            let out = shape::aggregate(cfg, &cells, &outcomes);
            let rows_path = output_dir.join("shape.csv");
            csvout::write_atomic(&rows_path, &csvout::shape_csv(&out.rows, cfg.master_seed))?;
            let markers_path = output_dir.join("shape_markers.csv");
            csvout::write_atomic(
                &markers_path,
                &csvout::shape_markers_csv(&out.markers, cfg.master_seed),
            )?;
            files.push(rows_path);
            files.push(markers_path);
        }
        Experiment::Estimate(spec) => {
            master_seed = 0;
            let report = run_estimate(spec)?;
            let path = output_dir.join("estimate.csv");
            csvout::write_atomic(&path, &report)?;
            files.push(path);
        }
    }
    let manifest = csvout::manifest(&csvout::ManifestInfo {
        experiment: experiment.name(),
        config_text,
        master_seed,
        threads,
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs: &files,
    });
    let manifest_path = output_dir.join("manifest.txt");
    csvout::write_atomic(&manifest_path, &manifest)?;
    files.push(manifest_path);
    Ok(RunOutcome { files })
}

fn fmt_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "# {key},{value}");
}

/// Run one estimator over a sample file and render the report: comment
/// lines with the diagnostics, then the matrix in interleaved re/im CSV.
pub fn run_estimate(spec: &EstimateSpec) -> Result<String, CliError> {
    let data = dataio::read_samples(Path::new(&spec.input))?;
    let p = data.dim();
    let mut out = String::new();
    fmt_line(&mut out, "estimator", &spec.estimator);
    fmt_line(&mut out, "p", p);
    fmt_line(&mut out, "n", data.n());
    fmt_line(&mut out, "n_star", data.n_star());

    let opts = SolveOptions { tol: spec.tol, max_iter: spec.max_iter, ..SolveOptions::default() };

    let mut report: Option<EstimateReport> = None;
    let matrix = match spec.estimator.as_str() {
        "scm" => {
            let s = scm(&data);
            fmt_line(&mut out, "positive_definite", s.positive_definite);
            s.matrix
        }
        "glc" | "gaussian" => {
            let params = RegParams::new(spec.alpha.unwrap_or(0.0), spec.beta.unwrap_or(1.0))?;
            fmt_line(&mut out, "alpha", params.alpha());
            fmt_line(&mut out, "beta", params.beta());
            let g = glc(&data, &params)?;
            let gap = trace_identity_gap(&data, &RhoFamily::gaussian(), &params, &g)?;
            fmt_line(&mut out, "iterations", 1);
            fmt_line(&mut out, "residual", 0.0);
            fmt_line(&mut out, "converged", true);
            fmt_line(&mut out, "trace_identity_residual", gap);
            g.matrix().clone()
        }
        "tyler" | "tyl" => {
            let r = tyler(&data, spec.tol, spec.max_iter)?;
            report = Some(r.clone());
            r.sigma_hat.matrix().clone()
        }
        "regtyl" => {
            let alpha = resolve_alpha(spec, &data, &mut out)?;
            let beta = spec.beta.unwrap_or(1.0 - alpha);
            fmt_line(&mut out, "alpha", alpha);
            fmt_line(&mut out, "beta", beta);
            let r = reg_tyler(&data, alpha, beta, &opts)?;
            report = Some(r.clone());
            r.sigma_hat.matrix().clone()
        }
        "cwh" => {
            let alpha = resolve_alpha(spec, &data, &mut out)?;
            fmt_line(&mut out, "alpha", alpha);
            let r = cwh(&data, alpha, spec.tol, spec.max_iter)?;
            report = Some(r.clone());
            r.sigma_hat.matrix().clone()
        }
        "huber" => {
            let q = spec.q.ok_or_else(|| {
                CliError::Usage("huber needs a tuning fraction: --q <0..1>".to_string())
            })?;
            let alpha = spec.alpha.ok_or_else(|| {
                CliError::Usage("huber needs a ridge weight: --alpha > 0".to_string())
            })?;
            let beta = spec.beta.unwrap_or(1.0);
            fmt_line(&mut out, "q", q);
            fmt_line(&mut out, "alpha", alpha);
            fmt_line(&mut out, "beta", beta);
            let family = RhoFamily::huber(p, q)?;
            let params = RegParams::new(alpha, beta)?;
            let r = solve_regularized_m(&data, &family, &params, &HpdMatrix::identity(p), &opts)?;
            report = Some(r.clone());
            r.sigma_hat.matrix().clone()
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown estimator '{other}' (expected scm, glc, tyler, regtyl, cwh or huber)"
            )))
        }
    };
    if let Some(r) = report {
        fmt_line(&mut out, "iterations", r.iterations);
        fmt_line(&mut out, "residual", r.residual);
        fmt_line(&mut out, "converged", r.converged);
        fmt_line(&mut out, "trace_identity_residual", r.trace_identity_residual);
    }
    if spec.plugin_alpha && spec.estimator != "regtyl" && spec.estimator != "cwh" {
        fmt_line(&mut out, "alpha_plugin", plugin_alpha(&data)?);
    }
    out.push_str(&dataio::matrix_to_csv(&matrix));
    Ok(out)
}

fn resolve_alpha(
    spec: &EstimateSpec,
    data: &SampleSet,
    out: &mut String,
) -> Result<f64, CliError> {
    match spec.alpha {
        Some(a) => Ok(a),
        None => {
            let a = plugin_alpha(data)?.clamp(1e-9, 1.0 - 1e-9);
            fmt_line(out, "alpha_plugin", a);
            Ok(a)
        }
    }
}
