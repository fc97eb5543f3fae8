//! CSV schemas for the experiment tables, atomic file writes, and the run
//! manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scattershrink_core::experiments::pd::PdRow;
use scattershrink_core::experiments::pfa::PfaRow;
use scattershrink_core::experiments::shape::{ShapeMarker, ShapeRow};

use crate::error::CliError;

/// Write a file atomically: contents go to `<path>.tmp`, then a rename
/// publishes them, so readers never observe a partial table.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// `experiment_id,estimator,n,pfa_target_or_scr_db,trials,hits,empirical_rate,seed`
///
/// `trials` counts the trials behind the rate (failed trials are excluded
/// from both numerator and denominator; the total is recoverable from the
/// manifest). Known-scatter baseline rows carry `n = inf`.
pub fn pfa_csv(rows: &[PfaRow], seed: u64) -> String {
    let mut out = String::from("experiment_id,estimator,n,pfa_target_or_scr_db,trials,hits,empirical_rate,seed\n");
    for r in rows {
        let n = r.n.map(|v| v.to_string()).unwrap_or_else(|| "inf".to_string());
        let _ = writeln!(
            out,
            "pfa,{},{},{},{},{},{},{}",
            r.estimator,
            n,
            r.pfa_target,
            r.trials - r.failures,
            r.hits,
            r.empirical_pfa,
            seed
        );
    }
    out
}

/// PD rows flatten into the same schema, one row per (estimator, SCR).
pub fn pd_csv(rows: &[PdRow], n_secondary: usize, seed: u64) -> String {
    let mut out = String::from("experiment_id,estimator,n,pfa_target_or_scr_db,trials,hits,empirical_rate,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "pd,regtyl,{},{},{},{},{},{}",
            n_secondary,
            r.scr_db,
            r.trials - r.failures,
            r.hits_adaptive,
            r.pd_adaptive,
            seed
        );
        let _ = writeln!(
            out,
            "pd,known,inf,{},{},{},{},{}",
            r.scr_db, r.trials, r.hits_known, r.pd_known, seed
        );
    }
    out
}

/// `rho,n,estimator,alpha,mean_d2,stderr,trials,seed`; the Tyler rows carry
/// an empty `alpha` field.
pub fn shape_csv(rows: &[ShapeRow], seed: u64) -> String {
    let mut out = String::from("rho,n,estimator,alpha,mean_d2,stderr,trials,seed\n");
    for r in rows {
        let alpha = r.alpha.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.rho, r.n, r.estimator, alpha, r.mean_d2, r.stderr, r.trials, seed
        );
    }
    out
}

/// One row per (rho, n) cell with the exact oracle weight and, when swept,
/// the Monte-Carlo minimizer of the CWH curve.
pub fn shape_markers_csv(markers: &[ShapeMarker], seed: u64) -> String {
    let mut out = String::from("rho,n,alpha_oracle,cwh_alpha_mc_min,seed\n");
    for m in markers {
        let mc = m.cwh_alpha_mc_min.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", m.rho, m.n, m.alpha_oracle, mc, seed);
    }
    out
}

/// FNV-1a hash of the config text, recorded in the manifest so reruns can be
/// matched to their configuration.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub struct ManifestInfo<'a> {
    pub experiment: &'a str,
    pub config_text: &'a str,
    pub master_seed: u64,
    pub threads: usize,
    pub wall_seconds: f64,
    pub outputs: &'a [PathBuf],
}

pub fn manifest(info: &ManifestInfo<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment = {}", info.experiment);
    let _ = writeln!(out, "config_hash = {:016x}", config_hash(info.config_text));
    let _ = writeln!(out, "master_seed = {}", info.master_seed);
    let _ = writeln!(out, "threads = {}", info.threads);
    let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "wall_time_s = {:.3}", info.wall_seconds);
    for p in info.outputs {
        let _ = writeln!(out, "output = {}", p.display());
    }
    out
}
