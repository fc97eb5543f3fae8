//! Experiment configuration: a flat INI-style file with one section naming
//! the experiment and `key = value` lines inside it.
//!
//! ```text
//! [pfa]
//! p = 8
//! nu = 4.5
//! n_list = 8,16,32
//! pfa_targets = 0.001,0.005,0.01,0.05,0.1,0.2
//! estimators = tyl,glc,regtyl,cwh
//! trials = 2000
//! master_seed = 42
//! ```
//!
//! Numeric lists are comma-separated; grids may also be written as
//! `start:step:end` ranges. Unknown sections or keys are rejected, and all
//! validation problems are reported in one pass.

use std::collections::BTreeMap;

use scattershrink_core::experiments::pd::PdConfig;
use scattershrink_core::experiments::pfa::PfaConfig;
use scattershrink_core::experiments::shape::{ShapeEstimator, ShapeSweepConfig};
use scattershrink_core::experiments::{EstimatorKind, SolverSettings};
use scattershrink_core::sampling::CesKind;

use crate::error::CliError;

/// A parsed experiment description, before seed/trials overrides.
#[derive(Debug, Clone)]
pub enum Experiment {
    Pfa(PfaConfig),
    Pd(PdConfig),
    ShapeSweep(ShapeSweepConfig),
    Estimate(EstimateSpec),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Pfa(_) => "pfa",
            Experiment::Pd(_) => "pd",
            Experiment::ShapeSweep(_) => "shape_sweep",
            Experiment::Estimate(_) => "estimate",
        }
    }
}

/// An estimator invocation on a data file, runnable from a config.
#[derive(Debug, Clone)]
pub struct EstimateSpec {
    pub input: String,
    pub estimator: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub plugin_alpha: bool,
}

/// Paper-scale trial counts used by `--full-fidelity`.
fn full_fidelity_trials(kind: &str) -> usize {
    match kind {
        "pfa" => 10_000,
        "pd" => 5_000,
        _ => 1_000,
    }
}

/// Desk-scale defaults.
fn default_trials(kind: &str) -> usize {
    match kind {
        "pfa" => 2_000,
        "pd" => 1_000,
        _ => 200,
    }
}

struct Section {
    name: String,
    entries: BTreeMap<String, (usize, String)>, // key -> (line, value)
}

fn parse_ini(text: &str) -> Result<Section, Vec<String>> {
    let mut problems = Vec::new();
    let mut section: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let linen = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if section.is_some() {
                problems.push(format!("line {linen}: more than one experiment section"));
            } else {
                section = Some(Section { name: name.trim().to_string(), entries: BTreeMap::new() });
            }
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => match section.as_mut() {
                Some(s) => {
                    let key = k.trim().to_string();
                    if s.entries.insert(key.clone(), (linen, v.trim().to_string())).is_some() {
                        problems.push(format!("line {linen}: duplicate key '{key}'"));
                    }
                }
                None => problems.push(format!("line {linen}: key before any [section]")),
            },
            None => problems.push(format!("line {linen}: expected 'key = value'")),
        }
    }
    match section {
        Some(s) if problems.is_empty() => Ok(s),
        Some(_) | None => {
            if section.is_none() {
                problems.push("no experiment section found".to_string());
            }
            Err(problems)
        }
    }
}

/// Typed accessors that accumulate problems instead of failing fast.
struct Fields {
    entries: BTreeMap<String, (usize, String)>,
    problems: Vec<String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.take(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.problems.push(format!("{key} = '{raw}' is not {what}"));
                None
            }
        }
    }

    fn f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let raw = self.take(key)?;
        match parse_grid(&raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.problems.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn usize_list(&mut self, key: &str) -> Option<Vec<usize>> {
        let raw = self.take(key)?;
        let mut out = Vec::new();
        for part in raw.split(',') {
            match part.trim().parse::<usize>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.problems.push(format!("{key}: '{part}' is not a positive integer"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn bool(&mut self, key: &str) -> Option<bool> {
        let raw = self.take(key)?;
        match raw.as_str() {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            _ => {
                self.problems.push(format!("{key} = '{raw}' is not a boolean"));
                None
            }
        }
    }

    fn reject_leftovers(&mut self) {
        for key in self.entries.keys() {
            self.problems.push(format!("unknown key '{key}'"));
        }
    }
}

/// Parse `a,b,c` or `start:step:end` into a float list.
pub fn parse_grid(raw: &str) -> Result<Vec<f64>, String> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{raw}' is not start:step:end"));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|s| s.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|_| format!("'{raw}' has non-numeric range bounds"))?;
        let (start, step, end) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || end < start {
            return Err(format!("'{raw}' is not an increasing range"));
        }
        let count = ((end - start) / step + 1.5).floor() as usize;
        return Ok((0..count).map(|i| start + step * i as f64).filter(|&x| x <= end + step * 1e-9).collect());
    }
    let mut out = Vec::new();
    for part in raw.split(',') {
        out.push(
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{part}' is not a number"))?,
        );
    }
    Ok(out)
}

fn parse_estimators(raw: &str, problems: &mut Vec<String>) -> Vec<EstimatorKind> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        match part.trim() {
            "tyl" | "tyler" => out.push(EstimatorKind::Tyler),
            "glc" => out.push(EstimatorKind::Glc),
            "regtyl" => out.push(EstimatorKind::RegTyler),
            "cwh" => out.push(EstimatorKind::Cwh),
            other => problems.push(format!("estimators: unknown estimator '{other}'")),
        }
    }
    out
}

fn parse_shape_estimators(raw: &str, problems: &mut Vec<String>) -> Vec<ShapeEstimator> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        match part.trim() {
            "tyl" | "tyler" => out.push(ShapeEstimator::Tyler),
            "regtyl" => out.push(ShapeEstimator::RegTyler),
            "cwh" => out.push(ShapeEstimator::Cwh),
            other => problems.push(format!("estimators: unknown estimator '{other}'")),
        }
    }
    out
}

/// Overrides supplied on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub trials: Option<usize>,
    pub full_fidelity: bool,
}

/// Parse and validate a config file's text.
///
/// The master seed resolves in priority order: `--seed`, the config's
/// `master_seed`, the `SCATTERSHRINK_SEED` environment variable, then 0.
pub fn parse_experiment(text: &str, overrides: &Overrides) -> Result<Experiment, CliError> {
    let section = parse_ini(text).map_err(CliError::Config)?;
    let kind = section.name.clone();
    let mut f = Fields { entries: section.entries, problems: Vec::new() };

    let env_seed = std::env::var("SCATTERSHRINK_SEED").ok().and_then(|s| s.parse::<u64>().ok());
    let seed_from_cfg = f.parse::<u64>("master_seed", "an unsigned integer");
    let master_seed = overrides.master_seed.or(seed_from_cfg).or(env_seed).unwrap_or(0);
    let trials = overrides
        .trials
        .or(f.parse::<usize>("trials", "a positive integer"))
        .unwrap_or(if overrides.full_fidelity {
            full_fidelity_trials(&kind)
        } else {
            default_trials(&kind)
        });

    let tol = f.parse::<f64>("tol", "a number").unwrap_or(1e-9);
    let max_iter = f.parse::<usize>("max_iter", "a positive integer").unwrap_or(0);

    let experiment = match kind.as_str() {
        "pfa" => {
            let dim = f.parse::<usize>("p", "a positive integer").unwrap_or(8);
            let nu = f.parse::<f64>("nu", "a number").unwrap_or(4.5);
            let clutter = match f.take("clutter").as_deref() {
                None | Some("kdist") => CesKind::KDist { nu },
                Some("normal") => CesKind::ComplexNormal,
                Some(other) => {
                    f.problems.push(format!("clutter = '{other}' (expected kdist or normal)"));
                    CesKind::ComplexNormal
                }
            };
            let n_list = f.usize_list("n_list").unwrap_or_else(|| vec![8, 16, 32]);
            let pfa_targets = f
                .f64_list("pfa_targets")
                .unwrap_or_else(|| vec![0.001, 0.005, 0.01, 0.05, 0.1, 0.2]);
            let estimators = match f.take("estimators") {
                Some(raw) => parse_estimators(&raw, &mut f.problems),
                None => vec![
                    EstimatorKind::Tyler,
                    EstimatorKind::Glc,
                    EstimatorKind::RegTyler,
                    EstimatorKind::Cwh,
                ],
            };
            let include_known_baseline = f.bool("known_baseline").unwrap_or(true);
            validate_pfa(&mut f, dim, nu, &n_list, &pfa_targets);
            Experiment::Pfa(PfaConfig {
                dim,
                clutter,
                n_list,
                pfa_targets,
                estimators,
                trials,
                master_seed,
                include_known_baseline,
                solver: SolverSettings {
                    tol,
                    max_iter: if max_iter == 0 { 1000 } else { max_iter },
                },
            })
        }
        "pd" => {
            let dim = f.parse::<usize>("p", "a positive integer").unwrap_or(8);
            let nu = f.parse::<f64>("nu", "a number").unwrap_or(4.5);
            let n_secondary = f.parse::<usize>("n", "a positive integer").unwrap_or(16);
            let pfa_target = f.parse::<f64>("pfa_target", "a number").unwrap_or(0.01);
            let scr_grid_db = f.f64_list("scr_db").unwrap_or_else(|| {
                (-20..=20).map(|d| d as f64).collect()
            });
            if dim < 2 {
                f.problems.push("p must be at least 2".into());
            }
            if !(nu > 0.0) {
                f.problems.push("nu must be positive".into());
            }
            if n_secondary == 0 {
                f.problems.push("n must be positive".into());
            }
            if !(pfa_target > 0.0 && pfa_target < 1.0) {
                f.problems.push("pfa_target must lie in (0, 1)".into());
            }
            Experiment::Pd(PdConfig {
                dim,
                nu,
                n_secondary,
                pfa_target,
                scr_grid_db,
                trials,
                master_seed,
                solver: SolverSettings {
                    tol,
                    max_iter: if max_iter == 0 { 1000 } else { max_iter },
                },
            })
        }
        "shape_sweep" => {
            let dim = f.parse::<usize>("p", "a positive integer").unwrap_or(12);
            let rho_list = f.f64_list("rho_list").unwrap_or_else(|| vec![0.05, 0.5, 0.8]);
            let n_list = f.usize_list("n_list").unwrap_or_else(|| vec![24, 48]);
            let alpha_grid = f
                .f64_list("alpha_grid")
                .unwrap_or_else(|| (1..100).map(|i| i as f64 / 100.0).collect());
            let estimators = match f.take("estimators") {
                Some(raw) => parse_shape_estimators(&raw, &mut f.problems),
                None => vec![ShapeEstimator::Tyler, ShapeEstimator::RegTyler, ShapeEstimator::Cwh],
            };
            for (i, &r) in rho_list.iter().enumerate() {
                if !(r > 0.0 && r < 1.0) {
                    f.problems.push(format!("rho_list[{i}] = {r} outside (0, 1)"));
                }
            }
            for (i, &a) in alpha_grid.iter().enumerate() {
                if !(a > 0.0 && a < 1.0) {
                    f.problems.push(format!("alpha_grid[{i}] = {a} outside (0, 1)"));
                }
            }
            if n_list.contains(&0) {
                f.problems.push("n_list entries must be positive".into());
            }
            if dim < 2 {
                f.problems.push("p must be at least 2".into());
            }
            Experiment::ShapeSweep(ShapeSweepConfig {
                dim,
                rho_list,
                n_list,
                alpha_grid,
                estimators,
                trials,
                master_seed,
                solver: SolverSettings {
                    tol: if tol == 1e-9 { 1e-6 } else { tol },
                    max_iter: if max_iter == 0 { 30_000 } else { max_iter },
                },
            })
        }
        "estimate" => {
            let input = f.take("input").unwrap_or_default();
            if input.is_empty() {
                f.problems.push("estimate needs an input file".into());
            }
            let estimator = f.take("estimator").unwrap_or_else(|| "regtyl".into());
            Experiment::Estimate(EstimateSpec {
                input,
                estimator,
                alpha: f.parse::<f64>("alpha", "a number"),
                beta: f.parse::<f64>("beta", "a number"),
                q: f.parse::<f64>("q", "a number"),
                tol,
                max_iter: if max_iter == 0 { 1000 } else { max_iter },
                plugin_alpha: f.bool("plugin_alpha").unwrap_or(false),
            })
        }
        other => {
            return Err(CliError::Config(vec![format!(
                "unknown experiment section '[{other}]' (expected pfa, pd, shape_sweep or estimate)"
            )]));
        }
    };

    f.reject_leftovers();
    if !f.problems.is_empty() {
        return Err(CliError::Config(f.problems));
    }
    Ok(experiment)
}

fn validate_pfa(f: &mut Fields, dim: usize, nu: f64, n_list: &[usize], targets: &[f64]) {
    if dim < 2 {
        f.problems.push("p must be at least 2".into());
    }
    if !(nu > 0.0) {
        f.problems.push("nu must be positive".into());
    }
    if n_list.is_empty() || n_list.contains(&0) {
        f.problems.push("n_list must contain positive sample sizes".into());
    }
    for (i, &t) in targets.iter().enumerate() {
        if !(t > 0.0 && t < 1.0) {
            f.problems.push(format!("pfa_targets[{i}] = {t} outside (0, 1)"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_pfa_config() {
        let text = "[pfa]\np = 8\ntrials = 100\nmaster_seed = 7\n";
        let exp = parse_experiment(text, &Overrides::default()).unwrap();
        match exp {
            Experiment::Pfa(cfg) => {
                assert_eq!(cfg.dim, 8);
                assert_eq!(cfg.trials, 100);
                assert_eq!(cfg.master_seed, 7);
                assert_eq!(cfg.n_list, vec![8, 16, 32]);
                assert!(cfg.include_known_baseline);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_lists_every_problem() {
        let text = "[pfa]\np = 1\nnu = -2\nwhatever = 3\npfa_targets = 0.5,1.5\n";
        let err = parse_experiment(text, &Overrides::default()).unwrap_err();
        match err {
            CliError::Config(problems) => {
                let joined = problems.join("\n");
                assert!(joined.contains("p must be at least 2"), "{joined}");
                assert!(joined.contains("nu must be positive"), "{joined}");
                assert!(joined.contains("unknown key 'whatever'"), "{joined}");
                assert!(joined.contains("pfa_targets[1]"), "{joined}");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn range_grids_expand() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_grid("0.1:0.1:0.5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.5).abs() < 1e-12);
        assert!(parse_grid("5:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn shape_rejects_bad_alpha_grid() {
        let text = "[shape_sweep]\nalpha_grid = 0,0.5\n";
        assert!(matches!(
            parse_experiment(text, &Overrides::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn seed_priority_is_flag_config_env() {
        let text = "[pd]\nmaster_seed = 5\ntrials = 1\n";
        let with_flag = parse_experiment(
            text,
            &Overrides { master_seed: Some(9), ..Default::default() },
        )
        .unwrap();
        match with_flag {
            Experiment::Pd(cfg) => assert_eq!(cfg.master_seed, 9),
            _ => unreachable!(),
        }
        let from_cfg = parse_experiment(text, &Overrides::default()).unwrap();
        match from_cfg {
            Experiment::Pd(cfg) => assert_eq!(cfg.master_seed, 5),
            _ => unreachable!(),
        }
    }

    #[test]
    fn full_fidelity_scales_default_trials() {
        let text = "[shape_sweep]\n";
        let desk = parse_experiment(text, &Overrides::default()).unwrap();
        let full = parse_experiment(
            text,
            &Overrides { full_fidelity: true, ..Default::default() },
        )
        .unwrap();
        match (desk, full) {
            (Experiment::ShapeSweep(a), Experiment::ShapeSweep(b)) => {
                assert_eq!(a.trials, 200);
                assert_eq!(b.trials, 1000);
            }
            _ => unreachable!(),
        }
    }
}
