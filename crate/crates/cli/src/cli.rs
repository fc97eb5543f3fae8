//! Argument parsing and top-level dispatch for the `scattershrink` binary.

use std::path::PathBuf;

use crate::config::{parse_experiment, EstimateSpec, Experiment, Overrides};
use crate::error::CliError;
use crate::parallel;
use crate::runner;

pub const USAGE: &str = "\
scattershrink — regularized scatter-matrix estimation and detection experiments

USAGE:
  scattershrink estimate --input <FILE> --estimator <NAME> [options]
  scattershrink run --config <FILE> [options]

ESTIMATE OPTIONS:
  --input <FILE>        sample file: one row per sample, re/im interleaved CSV
  --estimator <NAME>    scm | glc | tyler | regtyl | cwh | huber
  --alpha <A>           ridge weight (regtyl/cwh default: plug-in rule)
  --beta <B>            data weight (regtyl default: 1 - alpha; glc/huber: 1)
  --q <Q>               huber tuning fraction in (0, 1)
  --tol <T>             iteration tolerance (default 1e-9)
  --max-iter <N>        iteration cap (default 1000)
  --plugin-alpha        also report the plug-in shrinkage weight
  --output <FILE>       write the report to a file instead of stdout

RUN OPTIONS:
  --config <FILE>       experiment config ([pfa], [pd], [shape_sweep], [estimate])
  --output <DIR>        output directory (default: scattershrink-out)
  --seed <S>            master seed (overrides config; env SCATTERSHRINK_SEED
                        is the fallback when neither is given)
  --threads <N>         worker threads (default: logical cores; results do
                        not depend on this)
  --trials-override <N> replace the config's trial count
  --full-fidelity       paper-scale default trial counts

EXIT CODES: 0 success, 1 estimator/numeric failure, 2 input error
";

#[derive(Debug)]
pub enum Command {
    Estimate { spec: EstimateSpec, output: Option<PathBuf> },
    Run {
        config: PathBuf,
        output: PathBuf,
        overrides: Overrides,
        threads: usize,
    },
}

fn require_value<'a>(
    flag: &str,
    iter: &mut impl Iterator<Item = &'a String>,
) -> Result<String, CliError> {
    iter.next()
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("{flag} needs a value")))
}

fn parse_num<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<T, CliError> {
    raw.parse::<T>()
        .map_err(|_| CliError::Usage(format!("{flag} = '{raw}' is not valid")))
}

pub fn parse_args(args: &[String]) -> Result<Command, CliError> {
    let mut iter = args.iter();
    let sub = iter
        .next()
        .ok_or_else(|| CliError::Usage("missing subcommand (estimate or run)".to_string()))?;
    match sub.as_str() {
        "estimate" => {
            let mut input = None;
            let mut estimator = None;
            let mut alpha = None;
            let mut beta = None;
            let mut q = None;
            let mut tol = 1e-9;
            let mut max_iter = 1000;
            let mut plugin = false;
            let mut output = None;
            while let Some(flag) = iter.next() {
                match flag.as_str() {
                    "--input" => input = Some(require_value(flag, &mut iter)?),
                    "--estimator" => estimator = Some(require_value(flag, &mut iter)?),
                    "--alpha" => alpha = Some(parse_num(flag, &require_value(flag, &mut iter)?)?),
                    "--beta" => beta = Some(parse_num(flag, &require_value(flag, &mut iter)?)?),
                    "--q" => q = Some(parse_num(flag, &require_value(flag, &mut iter)?)?),
                    "--tol" => tol = parse_num(flag, &require_value(flag, &mut iter)?)?,
                    "--max-iter" => max_iter = parse_num(flag, &require_value(flag, &mut iter)?)?,
                    "--plugin-alpha" => plugin = true,
                    "--output" => output = Some(PathBuf::from(require_value(flag, &mut iter)?)),
                    other => return Err(CliError::Usage(format!("unknown flag '{other}'"))),
                }
            }
            let input = input.ok_or_else(|| CliError::Usage("--input is required".to_string()))?;
            let estimator =
                estimator.ok_or_else(|| CliError::Usage("--estimator is required".to_string()))?;
            Ok(Command::Estimate {
                spec: EstimateSpec {
                    input,
                    estimator,
                    alpha,
                    beta,
                    q,
                    tol,
                    max_iter,
                    plugin_alpha: plugin,
                },
                output,
            })
        }
        "run" => {
            let mut config = None;
            let mut output = PathBuf::from("scattershrink-out");
            let mut overrides = Overrides::default();
            let mut threads = parallel::default_threads();
            while let Some(flag) = iter.next() {
                match flag.as_str() {
                    "--config" => config = Some(PathBuf::from(require_value(flag, &mut iter)?)),
                    "--output" => output = PathBuf::from(require_value(flag, &mut iter)?),
                    "--seed" => {
                        overrides.master_seed =
                            Some(parse_num(flag, &require_value(flag, &mut iter)?)?)
                    }
                    "--threads" => threads = parse_num(flag, &require_value(flag, &mut iter)?)?,
                    "--trials-override" => {
                        overrides.trials = Some(parse_num(flag, &require_value(flag, &mut iter)?)?)
                    }
                    "--full-fidelity" => overrides.full_fidelity = true,
                    other => return Err(CliError::Usage(format!("unknown flag '{other}'"))),
                }
            }
            let config =
                config.ok_or_else(|| CliError::Usage("--config is required".to_string()))?;
            Ok(Command::Run { config, output, overrides, threads })
        }
        "--help" | "-h" | "help" => Err(CliError::Usage(String::new())),
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

/// Parse arguments and execute; the caller turns errors into exit codes.
pub fn dispatch(args: &[String]) -> Result<(), CliError> {
    match parse_args(args)? {
        Command::Estimate { spec, output } => {
            let report = runner::run_estimate(&spec)?;
            match output {
                Some(path) => crate::csvout::write_atomic(&path, &report)?,
                None => print!("{report}"),
            }
            Ok(())
        }
        Command::Run { config, output, overrides, threads } => {
            let text = std::fs::read_to_string(&config)?;
            let experiment = parse_experiment(&text, &overrides)?;
            if let Experiment::Estimate(spec) = &experiment {
                // config-driven estimate honors the same report format
                let report = runner::run_estimate(spec)?;
                let path = output.join("estimate.csv");
                crate::csvout::write_atomic(&path, &report)?;
                println!("wrote {}", path.display());
                return Ok(());
            }
            let outcome = runner::run_experiment(&experiment, &text, &output, threads)?;
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}
