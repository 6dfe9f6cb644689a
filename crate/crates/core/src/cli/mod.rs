//! Command-line front end: every experiment is a subcommand taking a
//! plain-text config, writing CSV (and optional SVG) outputs plus a run
//! manifest with one PASS/FAIL row per check.
//!
//! Grammar: `reglab <experiment-id> --config <path> [--out <dir>]
//! [--seed <u64>] [--svg]`. Exit codes: 0 all checks pass, 1 check failure,
//! 2 validation error, 3 runtime error. `REGLAB_THREADS` caps the worker
//! pool.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigError, RawConfig, Reader};
pub use experiments::{parse_config, run, ExperimentConfig, EXPERIMENTS};
pub use output::{emit_plot, CheckRow, CsvDoc, RunManifest, Series};

use std::path::PathBuf;

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliArgs {
    pub experiment: String,
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

const USAGE: &str = "usage: reglab <experiment-id> --config <path> [--out <dir>] [--seed <u64>] [--svg]";

/// Parses the fixed CLI grammar; any deviation is a validation error.
pub fn parse_args(args: &[String]) -> Result<CliArgs, String> {
    if args.is_empty() {
        return Err(format!("{USAGE}\nexperiments: {}", EXPERIMENTS.join(", ")));
    }
    let experiment = args[0].clone();
    if !EXPERIMENTS.contains(&experiment.as_str()) {
        return Err(format!(
            "unknown experiment '{experiment}'\nexperiments: {}",
            EXPERIMENTS.join(", ")
        ));
    }
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut svg = false;
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                i += 1;
                config_path = Some(PathBuf::from(args.get(i).ok_or(USAGE)?));
            }
            "--out" => {
                i += 1;
                out_dir = Some(PathBuf::from(args.get(i).ok_or(USAGE)?));
            }
            "--seed" => {
                i += 1;
                let raw = args.get(i).ok_or(USAGE)?;
                seed = Some(raw.parse().map_err(|_| format!("bad --seed '{raw}'"))?);
            }
            "--svg" => svg = true,
            other => return Err(format!("unknown argument '{other}'\n{USAGE}")),
        }
        i += 1;
    }
    let config_path = config_path.ok_or(format!("--config is required\n{USAGE}"))?;
    Ok(CliArgs {
        out_dir: out_dir.unwrap_or_else(|| PathBuf::from(format!("{experiment}-out"))),
        experiment,
        config_path,
        seed: seed.unwrap_or(42),
        svg,
    })
}

/// Configures the rayon pool from `REGLAB_THREADS` (first call wins).
pub fn configure_threads() {
    if let Ok(v) = std::env::var("REGLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Full CLI entry: returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return 2;
        }
    };
    configure_threads();
    let text = match std::fs::read_to_string(&cli.config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config '{}': {e}", cli.config_path.display());
            return 2;
        }
    };
    let config = match parse_config(&cli.experiment, &text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("invalid configuration for '{}':", cli.experiment);
            for e in errors {
                eprintln!("  {e}");
            }
            return 2;
        }
    };
    match run(&config, &cli.experiment, &text, cli.seed, &cli.out_dir, cli.svg) {
        Ok(manifest) => {
            for check in &manifest.checks {
                println!(
                    "{}: {} ({})",
                    check.name,
                    if check.pass { "PASS" } else { "FAIL" },
                    check.detail
                );
            }
            println!(
                "wrote {} file(s) to {}",
                manifest.files.len() + 1,
                cli.out_dir.display()
            );
            if manifest.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("experiment '{}' failed: {e}", cli.experiment);
            3
        }
    }
}
