//! Experiment harness for the wireless sensor network data-aggregation
//! simulator. Runs sweeps over algorithms, network sizes, packet budgets and
//! seeds; writes `results.csv` plus per-figure data files.
//!
//! Exit codes: 0 success, 1 configuration error, 2 partial run failures.

mod config;
mod figures;
mod sweep;

use anyhow::Result;
use clap::Parser;
use config::{parse_algorithm_flag, parse_seed_flag, ExperimentConfig, Preset};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "daaca",
    about = "Round-based data aggregation simulator for wireless sensor networks"
)]
struct Args {
    /// TOML experiment config; defaults applied for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment scale preset: smoke, table3-small, paper-small, paper-full.
    #[arg(long)]
    preset: Option<String>,

    /// Comma-separated algorithm filter (e.g. "basic,acs,pedap").
    #[arg(long)]
    algorithms: Option<String>,

    /// Comma-separated seed list override.
    #[arg(long = "seed-list")]
    seed_list: Option<String>,

    /// Output directory for results.csv and figure data.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads for the sweep (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = &args.preset {
        Preset::parse(preset)?.apply(&mut cfg);
    }
    if let Some(list) = &args.algorithms {
        cfg.algorithms = parse_algorithm_flag(list)?;
    }
    if let Some(list) = &args.seed_list {
        cfg.seeds = parse_seed_flag(list)?;
    }
    if args.jobs > 0 {
        cfg.jobs = args.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("config error: {err}");
            return ExitCode::from(1);
        }
    };

    if cfg.jobs > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
        {
            eprintln!("config error: cannot build thread pool: {err}");
            return ExitCode::from(1);
        }
    }

    let outcome = match sweep::run_sweep(&cfg, &args.out, args.quiet) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("sweep error: {err}");
            return ExitCode::from(1);
        }
    };
    if !args.quiet {
        eprintln!(
            "sweep done: {} cells executed, {} skipped (resume), {} failures",
            outcome.executed, outcome.skipped, outcome.failures
        );
    }

    let mut figure_failures = 0usize;
    for (name, result) in figures::emit_all(&cfg, &outcome.rows, &args.out) {
        match result {
            Ok(()) => {
                if !args.quiet {
                    eprintln!("wrote {name}.dat");
                }
            }
            Err(err) => {
                eprintln!("figure {name}: {err}");
                figure_failures += 1;
            }
        }
    }

    if outcome.failures > 0 || figure_failures > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
