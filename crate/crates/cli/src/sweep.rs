//! Sweep execution: the Cartesian product of algorithms, sizes, budgets and
//! seeds, each cell run in three modes (energy, lifetime, stress). Results
//! stream to `results.csv` in a deterministic order; completed cells are
//! skipped on resume.

use crate::config::{ExperimentConfig, RunMode, SizeSpec};
use anyhow::{anyhow, Context, Result};
use daaca_core::metrics::MetricsReport;
use daaca_core::sim::{Algorithm, Simulation};
use rayon::prelude::*;
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: &str = "algorithm,n,width,length,packets,seed,metric,round,value";

/// One emitted measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub n: usize,
    pub width: f64,
    pub length: f64,
    pub packets: u64,
    pub seed: u64,
    pub metric: String,
    pub round: Option<u64>,
    pub value: f64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.n,
            self.width,
            self.length,
            self.packets,
            self.seed,
            self.metric,
            self.round.map(|r| r.to_string()).unwrap_or_default(),
            self.value
        )
    }

    pub fn parse(line: &str) -> Result<ResultRow> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 9 {
            return Err(anyhow!("expected 9 fields, got {}: {line}", parts.len()));
        }
        Ok(ResultRow {
            algorithm: parts[0].to_string(),
            n: parts[1].parse().context("n")?,
            width: parts[2].parse().context("width")?,
            length: parts[3].parse().context("length")?,
            packets: parts[4].parse().context("packets")?,
            seed: parts[5].parse().context("seed")?,
            metric: parts[6].to_string(),
            round: if parts[7].is_empty() {
                None
            } else {
                Some(parts[7].parse().context("round")?)
            },
            value: parts[8].parse().context("value")?,
        })
    }
}

/// One sweep cell: a unique (algorithm, size, budget, seed) combination.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub size: SizeSpec,
    pub budget: u64,
    pub seed: u64,
}

impl Cell {
    fn key(&self) -> CellKey {
        (
            self.algorithm.slug().to_string(),
            self.size.n,
            self.budget,
            self.seed,
        )
    }
}

type CellKey = (String, usize, u64, u64);

/// Expands the configured grid in deterministic order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &size in &cfg.sizes {
            for &budget in &cfg.budgets {
                for &seed in &cfg.seeds {
                    out.push(Cell {
                        algorithm,
                        size,
                        budget,
                        seed,
                    });
                }
            }
        }
    }
    out
}

/// Sentinel metric marking a completed mode within a cell.
fn sentinel(mode: RunMode) -> String {
    format!("run_complete_{}", mode.slug())
}

/// Rows for one completed run.
fn report_rows(cell: &Cell, mode: RunMode, report: &MetricsReport) -> Vec<ResultRow> {
    let base = |metric: &str, round: Option<u64>, value: f64| ResultRow {
        algorithm: cell.algorithm.slug().to_string(),
        n: cell.size.n,
        width: cell.size.width,
        length: cell.size.length,
        packets: cell.budget,
        seed: cell.seed,
        metric: metric.to_string(),
        round,
        value,
    };
    let mut rows = Vec::new();
    match mode {
        RunMode::Energy => {
            rows.push(base("avg_remaining_energy", None, report.avg_remaining));
            rows.push(base(
                "avg_remaining_energy_with_sink",
                None,
                report.avg_remaining_with_sink,
            ));
            rows.push(base("energy_difference", None, report.energy_difference));
            rows.push(base(
                "energy_difference_with_sink",
                None,
                report.energy_difference_with_sink,
            ));
            if let Some(d) = report.avg_degree {
                rows.push(base("avg_degree", None, d));
            }
            if let Some(r) = report.avg_tx_radius {
                rows.push(base("avg_tx_radius", None, r));
            }
            rows.push(base("delivered", None, report.delivered as f64));
            rows.push(base("dropped", None, report.dropped as f64));
            rows.push(base("rounds_executed", None, report.rounds_executed as f64));
            rows.push(base("energy_spent", None, report.total_energy_spent));
            if let Some(r) = report.sink_exhaust_round {
                rows.push(base("sink_exhaust_round", None, r as f64));
            }
            for point in &report.series {
                rows.push(base(
                    "avg_remaining_energy",
                    Some(point.round),
                    point.avg_remaining,
                ));
                rows.push(base(
                    "energy_difference",
                    Some(point.round),
                    point.energy_difference,
                ));
            }
        }
        RunMode::Lifetime => {
            if let Some(lt) = report.lifetime {
                rows.push(base("lifetime_rounds", None, lt.round as f64));
                rows.push(base("lifetime_censored", None, lt.censored as u8 as f64));
            }
            if let Some(r) = report.sink_exhaust_round {
                rows.push(base("lifetime_sink_exhaust_round", None, r as f64));
            }
        }
        RunMode::Stress => {
            if let Some(ratio) = report.hop_success_ratio {
                rows.push(base("hop_success_ratio", None, ratio));
            }
            rows.push(base("stress_delivered", None, report.delivered as f64));
            rows.push(base("stress_dropped", None, report.dropped as f64));
        }
    }
    rows.push(base(&sentinel(mode), None, 1.0));
    rows
}

/// Executes one cell across all modes. Panics inside a run are captured as
/// error rows so the sweep continues.
fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> (Vec<ResultRow>, bool) {
    let mut rows = Vec::new();
    let mut failed = false;
    for mode in RunMode::ALL {
        let sim_cfg = cfg.sim_config(cell.algorithm, cell.size, cell.budget, mode);
        let warn_isolated = mode == RunMode::Energy;
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut sim = Simulation::new(sim_cfg, cell.seed)?;
            if warn_isolated && !sim.isolated_nodes().is_empty() {
                eprintln!(
                    "warning: isolated nodes {:?} [n={} seed={}]; their packets will drop",
                    sim.isolated_nodes(),
                    cell.size.n,
                    cell.seed
                );
            }
            Ok::<MetricsReport, daaca_core::net::NetError>(sim.run_to_completion().0)
        }));
        match outcome {
            Ok(Ok(report)) => rows.extend(report_rows(cell, mode, &report)),
            Ok(Err(err)) => {
                eprintln!(
                    "run error [{} n={} seed={} {}]: {err}",
                    cell.algorithm.slug(),
                    cell.size.n,
                    cell.seed,
                    mode.slug()
                );
                rows.push(ResultRow {
                    algorithm: cell.algorithm.slug().to_string(),
                    n: cell.size.n,
                    width: cell.size.width,
                    length: cell.size.length,
                    packets: cell.budget,
                    seed: cell.seed,
                    metric: format!("run_error_{}", mode.slug()),
                    round: None,
                    value: 1.0,
                });
                failed = true;
            }
            Err(_) => {
                eprintln!(
                    "run panicked [{} n={} seed={} {}]",
                    cell.algorithm.slug(),
                    cell.size.n,
                    cell.seed,
                    mode.slug()
                );
                rows.push(ResultRow {
                    algorithm: cell.algorithm.slug().to_string(),
                    n: cell.size.n,
                    width: cell.size.width,
                    length: cell.size.length,
                    packets: cell.budget,
                    seed: cell.seed,
                    metric: format!("run_error_{}", mode.slug()),
                    round: None,
                    value: 1.0,
                });
                failed = true;
            }
        }
    }
    (rows, failed)
}

/// Reads completed cell keys from an existing results file.
fn completed_cells(path: &Path) -> Result<HashSet<CellKey>> {
    let mut done: HashSet<CellKey> = HashSet::new();
    if !path.exists() {
        return Ok(done);
    }
    let text = std::fs::read_to_string(path)?;
    let mut seen: std::collections::HashMap<CellKey, u8> = std::collections::HashMap::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let Ok(row) = ResultRow::parse(line) else {
            continue;
        };
        let flag = match row.metric.as_str() {
            "run_complete_energy" => 1u8,
            "run_complete_lifetime" => 2,
            "run_complete_stress" => 4,
            _ => 0,
        };
        if flag != 0 {
            *seen
                .entry((row.algorithm.clone(), row.n, row.packets, row.seed))
                .or_default() |= flag;
        }
    }
    for (key, mask) in seen {
        if mask == 7 {
            done.insert(key);
        }
    }
    Ok(done)
}

pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: usize,
    pub executed: usize,
    pub skipped: usize,
}

/// Runs the sweep, appending to `results.csv` under `out_dir`. Cells already
/// complete in the file are skipped; fresh results are written in
/// deterministic cell order (chunked so output appears incrementally).
/// Returns all rows (existing plus new) for figure emission.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path, quiet: bool) -> Result<SweepOutcome> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let csv_path = out_dir.join("results.csv");
    let done = completed_cells(&csv_path)?;

    let all_cells = cells(cfg);
    let todo: Vec<Cell> = all_cells
        .iter()
        .filter(|c| !done.contains(&c.key()))
        .copied()
        .collect();
    let skipped = all_cells.len() - todo.len();
    if !quiet && skipped > 0 {
        eprintln!(
            "resume: {skipped} cells already complete, {} to run",
            todo.len()
        );
    }

    let fresh_file = !csv_path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&csv_path)
        .with_context(|| format!("opening {}", csv_path.display()))?;
    if fresh_file {
        writeln!(file, "{CSV_HEADER}")?;
    }

    let mut failures = 0usize;
    let chunk_size = rayon::current_num_threads().max(1) * 4;
    let total = todo.len();
    let mut completed = 0usize;
    for chunk in todo.chunks(chunk_size.max(1)) {
        let results: Vec<(Vec<ResultRow>, bool)> =
            chunk.par_iter().map(|cell| run_cell(cfg, cell)).collect();
        for (rows, failed) in results {
            if failed {
                failures += 1;
            }
            for row in &rows {
                writeln!(file, "{}", row.to_csv())?;
            }
        }
        completed += chunk.len();
        if !quiet {
            eprintln!("progress: {completed}/{total} cells");
        }
    }
    file.flush()?;

    // Full row set for figures, re-read from disk. A sweep interrupted
    // mid-cell leaves rows without completion sentinels and the cell gets
    // recomputed on resume, so duplicates keep only the latest value.
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut index: std::collections::HashMap<
        (String, usize, u64, u64, String, Option<u64>),
        usize,
    > = std::collections::HashMap::new();
    let text = std::fs::read_to_string(&csv_path)?;
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(row) = ResultRow::parse(line) {
            let key = (
                row.algorithm.clone(),
                row.n,
                row.packets,
                row.seed,
                row.metric.clone(),
                row.round,
            );
            match index.get(&key) {
                Some(&at) => rows[at] = row,
                None => {
                    index.insert(key, rows.len());
                    rows.push(row);
                }
            }
        }
    }

    Ok(SweepOutcome {
        rows,
        failures,
        executed: total,
        skipped,
    })
}
