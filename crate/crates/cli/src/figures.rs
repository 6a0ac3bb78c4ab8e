//! Plot-data emission: one delimited file per figure or table, seed-averaged,
//! one column (or row) per algorithm. Produces data files only; rendering is
//! left to external tooling.

use crate::config::ExperimentConfig;
use crate::sweep::ResultRow;
use anyhow::{bail, Result};
use daaca_core::sim::Algorithm;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// All emitted artifacts: figures 1-8 plus the two structure tables.
pub const FIGURES: [&str; 10] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table4", "table5",
];

struct Slice<'r> {
    rows: Vec<&'r ResultRow>,
}

impl<'r> Slice<'r> {
    fn of(rows: &'r [ResultRow], metric: &str) -> Self {
        Self {
            rows: rows
                .iter()
                .filter(|r| r.metric == metric && r.round.is_none())
                .collect(),
        }
    }

    fn mean_for(&self, algorithm: &str, pick: impl Fn(&ResultRow) -> bool) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm && pick(r))
            .map(|r| r.value)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

fn algorithms_in(cfg: &ExperimentConfig) -> Vec<&'static str> {
    cfg.algorithms.iter().map(Algorithm::slug).collect()
}

/// Seed-averaged value per (x, algorithm) written as a whitespace-delimited
/// table with a header row. Missing coverage is reported per cell.
fn grid_figure(
    name: &str,
    x_label: &str,
    xs: &[(String, Box<dyn Fn(&ResultRow) -> bool + '_>)],
    algorithms: &[&str],
    slice: &Slice,
) -> Result<String> {
    let mut missing = Vec::new();
    let mut out = String::new();
    write!(out, "{x_label}")?;
    for alg in algorithms {
        write!(out, "\t{alg}")?;
    }
    writeln!(out)?;
    for (x, pick) in xs {
        write!(out, "{x}")?;
        for alg in algorithms {
            match slice.mean_for(alg, pick) {
                Some(v) => write!(out, "\t{v}")?,
                None => {
                    missing.push(format!("({alg}, {x})"));
                    write!(out, "\tnan")?;
                }
            }
        }
        writeln!(out)?;
    }
    if !missing.is_empty() {
        bail!("{name}: missing cells {}", missing.join(", "));
    }
    Ok(out)
}

/// One seed-averaged scalar per algorithm.
fn per_algorithm_figure(
    name: &str,
    metric_label: &str,
    algorithms: &[&str],
    slice: &Slice,
) -> Result<String> {
    let mut missing = Vec::new();
    let mut out = String::new();
    writeln!(out, "algorithm\t{metric_label}")?;
    for alg in algorithms {
        match slice.mean_for(alg, |_| true) {
            Some(v) => writeln!(out, "{alg}\t{v}")?,
            None => {
                missing.push(format!("({alg}, all)"));
                writeln!(out, "{alg}\tnan")?;
            }
        }
    }
    if !missing.is_empty() {
        bail!("{name}: missing cells {}", missing.join(", "));
    }
    Ok(out)
}

/// Renders one figure from the row set. Figure names map to the reported
/// experiment suite: energy vs size/budget (1-3), energy difference (4-6),
/// lifetime (7), one-hop success (8), degree and radius tables.
pub fn render(name: &str, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<String> {
    let algorithms = algorithms_in(cfg);
    let max_budget = cfg.budgets.iter().copied().max().unwrap_or(0);
    let biggest = cfg
        .sizes
        .iter()
        .max_by_key(|s| s.n)
        .copied()
        .expect("validated config has sizes");

    let size_axis = || -> Vec<(String, Box<dyn Fn(&ResultRow) -> bool>)> {
        cfg.sizes
            .iter()
            .map(|s| {
                let n = s.n;
                (
                    n.to_string(),
                    Box::new(move |r: &ResultRow| r.n == n && r.packets == max_budget)
                        as Box<dyn Fn(&ResultRow) -> bool>,
                )
            })
            .collect()
    };
    let budget_axis = || -> Vec<(String, Box<dyn Fn(&ResultRow) -> bool>)> {
        cfg.budgets
            .iter()
            .map(|&b| {
                let n = biggest.n;
                (
                    b.to_string(),
                    Box::new(move |r: &ResultRow| r.n == n && r.packets == b)
                        as Box<dyn Fn(&ResultRow) -> bool>,
                )
            })
            .collect()
    };
    let largest_size_only = |r: &ResultRow| r.n == biggest.n && r.packets == max_budget;

    match name {
        "fig1" => grid_figure(
            name,
            "n",
            &size_axis(),
            &algorithms,
            &Slice::of(rows, "avg_remaining_energy"),
        ),
        "fig2" => grid_figure(
            name,
            "packets",
            &budget_axis(),
            &algorithms,
            &Slice::of(rows, "avg_remaining_energy"),
        ),
        "fig3" => per_algorithm_figure(
            name,
            "avg_remaining_energy",
            &algorithms,
            &Slice::of(rows, "avg_remaining_energy"),
        ),
        "fig4" => grid_figure(
            name,
            "n",
            &size_axis(),
            &algorithms,
            &Slice::of(rows, "energy_difference"),
        ),
        "fig5" => grid_figure(
            name,
            "packets",
            &budget_axis(),
            &algorithms,
            &Slice::of(rows, "energy_difference"),
        ),
        "fig6" => per_algorithm_figure(
            name,
            "energy_difference",
            &algorithms,
            &Slice::of(rows, "energy_difference"),
        ),
        "fig7" => per_algorithm_figure(
            name,
            "lifetime_rounds",
            &algorithms,
            &Slice::of(rows, "lifetime_rounds"),
        ),
        "fig8" => per_algorithm_figure(
            name,
            "hop_success_ratio",
            &algorithms,
            &Slice::of(rows, "hop_success_ratio"),
        ),
        "table4" => {
            let slice = Slice::of(rows, "avg_degree");
            let filtered = Slice {
                rows: slice
                    .rows
                    .iter()
                    .copied()
                    .filter(|r| largest_size_only(r))
                    .collect(),
            };
            per_algorithm_figure(name, "avg_degree", &algorithms, &filtered)
        }
        "table5" => {
            let slice = Slice::of(rows, "avg_tx_radius");
            let filtered = Slice {
                rows: slice
                    .rows
                    .iter()
                    .copied()
                    .filter(|r| largest_size_only(r))
                    .collect(),
            };
            per_algorithm_figure(name, "avg_tx_radius", &algorithms, &filtered)
        }
        other => bail!("unknown figure '{other}'"),
    }
}

/// Emits every figure into `out_dir` as `<name>.dat`. Returns per-figure
/// errors without aborting the rest.
pub fn emit_all(
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    out_dir: &Path,
) -> BTreeMap<String, Result<()>> {
    let mut outcomes = BTreeMap::new();
    for name in FIGURES {
        let outcome = render(name, cfg, rows).and_then(|text| {
            std::fs::write(out_dir.join(format!("{name}.dat")), text)?;
            Ok(())
        });
        outcomes.insert(name.to_string(), outcome);
    }
    outcomes
}
