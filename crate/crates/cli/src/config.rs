//! Experiment configuration: TOML ingestion with strict key checking,
//! presets, and translation into per-run simulator configs.

use anyhow::{anyhow, bail, Result};
use daaca_core::baselines::aca::AcaConfig;
use daaca_core::routing::AlgorithmConfig;
use daaca_core::sim::{Algorithm, SimConfig, StopPolicy};
use daaca_core::{EnergyModel, SinkPlacement, Variant};
use std::path::Path;

/// One network size cell: field dimensions and node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeSpec {
    pub width: f64,
    pub length: f64,
    pub n: usize,
}

/// Full sweep description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub sizes: Vec<SizeSpec>,
    pub budgets: Vec<u64>,
    pub seeds: Vec<u64>,
    pub sources: usize,
    pub jobs: usize,

    pub e_tx_elec: f64,
    pub e_rx_elec: f64,
    pub eps_amp: f64,
    pub paper_literal_eps_amp: bool,
    pub packet_bits: u64,
    pub e_init: f64,
    pub lifetime_e_init: f64,
    pub lifetime_packet_budget: u64,

    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub zeta: f64,
    pub q0: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_init: f64,
    pub round_to_update: u64,
    /// 0 selects the calibrated deposit scale; any positive value is used
    /// literally (1 reproduces raw-joule deposits for audit).
    pub deposit_scale: f64,
    pub reset_times_on_sync: bool,
    pub all_time_best: bool,
    pub acs_clamp: bool,

    pub aca_delta: f64,
    pub rho_aca: f64,
    pub ehc_slack: u32,
    /// 0 defaults to round_to_update.
    pub idle_threshold: u64,

    pub range: f64,
    pub ctrl_bits: u64,
    pub topo_bits_per_node: u64,
    pub sink_placement: SinkPlacement,
    pub sink_mortal: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            sizes: vec![SizeSpec {
                width: 40.0,
                length: 50.0,
                n: 200,
            }],
            budgets: vec![1000],
            seeds: (1001..=1005).collect(),
            sources: 10,
            jobs: 0,
            e_tx_elec: 50e-9,
            e_rx_elec: 50e-9,
            eps_amp: 100e-12,
            paper_literal_eps_amp: false,
            packet_bits: 4098,
            e_init: 10.0,
            lifetime_e_init: 0.05,
            lifetime_packet_budget: 50_000,
            alpha: 2.0,
            beta: 2.0,
            rho: 0.2,
            zeta: 0.9,
            q0: 0.5,
            eta_min: 0.5,
            eta_max: 0.9,
            eta_init: 0.8,
            round_to_update: 100,
            deposit_scale: 0.0,
            reset_times_on_sync: true,
            all_time_best: false,
            acs_clamp: false,
            aca_delta: 0.05,
            rho_aca: 0.3,
            ehc_slack: 2,
            idle_threshold: 0,
            range: 10.0,
            ctrl_bits: 128,
            topo_bits_per_node: 16,
            sink_placement: SinkPlacement::Center,
            sink_mortal: false,
        }
    }
}

/// Named experiment scales. All desk-sized except the opt-in full grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Smoke,
    Table3Small,
    PaperSmall,
    PaperFull,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Preset> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smoke" => Ok(Preset::Smoke),
            "table3-small" => Ok(Preset::Table3Small),
            "paper-small" => Ok(Preset::PaperSmall),
            "paper-full" => Ok(Preset::PaperFull),
            other => {
                bail!("unknown preset '{other}' (smoke, table3-small, paper-small, paper-full)")
            }
        }
    }

    pub fn apply(self, cfg: &mut ExperimentConfig) {
        let table3_sizes = [
            (40.0, 50.0, 200),
            (60.0, 60.0, 400),
            (70.0, 80.0, 600),
            (80.0, 90.0, 800),
            (100.0, 100.0, 1000),
            (100.0, 120.0, 1200),
            (100.0, 140.0, 1400),
            (120.0, 130.0, 1600),
            (130.0, 120.0, 1800),
            (140.0, 140.0, 2000),
        ];
        let sizes = |specs: &[(f64, f64, usize)]| {
            specs
                .iter()
                .map(|&(width, length, n)| SizeSpec { width, length, n })
                .collect::<Vec<_>>()
        };
        match self {
            Preset::Smoke => {
                cfg.sizes = sizes(&table3_sizes[..1]);
                cfg.budgets = vec![1000];
                cfg.seeds = (1001..=1005).collect();
            }
            Preset::Table3Small => {
                cfg.sizes = sizes(&table3_sizes[..1]);
                cfg.budgets = vec![1000, 2000, 3000, 4000, 5000];
                cfg.seeds = (1001..=1005).collect();
            }
            Preset::PaperSmall => {
                cfg.sizes = sizes(&table3_sizes[..3]);
                cfg.budgets = vec![10_000];
                cfg.seeds = (1001..=1020).collect();
            }
            Preset::PaperFull => {
                cfg.sizes = sizes(&table3_sizes);
                cfg.budgets = vec![
                    1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 100_000,
                ];
                cfg.seeds = (1001..=1020).collect();
            }
        }
    }
}

/// Modes each sweep cell runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunMode {
    /// Full budget at the standard initial energy.
    Energy,
    /// Constrained energy, stop at the first non-sink death.
    Lifetime,
    /// Constrained energy, run the full budget to exercise hop failures.
    Stress,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::Energy, RunMode::Lifetime, RunMode::Stress];

    pub fn slug(&self) -> &'static str {
        match self {
            RunMode::Energy => "energy",
            RunMode::Lifetime => "lifetime",
            RunMode::Stress => "stress",
        }
    }
}

impl ExperimentConfig {
    /// Loads a TOML file over the defaults. Unknown keys are rejected with a
    /// closest-match suggestion; range violations name the field.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Value = text
            .parse()
            .map_err(|e| anyhow!("config parse error: {e}"))?;
        let mut cfg = ExperimentConfig::default();
        let Some(table) = value.as_table() else {
            bail!("config root must be a table");
        };

        const SECTIONS: [&str; 4] = ["experiment", "energy", "algorithm", "network"];
        for key in table.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                bail!("unknown section '{key}'{}", suggest(key, &SECTIONS));
            }
        }

        if let Some(section) = table.get("experiment") {
            let section = as_table(section, "experiment")?;
            const KEYS: [&str; 6] = ["algorithms", "sizes", "budgets", "seeds", "sources", "jobs"];
            check_keys(section, &KEYS, "experiment")?;
            if let Some(v) = section.get("algorithms") {
                cfg.algorithms = parse_algorithms(v)?;
            }
            if let Some(v) = section.get("sizes") {
                cfg.sizes = parse_sizes(v)?;
            }
            if let Some(v) = section.get("budgets") {
                cfg.budgets = parse_u64_list(v, "experiment.budgets")?;
            }
            if let Some(v) = section.get("seeds") {
                cfg.seeds = parse_u64_list(v, "experiment.seeds")?;
            }
            if let Some(v) = section.get("sources") {
                cfg.sources = parse_u64(v, "experiment.sources")? as usize;
            }
            if let Some(v) = section.get("jobs") {
                cfg.jobs = parse_u64(v, "experiment.jobs")? as usize;
            }
        }

        if let Some(section) = table.get("energy") {
            let section = as_table(section, "energy")?;
            const KEYS: [&str; 8] = [
                "e_tx_elec",
                "e_rx_elec",
                "eps_amp",
                "paper_literal_eps_amp",
                "packet_bits",
                "e_init",
                "lifetime_e_init",
                "lifetime_packet_budget",
            ];
            check_keys(section, &KEYS, "energy")?;
            set_f64(section, "e_tx_elec", &mut cfg.e_tx_elec)?;
            set_f64(section, "e_rx_elec", &mut cfg.e_rx_elec)?;
            set_f64(section, "eps_amp", &mut cfg.eps_amp)?;
            set_bool(
                section,
                "paper_literal_eps_amp",
                &mut cfg.paper_literal_eps_amp,
            )?;
            set_u64(section, "packet_bits", &mut cfg.packet_bits)?;
            set_f64(section, "e_init", &mut cfg.e_init)?;
            set_f64(section, "lifetime_e_init", &mut cfg.lifetime_e_init)?;
            set_u64(
                section,
                "lifetime_packet_budget",
                &mut cfg.lifetime_packet_budget,
            )?;
        }

        if let Some(section) = table.get("algorithm") {
            let section = as_table(section, "algorithm")?;
            const KEYS: [&str; 17] = [
                "alpha",
                "beta",
                "rho",
                "zeta",
                "q0",
                "eta_min",
                "eta_max",
                "eta_init",
                "round_to_update",
                "deposit_scale",
                "reset_times_on_sync",
                "all_time_best",
                "acs_clamp",
                "aca_delta",
                "rho_aca",
                "ehc_slack",
                "idle_threshold",
            ];
            check_keys(section, &KEYS, "algorithm")?;
            set_f64(section, "alpha", &mut cfg.alpha)?;
            set_f64(section, "beta", &mut cfg.beta)?;
            set_f64(section, "rho", &mut cfg.rho)?;
            set_f64(section, "zeta", &mut cfg.zeta)?;
            set_f64(section, "q0", &mut cfg.q0)?;
            set_f64(section, "eta_min", &mut cfg.eta_min)?;
            set_f64(section, "eta_max", &mut cfg.eta_max)?;
            set_f64(section, "eta_init", &mut cfg.eta_init)?;
            set_u64(section, "round_to_update", &mut cfg.round_to_update)?;
            set_f64(section, "deposit_scale", &mut cfg.deposit_scale)?;
            set_bool(section, "reset_times_on_sync", &mut cfg.reset_times_on_sync)?;
            set_bool(section, "all_time_best", &mut cfg.all_time_best)?;
            set_bool(section, "acs_clamp", &mut cfg.acs_clamp)?;
            set_f64(section, "aca_delta", &mut cfg.aca_delta)?;
            set_f64(section, "rho_aca", &mut cfg.rho_aca)?;
            let mut slack = cfg.ehc_slack as u64;
            set_u64(section, "ehc_slack", &mut slack)?;
            cfg.ehc_slack = slack as u32;
            set_u64(section, "idle_threshold", &mut cfg.idle_threshold)?;
        }

        if let Some(section) = table.get("network") {
            let section = as_table(section, "network")?;
            const KEYS: [&str; 5] = [
                "range",
                "ctrl_bits",
                "topo_bits_per_node",
                "sink_placement",
                "sink_mortal",
            ];
            check_keys(section, &KEYS, "network")?;
            set_f64(section, "range", &mut cfg.range)?;
            set_u64(section, "ctrl_bits", &mut cfg.ctrl_bits)?;
            set_u64(section, "topo_bits_per_node", &mut cfg.topo_bits_per_node)?;
            if let Some(v) = section.get("sink_placement") {
                let s = v
                    .as_str()
                    .ok_or_else(|| anyhow!("network.sink_placement must be a string"))?;
                cfg.sink_placement = match s {
                    "center" => SinkPlacement::Center,
                    "corner" => SinkPlacement::Corner,
                    "random" => SinkPlacement::Random,
                    other => {
                        bail!("network.sink_placement must be center|corner|random, got '{other}'")
                    }
                };
            }
            set_bool(section, "sink_mortal", &mut cfg.sink_mortal)?;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            bail!("experiment.algorithms must not be empty");
        }
        if self.sizes.is_empty() {
            bail!("experiment.sizes must not be empty");
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            bail!("experiment.budgets must be positive");
        }
        if self.seeds.is_empty() {
            bail!("experiment.seeds must not be empty");
        }
        for s in &self.sizes {
            if s.n < 2 {
                bail!("size n must be at least 2, got {}", s.n);
            }
            if !(s.width > 0.0 && s.length > 0.0) {
                bail!(
                    "size dimensions must be positive, got {}x{}",
                    s.width,
                    s.length
                );
            }
            if self.sources >= s.n {
                bail!("sources ({}) must be below n ({})", self.sources, s.n);
            }
        }
        if self.sources == 0 {
            bail!("sources must be at least 1");
        }
        check_range("rho", self.rho, 0.0, 1.0, false)?;
        check_range("zeta", self.zeta, 0.0, 1.0, false)?;
        check_range("q0", self.q0, 0.0, 1.0, true)?;
        check_range("rho_aca", self.rho_aca, 0.0, 1.0, false)?;
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            bail!("alpha and beta must be positive");
        }
        if !(self.eta_min > 0.0 && self.eta_min < self.eta_max) {
            bail!(
                "pheromone bounds must satisfy 0 < eta_min < eta_max, got [{}, {}]",
                self.eta_min,
                self.eta_max
            );
        }
        if !(self.eta_init > 0.0) {
            bail!("eta_init must be positive, got {}", self.eta_init);
        }
        if self.round_to_update == 0 {
            bail!("round_to_update must be at least 1");
        }
        if self.deposit_scale < 0.0 {
            bail!(
                "deposit_scale must be zero (calibrated) or positive, got {}",
                self.deposit_scale
            );
        }
        for (name, v) in [
            ("e_tx_elec", self.e_tx_elec),
            ("e_rx_elec", self.e_rx_elec),
            ("eps_amp", self.eps_amp),
            ("e_init", self.e_init),
            ("lifetime_e_init", self.lifetime_e_init),
            ("range", self.range),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be strictly positive, got {v}");
            }
        }
        if self.packet_bits == 0 || self.ctrl_bits == 0 {
            bail!("packet_bits and ctrl_bits must be positive");
        }
        Ok(())
    }

    /// Builds the simulator config for one cell and mode.
    pub fn sim_config(
        &self,
        algorithm: Algorithm,
        size: SizeSpec,
        budget: u64,
        mode: RunMode,
    ) -> SimConfig {
        let mut energy = EnergyModel {
            e_tx_elec: self.e_tx_elec,
            e_rx_elec: self.e_rx_elec,
            eps_amp: if self.paper_literal_eps_amp {
                100.0
            } else {
                self.eps_amp
            },
            packet_bits: self.packet_bits,
            e_init: self.e_init,
        };
        let (stop, packet_budget) = match mode {
            RunMode::Energy => (StopPolicy::Budget, budget),
            RunMode::Lifetime => {
                energy.e_init = self.lifetime_e_init;
                (StopPolicy::FirstDeath, self.lifetime_packet_budget)
            }
            RunMode::Stress => {
                energy.e_init = self.lifetime_e_init;
                (StopPolicy::Budget, budget)
            }
        };

        let variant = algorithm.daaca_variant().unwrap_or(Variant::Basic);
        let daaca = AlgorithmConfig {
            variant,
            alpha: self.alpha,
            beta: self.beta,
            rho: self.rho,
            zeta: self.zeta,
            q0: self.q0,
            eta_min: self.eta_min,
            eta_max: self.eta_max,
            eta_init: self.eta_init,
            round_to_update: self.round_to_update,
            deposit_scale: (self.deposit_scale > 0.0).then_some(self.deposit_scale),
            reset_times_on_sync: self.reset_times_on_sync,
            all_time_best: self.all_time_best,
            acs_clamp: self.acs_clamp,
        };
        let aca = AcaConfig {
            beta: self.beta,
            tau_init: self.eta_init,
            delta: self.aca_delta,
            rho_aca: self.rho_aca,
            idle_threshold: if self.idle_threshold == 0 {
                self.round_to_update
            } else {
                self.idle_threshold
            },
            ehc_slack: self.ehc_slack,
        };

        SimConfig {
            energy,
            ctrl_bits: self.ctrl_bits,
            topo_bits_per_node: self.topo_bits_per_node,
            range: self.range,
            width: size.width,
            length: size.length,
            n: size.n,
            n_sources: self.sources,
            sink_placement: self.sink_placement,
            sink_mortal: self.sink_mortal,
            algorithm,
            daaca,
            aca,
            packet_budget,
            stop,
            debug_checks: false,
        }
    }
}

fn as_table<'v>(v: &'v toml::Value, name: &str) -> Result<&'v toml::value::Table> {
    v.as_table()
        .ok_or_else(|| anyhow!("section '{name}' must be a table"))
}

fn check_keys(table: &toml::value::Table, known: &[&str], section: &str) -> Result<()> {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            bail!("unknown key '{section}.{key}'{}", suggest(key, known));
        }
    }
    Ok(())
}

fn suggest(key: &str, known: &[&str]) -> String {
    known
        .iter()
        .map(|k| (edit_distance(key, k), *k))
        .filter(|&(d, _)| d <= 2)
        .min()
        .map(|(_, k)| format!(" (did you mean '{k}'?)"))
        .unwrap_or_default()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            cur.push((prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64, inclusive: bool) -> Result<()> {
    let ok = if inclusive {
        v >= lo && v <= hi
    } else {
        v > lo && v < hi
    };
    if !ok {
        let bounds = if inclusive { "[0,1]" } else { "(0,1)" };
        bail!("{name} must be in {bounds}, got {v}");
    }
    Ok(())
}

fn parse_f64(v: &toml::Value, name: &str) -> Result<f64> {
    v.as_float()
        .or_else(|| v.as_integer().map(|i| i as f64))
        .ok_or_else(|| anyhow!("{name} must be a number"))
}

fn parse_u64(v: &toml::Value, name: &str) -> Result<u64> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as u64)
        .ok_or_else(|| anyhow!("{name} must be a non-negative integer"))
}

fn parse_u64_list(v: &toml::Value, name: &str) -> Result<Vec<u64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("{name} must be an array"))?
        .iter()
        .map(|x| parse_u64(x, name))
        .collect()
}

fn set_f64(table: &toml::value::Table, key: &str, slot: &mut f64) -> Result<()> {
    if let Some(v) = table.get(key) {
        *slot = parse_f64(v, key)?;
    }
    Ok(())
}

fn set_u64(table: &toml::value::Table, key: &str, slot: &mut u64) -> Result<()> {
    if let Some(v) = table.get(key) {
        *slot = parse_u64(v, key)?;
    }
    Ok(())
}

fn set_bool(table: &toml::value::Table, key: &str, slot: &mut bool) -> Result<()> {
    if let Some(v) = table.get(key) {
        *slot = v
            .as_bool()
            .ok_or_else(|| anyhow!("{key} must be a boolean"))?;
    }
    Ok(())
}

fn parse_algorithms(v: &toml::Value) -> Result<Vec<Algorithm>> {
    let list = v
        .as_array()
        .ok_or_else(|| anyhow!("experiment.algorithms must be an array of names"))?;
    let mut out = Vec::new();
    for item in list {
        let s = item
            .as_str()
            .ok_or_else(|| anyhow!("experiment.algorithms entries must be strings"))?;
        let alg = Algorithm::parse(s).ok_or_else(|| {
            let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.slug()).collect();
            anyhow!("unknown algorithm '{s}'{}", suggest(s, &known))
        })?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    Ok(out)
}

fn parse_sizes(v: &toml::Value) -> Result<Vec<SizeSpec>> {
    let list = v.as_array().ok_or_else(|| {
        anyhow!("experiment.sizes must be an array of [width, length, n] triples")
    })?;
    let mut out = Vec::new();
    for item in list {
        let triple = item
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| anyhow!("each size must be a [width, length, n] triple"))?;
        out.push(SizeSpec {
            width: parse_f64(&triple[0], "size width")?,
            length: parse_f64(&triple[1], "size length")?,
            n: parse_u64(&triple[2], "size n")? as usize,
        });
    }
    Ok(out)
}

/// Comma-separated algorithm list from the command line.
pub fn parse_algorithm_flag(s: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let alg = Algorithm::parse(part).ok_or_else(|| {
            let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.slug()).collect();
            anyhow!("unknown algorithm '{part}'{}", suggest(part.trim(), &known))
        })?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    if out.is_empty() {
        bail!("--algorithms produced an empty list");
    }
    Ok(out)
}

/// Comma-separated seed list from the command line.
pub fn parse_seed_flag(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(
            part.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!("invalid seed '{part}'"))?,
        );
    }
    if out.is_empty() {
        bail!("--seed-list produced an empty list");
    }
    Ok(out)
}
