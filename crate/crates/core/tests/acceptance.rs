//! Acceptance suite: one test per headline criterion, each printing a
//! PASS/FAIL line (plus per-check detail) before asserting.
//!
//! Shared experiment data is materialized once per binary via OnceLock
//! caches so criteria that read the same runs do not recompute them.

use daaca_core::baselines::mst::{build_global_mst, oracle, pedap_weight, tree_weight};
use daaca_core::metrics::{sign_test_p, MetricsReport};
use daaca_core::net::{NetworkGraph, NodeId, Position};
use daaca_core::routing::{RoutingEntry, RoutingTable, Variant};
use daaca_core::sim::{Algorithm, SimConfig, Simulation, StopPolicy};
use daaca_core::{AlgorithmConfig, EnergyModel, RngStream, SinkPlacement};
use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

type RunCache = BTreeMap<(Algorithm, u64), MetricsReport>;

const BIG_SEEDS: std::ops::Range<u64> = 1001..1011;
const FAMILY_SEEDS: std::ops::Range<u64> = 1001..1021;

fn run_one(algorithm: Algorithm, seed: u64, setup: impl Fn(&mut SimConfig)) -> MetricsReport {
    let mut cfg = SimConfig::new(algorithm);
    setup(&mut cfg);
    let mut sim = Simulation::new(cfg, seed).expect("valid config");
    sim.run_to_completion().0
}

/// Structure runs on (100x100, 1000): one update window, standard energy.
fn big_runs() -> &'static RunCache {
    static CACHE: OnceLock<RunCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let algorithms = [
            Algorithm::Basic,
            Algorithm::Aca,
            Algorithm::Pedap,
            Algorithm::Lmst,
            Algorithm::LPedap,
        ];
        let mut out = BTreeMap::new();
        for alg in algorithms {
            for seed in BIG_SEEDS {
                let report = run_one(alg, seed, |c| {
                    c.n = 1000;
                    c.width = 100.0;
                    c.length = 100.0;
                    c.packet_budget = 1000;
                });
                out.insert((alg, seed), report);
            }
        }
        out
    })
}

/// Energy-comparison runs on (40x50, 200), 5000 packets, 20 seeds.
fn family_energy_runs() -> &'static RunCache {
    static CACHE: OnceLock<RunCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let algorithms = [
            Algorithm::Acs,
            Algorithm::Mm,
            Algorithm::Es,
            Algorithm::Basic,
            Algorithm::Aca,
            Algorithm::PedapPa,
        ];
        let mut out = BTreeMap::new();
        for alg in algorithms {
            for seed in FAMILY_SEEDS {
                let report = run_one(alg, seed, |c| {
                    c.n = 200;
                    c.width = 40.0;
                    c.length = 50.0;
                    c.packet_budget = 5000;
                });
                out.insert((alg, seed), report);
            }
        }
        out
    })
}

/// Lifetime runs: 0.05 J per node, stop at first non-sink death.
fn lifetime_runs() -> &'static RunCache {
    static CACHE: OnceLock<RunCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut out = BTreeMap::new();
        for alg in Algorithm::ALL {
            for seed in FAMILY_SEEDS {
                let report = run_one(alg, seed, |c| {
                    c.n = 200;
                    c.width = 40.0;
                    c.length = 50.0;
                    c.energy.e_init = 0.05;
                    c.packet_budget = 100_000;
                    c.stop = StopPolicy::FirstDeath;
                });
                out.insert((alg, seed), report);
            }
        }
        out
    })
}

/// Stress runs: 0.05 J per node, full budget, failures accumulate.
fn stress_runs() -> &'static RunCache {
    static CACHE: OnceLock<RunCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let algorithms = [
            Algorithm::Acs,
            Algorithm::Mm,
            Algorithm::Es,
            Algorithm::Basic,
        ];
        let mut out = BTreeMap::new();
        for alg in algorithms {
            for seed in FAMILY_SEEDS {
                let report = run_one(alg, seed, |c| {
                    c.n = 200;
                    c.width = 40.0;
                    c.length = 50.0;
                    c.energy.e_init = 0.05;
                    c.packet_budget = 5000;
                });
                out.insert((alg, seed), report);
            }
        }
        out
    })
}

fn values<'c>(
    cache: &'c RunCache,
    alg: Algorithm,
    seeds: std::ops::Range<u64>,
    metric: impl Fn(&MetricsReport) -> f64 + 'c,
) -> Vec<f64> {
    seeds.map(|s| metric(&cache[&(alg, s)])).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One-sided pairwise comparison hi >= lo with a sign test at 95%.
fn sign_pair(name: &str, hi: &[f64], lo: &[f64], problems: &mut Vec<String>) {
    let wins = hi.iter().zip(lo).filter(|(a, b)| a > b).count() as u32;
    let losses = hi.iter().zip(lo).filter(|(a, b)| a < b).count() as u32;
    let p = sign_test_p(wins, losses);
    let ok = p < 0.05;
    println!(
        "    {} {}: means {:.6} vs {:.6}, wins {wins}/{} (p = {p:.4})",
        if ok { "pass" } else { "FAIL" },
        name,
        mean(hi),
        mean(lo),
        wins + losses
    );
    if !ok {
        problems.push(format!("{name} (p = {p:.4})"));
    }
}

fn band(name: &str, value: f64, target: f64, tol: f64, problems: &mut Vec<String>) {
    let lo = target * (1.0 - tol);
    let hi = target * (1.0 + tol);
    let ok = value >= lo && value <= hi;
    println!(
        "    {} {name}: {value:.4} vs {target} [{lo:.4}, {hi:.4}]",
        if ok { "pass" } else { "FAIL" }
    );
    if !ok {
        problems.push(format!("{name} = {value:.4} outside [{lo:.4}, {hi:.4}]"));
    }
}

/// `limit_secs` is the stated release-build bound; debug builds get a 30x
/// allowance since shared caches materialize inside whichever test runs
/// first.
fn finish(criterion: &str, started: Instant, limit_secs: Option<u64>, problems: Vec<String>) {
    let elapsed = started.elapsed().as_secs_f64();
    let mut problems = problems;
    if let Some(limit) = limit_secs {
        let allowance = if cfg!(debug_assertions) { 30.0 } else { 1.0 };
        if elapsed > limit as f64 * allowance {
            problems.push(format!("runtime {elapsed:.1}s exceeded {limit}s"));
        }
    }
    if problems.is_empty() {
        println!("ACCEPTANCE {criterion}: PASS ({elapsed:.1}s)");
    } else {
        println!("ACCEPTANCE {criterion}: FAIL ({elapsed:.1}s)");
        panic!("{criterion} failed: {}", problems.join("; "));
    }
}

#[test]
fn criterion_01_structure_degree_exact() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = big_runs();

    for seed in BIG_SEEDS {
        // PEDAP: spanning tree over the full network.
        let pedap = &runs[&(Algorithm::Pedap, seed)];
        match pedap.degree_counts {
            Some((edges, nodes)) => {
                if nodes == 1000 {
                    let degree = pedap.avg_degree.unwrap();
                    if degree != 0.999 {
                        problems.push(format!("seed {seed}: pedap degree {degree} != 0.999"));
                    }
                } else if edges != nodes - 1 {
                    problems.push(format!(
                        "seed {seed}: pedap tree has {edges} edges over {nodes} nodes"
                    ));
                }
            }
            None => problems.push(format!("seed {seed}: pedap degree missing")),
        }
        // Ant algorithms: per-round forwarding forest has one transmission
        // per participant except the sink.
        for alg in [Algorithm::Basic, Algorithm::Aca] {
            let report = &runs[&(alg, seed)];
            match report.degree_counts {
                Some((edges, nodes)) => {
                    if edges != nodes - 1 {
                        problems.push(format!(
                            "seed {seed}: {alg} forwarding structure {edges} edges / {nodes} nodes"
                        ));
                    }
                }
                None => problems.push(format!("seed {seed}: {alg} degree missing")),
            }
        }
    }
    println!(
        "    pedap degree mean {:.4}, basic {:.4}, aca {:.4}",
        mean(&values(runs, Algorithm::Pedap, BIG_SEEDS, |r| r
            .avg_degree
            .unwrap())),
        mean(&values(runs, Algorithm::Basic, BIG_SEEDS, |r| r
            .avg_degree
            .unwrap())),
        mean(&values(runs, Algorithm::Aca, BIG_SEEDS, |r| r
            .avg_degree
            .unwrap())),
    );
    finish("criterion 1 (degree identity)", started, Some(60), problems);
}

#[test]
fn criterion_02_lmst_degree_band() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = big_runs();
    let lmst = mean(&values(runs, Algorithm::Lmst, BIG_SEEDS, |r| {
        r.avg_degree.unwrap()
    }));
    let lpedap = mean(&values(runs, Algorithm::LPedap, BIG_SEEDS, |r| {
        r.avg_degree.unwrap()
    }));
    band("lmst degree", lmst, 2.04, 0.15, &mut problems);
    band("l-pedap degree", lpedap, 2.04, 0.15, &mut problems);
    finish(
        "criterion 2 (localized-structure degree)",
        started,
        Some(300),
        problems,
    );
}

#[test]
fn criterion_03_radius_ordering_and_bands() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = big_runs();
    let radius = |alg| values(runs, alg, BIG_SEEDS, |r| r.avg_tx_radius.unwrap());
    let daaca = radius(Algorithm::Basic);
    let aca = radius(Algorithm::Aca);
    let lpedap = radius(Algorithm::LPedap);
    let pedap = radius(Algorithm::Pedap);
    let lmst = radius(Algorithm::Lmst);

    // Chain: daaca <= aca <= l-pedap <= pedap <= lmst.
    sign_pair("aca >= daaca", &aca, &daaca, &mut problems);
    sign_pair("l-pedap >= aca", &lpedap, &aca, &mut problems);
    sign_pair("pedap >= l-pedap", &pedap, &lpedap, &mut problems);
    sign_pair("lmst >= pedap", &lmst, &pedap, &mut problems);

    band("daaca radius", mean(&daaca), 1.79, 0.25, &mut problems);
    band("aca radius", mean(&aca), 1.8, 0.25, &mut problems);
    band("l-pedap radius", mean(&lpedap), 2.07, 0.25, &mut problems);
    band("pedap radius", mean(&pedap), 2.19, 0.25, &mut problems);
    band("lmst radius", mean(&lmst), 4.81, 0.25, &mut problems);

    finish("criterion 3 (radius ordering)", started, None, problems);
}

#[test]
fn criterion_04_remaining_energy_ordering() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = family_energy_runs();
    let rem = |alg| values(runs, alg, FAMILY_SEEDS, |r| r.avg_remaining);
    let acs = rem(Algorithm::Acs);
    let mm = rem(Algorithm::Mm);
    let es = rem(Algorithm::Es);
    let basic = rem(Algorithm::Basic);
    let aca = rem(Algorithm::Aca);
    let pedap_pa = rem(Algorithm::PedapPa);

    sign_pair("acs >= mm", &acs, &mm, &mut problems);
    sign_pair("mm >= es", &mm, &es, &mut problems);
    sign_pair("es >= basic", &es, &basic, &mut problems);
    sign_pair("basic >= aca", &basic, &aca, &mut problems);
    sign_pair("basic >= pedap-pa", &basic, &pedap_pa, &mut problems);

    finish(
        "criterion 4 (remaining-energy ordering)",
        started,
        Some(600),
        problems,
    );
}

#[test]
fn criterion_05_energy_difference_ordering() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = family_energy_runs();
    let diff = |alg| values(runs, alg, FAMILY_SEEDS, |r| r.energy_difference);
    let basic = diff(Algorithm::Basic);
    let mm = diff(Algorithm::Mm);
    let es = diff(Algorithm::Es);
    let acs = diff(Algorithm::Acs);

    sign_pair("basic >= mm", &basic, &mm, &mut problems);
    sign_pair("mm >= es", &mm, &es, &mut problems);
    sign_pair("es >= acs", &es, &acs, &mut problems);

    finish(
        "criterion 5 (energy-difference ordering)",
        started,
        None,
        problems,
    );
}

#[test]
fn criterion_06_lifetime_ordering() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = lifetime_runs();
    let life = |alg| {
        values(runs, alg, FAMILY_SEEDS, |r| {
            let lt = r.lifetime.unwrap();
            assert!(!lt.censored, "lifetime run censored");
            lt.round as f64
        })
    };
    let acs = life(Algorithm::Acs);
    let mm = life(Algorithm::Mm);
    let es = life(Algorithm::Es);
    let basic = life(Algorithm::Basic);

    sign_pair("acs >= mm", &acs, &mm, &mut problems);
    sign_pair("mm >= es", &mm, &es, &mut problems);
    sign_pair("es >= basic", &es, &basic, &mut problems);

    for variant in [
        Algorithm::Acs,
        Algorithm::Mm,
        Algorithm::Es,
        Algorithm::Basic,
    ] {
        for baseline in [
            Algorithm::Aca,
            Algorithm::Pedap,
            Algorithm::PedapPa,
            Algorithm::Lmst,
            Algorithm::LPedap,
        ] {
            sign_pair(
                &format!("{variant} >= {baseline}"),
                &life(variant),
                &life(baseline),
                &mut problems,
            );
        }
    }

    finish("criterion 6 (lifetime ordering)", started, None, problems);
}

#[test]
fn criterion_07_success_ratio_ordering() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let runs = stress_runs();
    let ratio = |alg| {
        mean(&values(runs, alg, FAMILY_SEEDS, |r| {
            r.hop_success_ratio.unwrap()
        }))
    };
    let acs = ratio(Algorithm::Acs);
    let mm = ratio(Algorithm::Mm);
    let es = ratio(Algorithm::Es);
    let basic = ratio(Algorithm::Basic);
    for (name, hi, lo) in [
        ("acs >= mm", acs, mm),
        ("mm >= es", mm, es),
        ("es >= basic", es, basic),
    ] {
        let ok = hi >= lo;
        println!(
            "    {} {name}: {hi:.6} vs {lo:.6}",
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            problems.push(format!("{name}: {hi:.6} < {lo:.6}"));
        }
    }
    finish(
        "criterion 7 (success-ratio ordering)",
        started,
        None,
        problems,
    );
}

#[test]
fn criterion_08_property_suite() {
    let started = Instant::now();
    let mut problems = Vec::new();
    let em = EnergyModel::standard();

    // (a) probability normalization over 1e4 random tables.
    {
        let cfg = AlgorithmConfig::new(Variant::Basic);
        let mut rng = RngStream::new(2_024);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let n = 1 + rng.below(8);
            let entries: Vec<RoutingEntry> = (0..n)
                .map(|i| RoutingEntry {
                    neighbor: NodeId(i as u32 + 1),
                    e_dist: rng.uniform(1e-5, 1e-3),
                    e_dist_prime: 0.0,
                    e_estimate: rng.uniform(0.1, 10.0),
                    pheromone: rng.uniform(0.01, 2.0),
                    tau: 0.0,
                    prob: 0.0,
                    times: 0,
                    selectable: true,
                })
                .collect();
            let mut table = RoutingTable {
                owner: NodeId(0),
                entries,
            };
            table
                .refresh_probabilities(rng.uniform(0.1, 10.0), NodeId(999), &em, &cfg)
                .unwrap();
            let total: f64 = table.entries.iter().map(|e| e.prob).sum();
            worst = worst.max((total - 1.0).abs());
        }
        println!("    probability normalization: worst |sum - 1| = {worst:.2e}");
        if worst > 1e-9 {
            problems.push(format!("normalization drift {worst:.2e}"));
        }
    }

    // (b) owner-energy cancellation over 1e3 random tables.
    {
        let cfg = AlgorithmConfig::new(Variant::Basic);
        let mut rng = RngStream::new(777);
        let mut worst: f64 = 0.0;
        for _ in 0..1_000 {
            let n = 2 + rng.below(6);
            let entries: Vec<RoutingEntry> = (0..n)
                .map(|i| RoutingEntry {
                    neighbor: NodeId(i as u32 + 1),
                    e_dist: rng.uniform(1e-5, 1e-3),
                    e_dist_prime: 0.0,
                    e_estimate: rng.uniform(0.1, 10.0),
                    pheromone: rng.uniform(0.01, 2.0),
                    tau: 0.0,
                    prob: 0.0,
                    times: 0,
                    selectable: true,
                })
                .collect();
            let energy = rng.uniform(0.5, 10.0);
            let scale = rng.uniform(0.05, 0.95);
            let mut a = RoutingTable {
                owner: NodeId(0),
                entries: entries.clone(),
            };
            let mut b = RoutingTable {
                owner: NodeId(0),
                entries,
            };
            a.refresh_probabilities(energy, NodeId(999), &em, &cfg)
                .unwrap();
            b.refresh_probabilities(energy * scale, NodeId(999), &em, &cfg)
                .unwrap();
            for (ea, eb) in a.entries.iter().zip(b.entries.iter()) {
                worst = worst.max((ea.prob - eb.prob).abs());
            }
        }
        println!("    owner-energy cancellation: worst |dp| = {worst:.2e}");
        if worst > 1e-12 {
            problems.push(format!("cancellation drift {worst:.2e}"));
        }
    }

    // (c) MM bounds hold after every round of a full run.
    {
        let mut cfg = SimConfig::new(Algorithm::Mm);
        cfg.n = 200;
        cfg.width = 40.0;
        cfg.length = 50.0;
        cfg.packet_budget = 2_000;
        cfg.daaca.round_to_update = 50;
        let mut sim = Simulation::new(cfg, 4242).unwrap();
        let mut ok = true;
        for _ in 0..200 {
            if sim.run_round().is_err() {
                break;
            }
            ok &= sim.pheromones_within(0.5, 0.9);
        }
        println!(
            "    mm bounds through full run: {}",
            if ok { "held" } else { "violated" }
        );
        if !ok {
            problems.push("mm bounds violated".into());
        }
    }

    // (d)+(e) conservation ledger and per-round forwarding acyclicity on
    // every algorithm, with per-round checks enabled.
    {
        for alg in Algorithm::ALL {
            for (e_init, budget) in [(10.0, 1000), (0.05, 2000)] {
                let mut cfg = SimConfig::new(alg);
                cfg.n = 150;
                cfg.width = 40.0;
                cfg.length = 50.0;
                cfg.energy.e_init = e_init;
                cfg.packet_budget = budget;
                cfg.daaca.round_to_update = 50;
                cfg.aca.idle_threshold = 50;
                cfg.debug_checks = true;
                let mut sim = Simulation::new(cfg, 99).unwrap();
                let _ = sim.run_to_completion();
                let drift = sim.conservation_drift();
                let bound = 1e-12 * (150.0 * e_init).max(1.0);
                if drift > bound {
                    problems.push(format!("{alg} e={e_init}: ledger drift {drift:.2e}"));
                }
            }
        }
        println!("    conservation + acyclicity across 9 algorithms x 2 regimes: checked");
    }

    // (f) Prim output matches the exhaustive spanning-tree oracle on 200
    // random graphs of at most 8 nodes. Seeds whose sink lands isolated are
    // skipped and replaced so exactly 200 graphs get compared.
    {
        let mut mismatches = 0;
        let mut checked = 0;
        let mut seed = 0u64;
        while checked < 200 {
            let mut rng = RngStream::new(seed);
            seed += 1;
            let n = 4 + rng.below(5);
            let g = NetworkGraph::deploy_random(
                n,
                12.0,
                12.0,
                6.0,
                10.0,
                SinkPlacement::Random,
                &mut rng,
            )
            .unwrap();
            let w = pedap_weight(&g, &em);
            let tree = build_global_mst(&g, &w, 0);
            let prim = tree_weight(&tree, &w);
            if let Some(best) = oracle::min_spanning_weight(&g, &w) {
                checked += 1;
                if (prim - best).abs() > 1e-12 * best.max(1.0) {
                    mismatches += 1;
                }
            }
        }
        println!("    mst oracle: {checked} graphs checked, {mismatches} mismatches");
        if mismatches > 0 {
            problems.push(format!("{mismatches} mst oracle mismatches"));
        }
    }

    // (g) Equation-level arithmetic, frozen by hand, matched to 1e-12.
    {
        let model = EnergyModel::standard();
        let checks = [
            ("tx 4098b @ 10m", model.tx_cost(4098, 10.0), 2.4588e-4),
            ("rx 4098b", model.rx_cost(4098), 2.049e-4),
            ("tx 1000b @ 0m", model.tx_cost(1000, 0.0), 5e-5),
            (
                "energy distance at half fractions",
                2.4588e-4 / (0.5 * 0.5),
                9.8352e-4,
            ),
            ("evaporation 0.8 -> ", 0.8 * (1.0 - 0.2), 0.64),
            ("raw deposit", 0.64 + 2.4588e-4, 0.64024588),
            (
                "calibrated max-range deposit",
                AlgorithmConfig::new(Variant::Basic).kappa(&model, 10.0)
                    * model.tx_cost(4098, 10.0),
                0.16,
            ),
            ("acs global step", 0.8 * 0.6 + 0.2 * 0.5, 0.58),
            ("acs local step", 0.1 * 0.8 + 0.9 * 0.5, 0.53),
            (
                "estimate extrapolation times=1",
                10.0 - (10.0 - 9.0) / 1.0 * 2.0,
                8.0,
            ),
            (
                "estimate extrapolation times=2",
                10.0 - (10.0 - 9.0) / 2.0 * 3.0,
                8.5,
            ),
            (
                "hop heuristic 4:1 split",
                {
                    let w1 = 0.8 * (1.0f64 / 2.0).powi(2);
                    let w3 = 0.8 * (1.0f64 / 4.0).powi(2);
                    w1 / (w1 + w3)
                },
                0.8,
            ),
            (
                "selection weight 0.8/0.2 split",
                {
                    let wa = 2.0f64.powi(2) * 0.8f64.powi(2);
                    let wb = 1.0f64.powi(2) * 0.8f64.powi(2);
                    wa / (wa + wb)
                },
                0.8,
            ),
            (
                "five-listener sync cost",
                model.tx_cost(128, 10.0) + 5.0 * model.rx_cost(128),
                3.968e-5,
            ),
        ];
        let mut bad = 0;
        for (name, got, want) in checks {
            if (got - want).abs() > 1e-12 {
                println!("    FAIL arithmetic {name}: {got} != {want}");
                bad += 1;
            }
        }
        println!(
            "    equation-level arithmetic: {} checks, {bad} failures",
            checks.len()
        );
        if bad > 0 {
            problems.push(format!("{bad} arithmetic mismatches"));
        }
    }

    // (h) replay determinism: identical reports from identical (config, seed).
    {
        let run = |seed| {
            let mut cfg = SimConfig::new(Algorithm::Acs);
            cfg.n = 150;
            cfg.width = 40.0;
            cfg.length = 50.0;
            cfg.packet_budget = 1000;
            cfg.daaca.round_to_update = 25;
            let mut sim = Simulation::new(cfg, seed).unwrap();
            format!("{:?}", sim.run_to_completion().0)
        };
        let identical = run(7) == run(7);
        println!(
            "    replay determinism: {}",
            if identical { "identical" } else { "diverged" }
        );
        if !identical {
            problems.push("replay diverged".into());
        }
    }

    finish("criterion 8 (property suite)", started, None, problems);
}

#[test]
fn criterion_09_scenario_locality() {
    let started = Instant::now();
    let mut problems = Vec::new();

    for seed in 0..50u64 {
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.n = 100;
        cfg.width = 30.0;
        cfg.length = 30.0;
        let mut sim = Simulation::new(cfg, seed).unwrap();

        // Removal: exactly the victim's neighbors change.
        let victim = NodeId(1 + (seed % 90) as u32);
        if !sim.graph.node(victim).alive {
            continue;
        }
        let expected: Vec<NodeId> = sim.graph.neighbors(victim).to_vec();
        let before = sim.tables_snapshot().unwrap();
        let report = sim.scenario_remove_node(victim).unwrap();
        if report.touched != expected {
            problems.push(format!("seed {seed}: removal touched {:?}", report.touched));
        }
        let after = sim.tables_snapshot().unwrap();
        for i in 0..before.len() {
            let id = NodeId(i as u32);
            if id == victim || expected.contains(&id) {
                continue;
            }
            if before[i] != after[i] {
                problems.push(format!("seed {seed}: table {i} changed on removal"));
            }
        }

        // Addition: exactly the in-range nodes gain state.
        let pos = Position {
            x: 5.0 + (seed as f64 * 0.37) % 20.0,
            y: 5.0 + (seed as f64 * 0.73) % 20.0,
        };
        let in_range: Vec<NodeId> = sim
            .graph
            .nodes
            .iter()
            .filter(|n| n.alive && n.pos.dist(&pos) <= sim.graph.range)
            .map(|n| n.id)
            .collect();
        let before = sim.tables_snapshot().unwrap();
        let (new_id, report) = sim.scenario_add_node(pos).unwrap();
        if report.touched != in_range {
            problems.push(format!(
                "seed {seed}: addition touched {:?}",
                report.touched
            ));
        }
        let after = sim.tables_snapshot().unwrap();
        for i in 0..before.len() {
            let id = NodeId(i as u32);
            if in_range.contains(&id) {
                continue;
            }
            if before[i] != after[i] {
                problems.push(format!("seed {seed}: table {i} changed on addition"));
            }
        }
        // New node's own table only holds sink-ward in-range neighbors.
        let tables = sim.tables_snapshot().unwrap();
        for entry in &tables[new_id.index()].entries {
            if !in_range.contains(&entry.neighbor) {
                problems.push(format!("seed {seed}: new node links out-of-range"));
            }
        }
    }

    finish(
        "criterion 9 (scenario locality)",
        started,
        Some(60),
        problems,
    );
}
