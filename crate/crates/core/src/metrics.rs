//! Evaluation metrics computed from simulation output: remaining energy,
//! energy difference, average degree, average transmission radius, one-hop
//! success ratio and network lifetime.

use crate::net::{NetworkGraph, NodeId};
use crate::sim::Algorithm;

/// Mean residual energy over non-sink nodes (or all nodes when
/// `include_sink` is set; tree baselines drain the sink visibly).
pub fn avg_remaining_energy(graph: &NetworkGraph, include_sink: bool) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for node in &graph.nodes {
        if node.is_sink && !include_sink {
            continue;
        }
        total += node.energy;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Max minus min residual energy over the counted nodes.
pub fn energy_difference(graph: &NetworkGraph, include_sink: bool) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for node in &graph.nodes {
        if node.is_sink && !include_sink {
            continue;
        }
        min = min.min(node.energy);
        max = max.max(node.energy);
    }
    if min.is_finite() {
        max - min
    } else {
        0.0
    }
}

/// Number of maintained edges divided by the number of counted nodes.
pub fn average_degree(edge_count: usize, node_count: usize) -> Option<f64> {
    (node_count > 0).then(|| edge_count as f64 / node_count as f64)
}

/// Mean Euclidean length of an edge set; absent when the set is empty.
pub fn mean_edge_length<I>(graph: &NetworkGraph, edges: I) -> Option<f64>
where
    I: IntoIterator<Item = (NodeId, NodeId)>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for (a, b) in edges {
        total += graph.dist(a, b);
        count += 1;
    }
    (count > 0).then(|| total / count as f64)
}

/// Successful hops over attempted hops; absent when nothing was attempted.
pub fn hop_success_ratio(successes: u64, attempts: u64) -> Option<f64> {
    (attempts > 0).then(|| successes as f64 / attempts as f64)
}

/// One-sided sign test: probability of at least `wins` successes in
/// `wins + losses` fair coin flips. Ties are excluded by the caller.
pub fn sign_test_p(wins: u32, losses: u32) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in wins..=n {
        p += binom(n, k);
    }
    p / 2f64.powi(n as i32)
}

fn binom(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// First-death accounting for lifetime runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeOutcome {
    /// Round of the first non-sink death, or the last executed round when
    /// censored.
    pub round: u64,
    /// True when the packet budget ran out before any death.
    pub censored: bool,
}

/// Periodic snapshot of network-wide energy state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub round: u64,
    pub packets_sent: u64,
    pub avg_remaining: f64,
    pub avg_remaining_with_sink: f64,
    pub energy_difference: f64,
    pub energy_difference_with_sink: f64,
}

/// Per-run metric bundle.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n: usize,
    pub width: f64,
    pub length: f64,
    pub packet_budget: u64,
    pub rounds_executed: u64,
    pub packets_sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub avg_remaining: f64,
    pub avg_remaining_with_sink: f64,
    pub energy_difference: f64,
    pub energy_difference_with_sink: f64,
    /// Maintained-edge count over counted nodes at the measurement point.
    pub avg_degree: Option<f64>,
    /// Counts backing `avg_degree` for structure-identity checks:
    /// (edge count, node count).
    pub degree_counts: Option<(usize, usize)>,
    pub avg_tx_radius: Option<f64>,
    pub hop_success_ratio: Option<f64>,
    pub lifetime: Option<LifetimeOutcome>,
    /// Round where the sink's cumulative demand would have exhausted its
    /// budget, for centralized-baseline comparisons.
    pub sink_exhaust_round: Option<u64>,
    pub total_energy_spent: f64,
    pub series: Vec<SeriesPoint>,
}
