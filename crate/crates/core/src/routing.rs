//! The DAACA routing family: per-node routing tables, next-hop probability
//! computation, and the four pheromone adjustment strategies (Basic, ES,
//! MM, ACS).
//!
//! A routing table holds only sink-ward neighbors (strictly nearer to the
//! sink than the owner), so every per-packet path is finite and loop-free.
//! Selection weight per entry is `tau^alpha * eta^beta` where
//! `tau = 1 / E'_distance` and `E'_distance` inflates the radio cost of an
//! edge by the inverse residual-energy fractions of sender and receiver.

use crate::energy::EnergyModel;
use crate::net::{NetworkGraph, NodeId};
use crate::rng::RngStream;

/// Pheromone strategy within the DAACA family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Basic,
    Es,
    Mm,
    Acs,
}

/// Tunables shared by the DAACA family. Field defaults mirror the reference
/// experimental parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfig {
    pub variant: Variant,
    /// Exponent on tau in the selection weight.
    pub alpha: f64,
    /// Exponent on eta in the selection weight.
    pub beta: f64,
    /// Evaporated fraction per maintenance pass (eta *= 1 - rho).
    pub rho: f64,
    /// ACS local update rate.
    pub zeta: f64,
    /// ACS exploitation threshold.
    pub q0: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_init: f64,
    /// Rounds between pheromone maintenance passes.
    pub round_to_update: u64,
    /// Scale applied to every joule-valued pheromone deposit. `None` selects
    /// the calibrated default rho * eta_init / tx_cost(k, R); `Some(1.0)`
    /// reproduces the literal raw-joule arithmetic for audit.
    pub deposit_scale: Option<f64>,
    /// Reset the estimate age after an energy broadcast (the recurrence
    /// restarts from truth). Disable to keep extrapolating from stale ages.
    pub reset_times_on_sync: bool,
    /// Track the best path across the whole run instead of per window.
    pub all_time_best: bool,
    /// Apply the [eta_min, eta_max] clamp under ACS as well.
    pub acs_clamp: bool,
}

impl AlgorithmConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            alpha: 2.0,
            beta: 2.0,
            rho: 0.2,
            zeta: 0.9,
            q0: 0.5,
            eta_min: 0.5,
            eta_max: 0.9,
            eta_init: 0.8,
            round_to_update: 100,
            deposit_scale: None,
            reset_times_on_sync: true,
            all_time_best: false,
            acs_clamp: false,
        }
    }

    /// Deposit scale kappa. The calibrated default makes a max-range deposit
    /// equal the pheromone mass evaporation removes from a fresh entry
    /// (rho * eta_init), so deposits and evaporation stay commensurate.
    pub fn kappa(&self, em: &EnergyModel, range: f64) -> f64 {
        match self.deposit_scale {
            Some(k) => k,
            None => self.rho * self.eta_init / em.tx_cost(em.packet_bits, range),
        }
    }

    pub fn clamps_always(&self) -> bool {
        self.variant == Variant::Mm || (self.variant == Variant::Acs && self.acs_clamp)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(format!(
                "alpha and beta must be positive, got {} / {}",
                self.alpha, self.beta
            ));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(format!("rho must be in (0,1), got {}", self.rho));
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(format!("zeta must be in (0,1), got {}", self.zeta));
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return Err(format!("q0 must be in [0,1], got {}", self.q0));
        }
        if !(self.eta_min > 0.0 && self.eta_min < self.eta_max) {
            return Err(format!(
                "pheromone bounds must satisfy 0 < eta_min < eta_max, got [{}, {}]",
                self.eta_min, self.eta_max
            ));
        }
        if !(self.eta_init > 0.0) {
            return Err(format!("eta_init must be positive, got {}", self.eta_init));
        }
        if self.round_to_update == 0 {
            return Err("round_to_update must be at least 1".into());
        }
        if let Some(k) = self.deposit_scale {
            if !(k > 0.0) {
                return Err(format!("deposit_scale must be positive, got {k}"));
            }
        }
        Ok(())
    }
}

/// One sink-ward neighbor in a routing table.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingEntry {
    pub neighbor: NodeId,
    /// Radio cost of this edge for a data packet (electronics + amplifier).
    pub e_dist: f64,
    /// Energy distance: e_dist inflated by 1/(e1*e2).
    pub e_dist_prime: f64,
    /// Owner's estimate of the neighbor's residual energy.
    pub e_estimate: f64,
    /// Pheromone eta(i,j).
    pub pheromone: f64,
    /// 1 / e_dist_prime.
    pub tau: f64,
    /// Selection probability from the latest refresh.
    pub prob: f64,
    /// Transmissions to this neighbor since the estimate was last exact.
    pub times: u64,
    /// False when the estimated residual energy has hit zero; such entries
    /// are skipped rather than dividing by zero.
    pub selectable: bool,
}

/// Sink-ward routing table owned by one node.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub owner: NodeId,
    /// Entries sorted by neighbor id.
    pub entries: Vec<RoutingEntry>,
}

/// All selectable entries were exhausted; the caller drops the packet and
/// counts a hop failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeadEnd;

impl std::fmt::Display for DeadEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no selectable sink-ward neighbor")
    }
}

impl std::error::Error for DeadEnd {}

/// Minimum-cost source-to-sink path observed in the current update window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BestPathRecord {
    /// Node ids from source to sink; empty when nothing was delivered.
    pub id_list: Vec<NodeId>,
    /// Sum of per-hop edge costs along `id_list`.
    pub cost: f64,
}

impl BestPathRecord {
    pub fn is_empty(&self) -> bool {
        self.id_list.is_empty()
    }

    /// Replaces the record if `cost` beats the stored one.
    pub fn offer(&mut self, id_list: &[NodeId], cost: f64) {
        if self.is_empty() || cost < self.cost {
            self.id_list = id_list.to_vec();
            self.cost = cost;
        }
    }

    pub fn clear(&mut self) {
        self.id_list.clear();
        self.cost = 0.0;
    }
}

/// Per-node conjunction counters for the current update window.
#[derive(Debug, Clone, Default)]
pub struct ConjunctionCounter {
    counts: Vec<u32>,
}

impl ConjunctionCounter {
    pub fn new(n: usize) -> Self {
        Self { counts: vec![0; n] }
    }

    /// Grows the counter when nodes join the network mid-run.
    pub fn ensure_len(&mut self, n: usize) {
        if self.counts.len() < n {
            self.counts.resize(n, 0);
        }
    }

    pub fn increment(&mut self, id: NodeId) {
        self.ensure_len(id.index() + 1);
        self.counts[id.index()] += 1;
    }

    pub fn get(&self, id: NodeId) -> u32 {
        self.counts.get(id.index()).copied().unwrap_or(0)
    }

    pub fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

impl RoutingTable {
    /// Builds the sink-ward table for `owner`: every neighbor strictly nearer
    /// to the sink gets an entry with a fresh estimate and initial pheromone.
    pub fn build(
        owner: NodeId,
        graph: &NetworkGraph,
        em: &EnergyModel,
        cfg: &AlgorithmConfig,
    ) -> Self {
        let mut entries = Vec::new();
        if owner != graph.sink() {
            let own_dist = graph.dist_to_sink(owner);
            for &nb in graph.neighbors(owner) {
                if graph.node(nb).alive && graph.dist_to_sink(nb) < own_dist {
                    let e_dist = em.tx_cost(em.packet_bits, graph.dist(owner, nb));
                    entries.push(RoutingEntry {
                        neighbor: nb,
                        e_dist,
                        e_dist_prime: e_dist,
                        e_estimate: em.e_init,
                        pheromone: cfg.eta_init,
                        tau: 1.0 / e_dist,
                        prob: 0.0,
                        times: 0,
                        selectable: true,
                    });
                }
            }
        }
        Self { owner, entries }
    }

    pub fn entry(&self, neighbor: NodeId) -> Option<&RoutingEntry> {
        self.entries.iter().find(|e| e.neighbor == neighbor)
    }

    pub fn entry_mut(&mut self, neighbor: NodeId) -> Option<&mut RoutingEntry> {
        self.entries.iter_mut().find(|e| e.neighbor == neighbor)
    }

    pub fn remove_entry(&mut self, neighbor: NodeId) -> bool {
        let before = self.entries.len();
        self.entries.retain(|e| e.neighbor != neighbor);
        self.entries.len() != before
    }

    /// Recomputes energy distances and taus from the owner's current energy
    /// fraction and the stored neighbor estimates, then normalizes the
    /// selection probabilities. Entries whose energy product degenerates to
    /// zero become non-selectable instead of dividing by zero.
    ///
    /// Entries pointing at the sink keep a unit receiver fraction: the sink
    /// has no energy constraint semantics in next-hop selection.
    pub fn refresh_probabilities(
        &mut self,
        owner_energy: f64,
        sink: NodeId,
        em: &EnergyModel,
        cfg: &AlgorithmConfig,
    ) -> Result<(), DeadEnd> {
        let e1 = owner_energy / em.e_init;
        for entry in &mut self.entries {
            let e2 = if entry.neighbor == sink {
                1.0
            } else {
                entry.e_estimate / em.e_init
            };
            if e1 * e2 <= 0.0 {
                entry.selectable = false;
                entry.e_dist_prime = f64::INFINITY;
                entry.tau = 0.0;
                entry.prob = 0.0;
                continue;
            }
            entry.selectable = true;
            entry.e_dist_prime = entry.e_dist / (e1 * e2);
            entry.tau = 1.0 / entry.e_dist_prime;
        }

        let mut total = 0.0;
        for entry in &mut self.entries {
            if entry.selectable {
                entry.prob = entry.tau.powf(cfg.alpha) * entry.pheromone.powf(cfg.beta);
                total += entry.prob;
            }
        }
        if total <= 0.0 || !total.is_finite() {
            self.entries.iter_mut().for_each(|e| e.prob = 0.0);
            return Err(DeadEnd);
        }
        for entry in &mut self.entries {
            if entry.selectable {
                entry.prob /= total;
            }
        }
        Ok(())
    }

    /// Samples the next hop from the refreshed probabilities. Basic/ES/MM use
    /// a roulette wheel; ACS first draws q and takes the arg-max of
    /// tau^alpha * eta^beta when q <= q0 (ties to the lowest id).
    pub fn select_next_hop(
        &self,
        cfg: &AlgorithmConfig,
        rng: &mut RngStream,
    ) -> Result<NodeId, DeadEnd> {
        if !self.entries.iter().any(|e| e.selectable && e.prob > 0.0) {
            return Err(DeadEnd);
        }
        if cfg.variant == Variant::Acs {
            let q = rng.next_f64();
            if q <= cfg.q0 {
                return self.argmax_weight(cfg).ok_or(DeadEnd);
            }
        }
        let u = rng.next_f64();
        let mut cum = 0.0;
        let mut last = None;
        for entry in &self.entries {
            if !entry.selectable || entry.prob <= 0.0 {
                continue;
            }
            cum += entry.prob;
            last = Some(entry.neighbor);
            if u < cum {
                return Ok(entry.neighbor);
            }
        }
        // Floating-point shortfall in the cumulative sum: take the last
        // selectable entry.
        last.ok_or(DeadEnd)
    }

    fn argmax_weight(&self, cfg: &AlgorithmConfig) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for entry in &self.entries {
            if !entry.selectable {
                continue;
            }
            let w = entry.tau.powf(cfg.alpha) * entry.pheromone.powf(cfg.beta);
            match best {
                None => best = Some((w, entry.neighbor)),
                Some((bw, _)) if w > bw => best = Some((w, entry.neighbor)),
                _ => {}
            }
        }
        best.map(|(_, id)| id)
    }

    /// Extrapolates the neighbor's drained energy after one more transmission
    /// by the owner. The first transmission after an exact sync leaves the
    /// estimate untouched (there is no drain history to extrapolate from);
    /// negative extrapolations clamp to zero.
    pub fn update_energy_estimate(&mut self, neighbor: NodeId, em: &EnergyModel) {
        if let Some(entry) = self.entry_mut(neighbor) {
            if entry.times > 0 {
                let drained = em.e_init - entry.e_estimate;
                let projected = em.e_init - drained / entry.times as f64 * (entry.times + 1) as f64;
                entry.e_estimate = projected.max(0.0);
            }
            entry.times += 1;
        }
    }

    /// Evaporates every pheromone by (1 - rho).
    pub fn evaporate(&mut self, cfg: &AlgorithmConfig) {
        let keep = 1.0 - cfg.rho;
        for entry in &mut self.entries {
            entry.pheromone *= keep;
        }
        if cfg.clamps_always() {
            self.clamp_bounds(cfg);
        }
    }

    /// Deposits kappa * e_dist onto the entry with the maximum estimated
    /// residual energy (ties to the lowest neighbor id). No-op on an empty
    /// table.
    pub fn deposit_basic(&mut self, kappa: f64, cfg: &AlgorithmConfig) {
        let mut best: Option<(f64, usize)> = None;
        for (i, entry) in self.entries.iter().enumerate() {
            match best {
                None => best = Some((entry.e_estimate, i)),
                Some((be, _)) if entry.e_estimate > be => best = Some((entry.e_estimate, i)),
                _ => {}
            }
        }
        if let Some((_, i)) = best {
            self.entries[i].pheromone += kappa * self.entries[i].e_dist;
            if cfg.clamps_always() {
                self.clamp_bounds(cfg);
            }
        }
    }

    /// Clamps every pheromone into [eta_min, eta_max].
    pub fn clamp_bounds(&mut self, cfg: &AlgorithmConfig) {
        for entry in &mut self.entries {
            entry.pheromone = entry.pheromone.clamp(cfg.eta_min, cfg.eta_max);
        }
    }

    /// ACS local update: pulls the pheromone of the edge just used toward the
    /// table minimum, lowering the chance of re-selecting it next round.
    pub fn acs_local_update(&mut self, used: NodeId, cfg: &AlgorithmConfig) {
        let min_eta = self
            .entries
            .iter()
            .map(|e| e.pheromone)
            .fold(f64::INFINITY, f64::min);
        if !min_eta.is_finite() {
            return;
        }
        if let Some(entry) = self.entry_mut(used) {
            entry.pheromone = (1.0 - cfg.zeta) * entry.pheromone + cfg.zeta * min_eta;
        }
        if cfg.clamps_always() {
            self.clamp_bounds(cfg);
        }
    }
}

/// Deposits onto the parents of every conjunction node that merged two or
/// more paths at least twice this window: each neighbor holding the node in
/// its table adds kappa * e_dist onto that entry. Returns the conjunction
/// node ids, which then broadcast their current energy (the caller charges
/// that broadcast).
pub fn deposit_conjunction(
    tables: &mut [RoutingTable],
    counters: &ConjunctionCounter,
    kappa: f64,
    cfg: &AlgorithmConfig,
) -> Vec<NodeId> {
    let mut triggered = Vec::new();
    for idx in 0..tables.len() {
        let node = NodeId(idx as u32);
        if counters.get(node) >= 2 {
            triggered.push(node);
        }
    }
    for &node in &triggered {
        for table in tables.iter_mut() {
            if table.owner == node {
                continue;
            }
            let mut hit = false;
            if let Some(entry) = table.entry_mut(node) {
                entry.pheromone += kappa * entry.e_dist;
                hit = true;
            }
            if hit && cfg.clamps_always() {
                table.clamp_bounds(cfg);
            }
        }
    }
    triggered
}

/// Elitist deposit: every consecutive pair along the best path gains
/// kappa * best.cost, once per window. Pairs no longer present are skipped.
pub fn deposit_elitist(
    tables: &mut [RoutingTable],
    best: &BestPathRecord,
    kappa: f64,
    cfg: &AlgorithmConfig,
) {
    if best.is_empty() {
        return;
    }
    for pair in best.id_list.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let table = &mut tables[from.index()];
        let mut hit = false;
        if let Some(entry) = table.entry_mut(to) {
            entry.pheromone += kappa * best.cost;
            hit = true;
        }
        if hit && cfg.clamps_always() {
            table.clamp_bounds(cfg);
        }
    }
}

/// ACS global update along the best path: eta = (1-rho) * eta + rho * kappa * cost.
/// Off-path entries are untouched.
pub fn acs_global_update(
    tables: &mut [RoutingTable],
    best: &BestPathRecord,
    kappa: f64,
    cfg: &AlgorithmConfig,
) {
    if best.is_empty() {
        return;
    }
    for pair in best.id_list.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let table = &mut tables[from.index()];
        let mut hit = false;
        if let Some(entry) = table.entry_mut(to) {
            entry.pheromone = (1.0 - cfg.rho) * entry.pheromone + cfg.rho * kappa * best.cost;
            hit = true;
        }
        if hit && cfg.clamps_always() {
            table.clamp_bounds(cfg);
        }
    }
}

/// Energy broadcast at a maintenance boundary. Every alive node announces its
/// current energy: each neighbor holding it in a table sets the estimate to
/// the true value (and resets the estimate age when configured); entries for
/// dead nodes are dropped. Charges are the caller's job — this returns the
/// list of (broadcaster, alive neighbor count) so the simulator can bill
/// tx(k_ctrl, R) per broadcaster and rx(k_ctrl) per listener.
pub fn broadcast_energy_sync(
    graph: &NetworkGraph,
    tables: &mut [RoutingTable],
    em: &EnergyModel,
    cfg: &AlgorithmConfig,
) -> Vec<(NodeId, usize)> {
    let mut broadcasts = Vec::new();
    for node in &graph.nodes {
        if !node.alive {
            continue;
        }
        let listeners = graph
            .neighbors(node.id)
            .iter()
            .filter(|&&nb| graph.node(nb).alive)
            .count();
        broadcasts.push((node.id, listeners));
    }
    for table in tables.iter_mut() {
        let owner = table.owner;
        table.entries.retain(|e| graph.node(e.neighbor).alive);
        for entry in &mut table.entries {
            let neighbor = entry.neighbor;
            if neighbor == graph.sink() {
                entry.e_estimate = em.e_init;
            } else {
                entry.e_estimate = graph.node(neighbor).energy;
            }
            if cfg.reset_times_on_sync {
                entry.times = 0;
            }
        }
        let _ = owner;
    }
    broadcasts
}
