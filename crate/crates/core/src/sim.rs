//! The round engine: packet generation at sources, hop-by-hop forwarding
//! with aggregation at path conjunctions, energy accounting, periodic
//! pheromone or topology maintenance, lifetime detection and robustness
//! scenarios.
//!
//! A round has two phases. In the routing phase every node samples its next
//! hop at most once (the first packet arrival fixes the choice), and each
//! source packet walks the fixed choices until it reaches the sink or drops.
//! In the accounting phase the traversed edges form the round's forwarding
//! structure: each forwarding node transmits exactly once regardless of how
//! many packets merged into it, each node pays reception once per distinct
//! upstream transmission, and nodes where two or more paths met bump their
//! conjunction counter. Charges are applied as edges are first traversed,
//! which realizes the same totals and keeps the corner cases (a sender going
//! broke mid-round) well defined.

use crate::baselines::aca::{AcaConfig, AcaState};
use crate::baselines::lmst::{
    build_l_pedap_structure, build_lmst, shortest_path_tree, LmstWeighting,
};
use crate::baselines::mst::{build_global_mst, pedap_pa_weight, pedap_weight};
use crate::baselines::AggregationTree;
use crate::energy::EnergyModel;
use crate::metrics::{self, LifetimeOutcome, MetricsReport, SeriesPoint};
use crate::net::{NetError, NetworkGraph, NodeId, Position, SinkPlacement};
use crate::rng::RngStream;
use crate::routing::{
    acs_global_update, broadcast_energy_sync, deposit_conjunction, deposit_elitist,
    AlgorithmConfig, BestPathRecord, ConjunctionCounter, RoutingTable, Variant,
};
use std::collections::BTreeSet;

/// Every algorithm the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Basic,
    Es,
    Mm,
    Acs,
    Aca,
    Pedap,
    PedapPa,
    Lmst,
    LPedap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Basic,
        Algorithm::Es,
        Algorithm::Mm,
        Algorithm::Acs,
        Algorithm::Aca,
        Algorithm::Pedap,
        Algorithm::PedapPa,
        Algorithm::Lmst,
        Algorithm::LPedap,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Algorithm::Basic => "basic",
            Algorithm::Es => "es",
            Algorithm::Mm => "mm",
            Algorithm::Acs => "acs",
            Algorithm::Aca => "aca",
            Algorithm::Pedap => "pedap",
            Algorithm::PedapPa => "pedap-pa",
            Algorithm::Lmst => "lmst",
            Algorithm::LPedap => "l-pedap",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        let norm = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.slug() == norm || norm == format!("{}-daaca", a.slug()))
    }

    pub fn daaca_variant(&self) -> Option<Variant> {
        match self {
            Algorithm::Basic => Some(Variant::Basic),
            Algorithm::Es => Some(Variant::Es),
            Algorithm::Mm => Some(Variant::Mm),
            Algorithm::Acs => Some(Variant::Acs),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopPolicy {
    /// Run until the packet budget is exhausted.
    Budget,
    /// Stop at the first non-sink death (lifetime experiments); the budget
    /// still caps the run.
    FirstDeath,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunEnd {
    BudgetExhausted,
    FirstDeath,
    SinkDead,
    NoAliveSources,
}

/// Full configuration of a single run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub energy: EnergyModel,
    /// Control packet size (energy broadcasts, feedback, structure exchange).
    pub ctrl_bits: u64,
    /// Topology flood packet carries this many bits per node.
    pub topo_bits_per_node: u64,
    pub range: f64,
    pub width: f64,
    pub length: f64,
    pub n: usize,
    pub n_sources: usize,
    pub sink_placement: SinkPlacement,
    /// When set the sink has a finite budget and can die. Off by default:
    /// the sink is a powered base station; its demand is tracked either way.
    pub sink_mortal: bool,
    pub algorithm: Algorithm,
    pub daaca: AlgorithmConfig,
    pub aca: AcaConfig,
    pub packet_budget: u64,
    pub stop: StopPolicy,
    /// Per-round structural assertions (forwarding forest, ledger drift).
    pub debug_checks: bool,
}

impl SimConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        let daaca = AlgorithmConfig::new(algorithm.daaca_variant().unwrap_or(Variant::Basic));
        let aca = AcaConfig {
            idle_threshold: daaca.round_to_update,
            ..AcaConfig::default()
        };
        Self {
            energy: EnergyModel::standard(),
            ctrl_bits: 128,
            topo_bits_per_node: 16,
            range: 10.0,
            width: 40.0,
            length: 50.0,
            n: 200,
            n_sources: 10,
            sink_placement: SinkPlacement::Center,
            sink_mortal: false,
            algorithm,
            daaca,
            aca,
            packet_budget: 1000,
            stop: StopPolicy::Budget,
            debug_checks: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.energy.validate()?;
        self.daaca.validate()?;
        if self.n < 2 {
            return Err(format!("n must be at least 2, got {}", self.n));
        }
        if self.n_sources == 0 || self.n_sources >= self.n {
            return Err(format!(
                "n_sources must be in [1, n-1], got {} of {}",
                self.n_sources, self.n
            ));
        }
        if !(self.width > 0.0) || !(self.length > 0.0) {
            return Err(format!(
                "field must have positive dimensions, got {}x{}",
                self.width, self.length
            ));
        }
        if !(self.range > 0.0) {
            return Err(format!("range must be positive, got {}", self.range));
        }
        if self.ctrl_bits == 0 {
            return Err("ctrl_bits must be positive".into());
        }
        if self.packet_budget == 0 {
            return Err("packet_budget must be positive".into());
        }
        Ok(())
    }
}

/// Energy spent so far, by category. The conservation invariant compares the
/// ledger total against initial-minus-residual energy after every run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Ledger {
    pub data_tx: f64,
    pub data_rx: f64,
    pub control_tx: f64,
    pub control_rx: f64,
}

impl Ledger {
    pub fn total(&self) -> f64 {
        self.data_tx + self.data_rx + self.control_tx + self.control_rx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    DataTx,
    DataRx,
    CtrlTx,
    CtrlRx,
}

/// One logical data packet walking from a source toward the sink. The
/// header carries the node trace and accumulated per-hop radio cost, which
/// the elitist strategies compare at the sink; aggregation keeps the size
/// constant end-to-end.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    /// Payload size in bits; constant across aggregation.
    pub size: u64,
    pub origin: NodeId,
    /// Node trace from the origin to the current holder.
    pub id_list: Vec<NodeId>,
    /// Sum of per-hop edge costs along the trace.
    pub energy_consumption: f64,
    /// (from, to, distance) per traversed hop.
    pub hop_trace: Vec<(NodeId, NodeId, f64)>,
}

impl Packet {
    fn new(size: u64, origin: NodeId) -> Self {
        Self {
            size,
            origin,
            id_list: vec![origin],
            energy_consumption: 0.0,
            hop_trace: Vec::new(),
        }
    }

    fn record_hop(&mut self, from: NodeId, to: NodeId, distance: f64, edge_cost: f64) {
        self.id_list.push(to);
        self.energy_consumption += edge_cost;
        self.hop_trace.push((from, to, distance));
    }

    fn holder(&self) -> NodeId {
        *self.id_list.last().expect("id_list starts non-empty")
    }

    fn hops(&self) -> usize {
        self.hop_trace.len()
    }
}

/// Outcome of one executed round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub round: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub hop_attempts: u64,
    pub hop_successes: u64,
    pub energy_spent: f64,
    pub deaths: Vec<NodeId>,
    pub forwarding_edges: Vec<(NodeId, NodeId)>,
}

/// Locality report for the robustness scenarios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub touched: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Resolution {
    /// No selectable next hop.
    DeadEnd,
    /// Chosen receiver could not take the packet (or the sender went broke
    /// trying); packets arriving here drop.
    Failed,
    /// Edge to this neighbor is up for the round.
    Forwarded(NodeId),
}

#[derive(Debug)]
enum Router {
    Daaca {
        tables: Vec<RoutingTable>,
        best: BestPathRecord,
        conj: ConjunctionCounter,
    },
    Aca(AcaState),
    Tree {
        tree: AggregationTree,
        /// Maintained adjacency entries for degree/radius metrics: directed
        /// link counts for LMST-family structures, undirected tree edges for
        /// the PEDAP family.
        structure_edges: Vec<(NodeId, NodeId)>,
        structure_entry_count: usize,
    },
}

/// One simulation run: owns the graph, the router state and the RNG stream.
pub struct Simulation {
    pub cfg: SimConfig,
    pub graph: NetworkGraph,
    pub sources: Vec<NodeId>,
    router: Router,
    rng: RngStream,
    /// Rounds completed.
    pub round: u64,
    pub ledger: Ledger,
    pub packets_sent: u64,
    pub delivered_total: u64,
    pub dropped_total: u64,
    pub hop_attempts_total: u64,
    pub hop_successes_total: u64,
    pub first_death_round: Option<u64>,
    sink_demand: f64,
    sink_exhaust_round: Option<u64>,
    /// Distinct forwarding edges within the current update window.
    window_edges: BTreeSet<(u32, u32)>,
    /// (edge count, participant count) captured at the measurement round.
    measured_degree: Option<(usize, usize)>,
    measured_radius: Option<f64>,
    series: Vec<SeriesPoint>,
    isolated_warned: Vec<NodeId>,
}

impl Simulation {
    pub fn new(cfg: SimConfig, seed: u64) -> Result<Self, NetError> {
        cfg.validate().map_err(NetError::Config)?;
        let mut rng = RngStream::new(seed);
        let graph = NetworkGraph::deploy_random(
            cfg.n,
            cfg.width,
            cfg.length,
            cfg.range,
            cfg.energy.e_init,
            cfg.sink_placement,
            &mut rng,
        )?;
        let isolated_warned = graph.isolated_nodes();

        let mut sim = Self {
            rng,
            sources: Vec::new(),
            router: Router::Tree {
                tree: AggregationTree {
                    parent: Vec::new(),
                    rebuilt_at: 0,
                },
                structure_edges: Vec::new(),
                structure_entry_count: 0,
            },
            round: 0,
            ledger: Ledger::default(),
            packets_sent: 0,
            delivered_total: 0,
            dropped_total: 0,
            hop_attempts_total: 0,
            hop_successes_total: 0,
            first_death_round: None,
            sink_demand: 0.0,
            sink_exhaust_round: None,
            window_edges: BTreeSet::new(),
            measured_degree: None,
            measured_radius: None,
            series: Vec::new(),
            isolated_warned,
            graph,
            cfg,
        };
        sim.pick_sources();
        sim.router = sim.build_router();
        Ok(sim)
    }

    /// Builds a simulation over a scripted topology with explicit sources,
    /// for hand-traced scenarios. Geometry fields in `cfg` are taken from
    /// the graph.
    pub fn with_graph(
        mut cfg: SimConfig,
        mut graph: NetworkGraph,
        sources: &[NodeId],
        seed: u64,
    ) -> Result<Self, NetError> {
        cfg.n = graph.len();
        cfg.width = graph.width;
        cfg.length = graph.length;
        cfg.range = graph.range;
        cfg.n_sources = sources.len().max(1).min(cfg.n.saturating_sub(1));
        cfg.validate().map_err(NetError::Config)?;
        for &s in sources {
            if s.index() >= graph.len() || s == graph.sink() {
                return Err(NetError::Config(format!("invalid source {s}")));
            }
        }
        // The config owns the energy budget.
        for node in &mut graph.nodes {
            node.energy = cfg.energy.e_init;
        }
        let isolated_warned = graph.isolated_nodes();
        let mut sim = Self {
            rng: RngStream::new(seed),
            sources: sources.to_vec(),
            router: Router::Tree {
                tree: AggregationTree {
                    parent: Vec::new(),
                    rebuilt_at: 0,
                },
                structure_edges: Vec::new(),
                structure_entry_count: 0,
            },
            round: 0,
            ledger: Ledger::default(),
            packets_sent: 0,
            delivered_total: 0,
            dropped_total: 0,
            hop_attempts_total: 0,
            hop_successes_total: 0,
            first_death_round: None,
            sink_demand: 0.0,
            sink_exhaust_round: None,
            window_edges: BTreeSet::new(),
            measured_degree: None,
            measured_radius: None,
            series: Vec::new(),
            isolated_warned,
            graph,
            cfg,
        };
        sim.sources.sort_unstable();
        for &s in &sim.sources.clone() {
            sim.graph.node_mut(s).is_source = true;
        }
        sim.router = sim.build_router();
        Ok(sim)
    }

    /// Non-sink nodes that deployed with no neighbors; their packets all drop.
    pub fn isolated_nodes(&self) -> &[NodeId] {
        &self.isolated_warned
    }

    fn pick_sources(&mut self) {
        let pool: Vec<NodeId> = self
            .graph
            .nodes
            .iter()
            .filter(|n| !n.is_sink)
            .map(|n| n.id)
            .collect();
        let k = self.cfg.n_sources.min(pool.len());
        let mut picked = self.rng.sample_distinct(&pool, k);
        picked.sort_unstable();
        for &id in &picked {
            self.graph.node_mut(id).is_source = true;
        }
        self.sources = picked;
    }

    fn build_router(&mut self) -> Router {
        match self.cfg.algorithm {
            Algorithm::Basic | Algorithm::Es | Algorithm::Mm | Algorithm::Acs => {
                let tables = (0..self.graph.len())
                    .map(|i| {
                        RoutingTable::build(
                            NodeId(i as u32),
                            &self.graph,
                            &self.cfg.energy,
                            &self.cfg.daaca,
                        )
                    })
                    .collect();
                Router::Daaca {
                    tables,
                    best: BestPathRecord::default(),
                    conj: ConjunctionCounter::new(self.graph.len()),
                }
            }
            Algorithm::Aca => Router::Aca(AcaState::new(&self.graph, self.cfg.aca)),
            Algorithm::Pedap | Algorithm::PedapPa | Algorithm::Lmst | Algorithm::LPedap => {
                self.build_tree_router(0)
            }
        }
    }

    /// (Re)builds a tree router and charges the structure dissemination:
    /// a network-wide topology flood for the PEDAP family, a one-broadcast
    /// per-node neighbor exchange for the LMST family.
    fn build_tree_router(&mut self, rebuilt_at: u64) -> Router {
        match self.cfg.algorithm {
            Algorithm::Pedap => {
                self.charge_topology_flood();
                let w = pedap_weight(&self.graph, &self.cfg.energy);
                let tree = build_global_mst(&self.graph, &w, rebuilt_at);
                let structure_edges = tree.edges();
                let structure_entry_count = structure_edges.len();
                Router::Tree {
                    tree,
                    structure_edges,
                    structure_entry_count,
                }
            }
            Algorithm::PedapPa => {
                self.charge_topology_flood();
                let w = pedap_pa_weight(&self.graph, &self.cfg.energy);
                let tree = build_global_mst(&self.graph, &w, rebuilt_at);
                let structure_edges = tree.edges();
                let structure_entry_count = structure_edges.len();
                Router::Tree {
                    tree,
                    structure_edges,
                    structure_entry_count,
                }
            }
            Algorithm::Lmst => {
                self.charge_neighbor_exchange();
                let structure =
                    build_lmst(&self.graph, &self.cfg.energy, LmstWeighting::EnergyAware);
                let tree =
                    shortest_path_tree(&self.graph, &self.cfg.energy, &structure, rebuilt_at);
                // Nodes maintain directed links to their kept tree neighbors.
                let structure_entry_count = structure.len() * 2;
                Router::Tree {
                    tree,
                    structure_edges: structure,
                    structure_entry_count,
                }
            }
            Algorithm::LPedap => {
                self.charge_neighbor_exchange();
                let structure = build_l_pedap_structure(&self.graph, &self.cfg.energy);
                let tree =
                    shortest_path_tree(&self.graph, &self.cfg.energy, &structure, rebuilt_at);
                let structure_entry_count = structure.len() * 2;
                Router::Tree {
                    tree,
                    structure_edges: structure,
                    structure_entry_count,
                }
            }
            _ => unreachable!("not a tree algorithm"),
        }
    }

    /// PEDAP-family dissemination: every alive node relays the topology
    /// packet once at full range, and receives it from each alive neighbor.
    fn charge_topology_flood(&mut self) {
        let bits = (self.cfg.topo_bits_per_node * self.graph.len() as u64).max(1);
        let tx = self.cfg.energy.tx_cost(bits, self.cfg.range);
        let rx = self.cfg.energy.rx_cost(bits);
        for i in 0..self.graph.len() {
            let id = NodeId(i as u32);
            if !self.graph.node(id).alive {
                continue;
            }
            self.charge(id, tx, Bucket::CtrlTx);
            let neighbors: Vec<NodeId> = self.graph.neighbors(id).to_vec();
            for nb in neighbors {
                if self.graph.node(nb).alive {
                    self.charge(nb, rx, Bucket::CtrlRx);
                }
            }
        }
    }

    /// LMST-family structure exchange: one control broadcast per alive node,
    /// received by each alive neighbor.
    fn charge_neighbor_exchange(&mut self) {
        let tx = self.cfg.energy.tx_cost(self.cfg.ctrl_bits, self.cfg.range);
        let rx = self.cfg.energy.rx_cost(self.cfg.ctrl_bits);
        for i in 0..self.graph.len() {
            let id = NodeId(i as u32);
            if !self.graph.node(id).alive {
                continue;
            }
            self.charge(id, tx, Bucket::CtrlTx);
            let neighbors: Vec<NodeId> = self.graph.neighbors(id).to_vec();
            for nb in neighbors {
                if self.graph.node(nb).alive {
                    self.charge(nb, rx, Bucket::CtrlRx);
                }
            }
        }
    }

    /// Deducts energy, floored at the node's residual, and records the
    /// deduction in the ledger. The sink also accumulates its as-if demand so
    /// centralized baselines can report when it would have exhausted.
    fn charge(&mut self, id: NodeId, amount: f64, bucket: Bucket) -> f64 {
        if id == self.graph.sink() {
            self.sink_demand += amount;
            if self.sink_exhaust_round.is_none() && self.sink_demand >= self.cfg.energy.e_init {
                self.sink_exhaust_round = Some(self.round + 1);
            }
        }
        let node = self.graph.node_mut(id);
        let pay = amount.min(node.energy);
        node.energy -= pay;
        match bucket {
            Bucket::DataTx => self.ledger.data_tx += pay,
            Bucket::DataRx => self.ledger.data_rx += pay,
            Bucket::CtrlTx => self.ledger.control_tx += pay,
            Bucket::CtrlRx => self.ledger.control_rx += pay,
        }
        pay
    }

    fn receiver_can_take(&self, id: NodeId, rx: f64) -> bool {
        // The sink drains visibly but keeps receiving when immortal: its
        // energy budget has no constraint semantics for selection.
        if id == self.graph.sink() && !self.cfg.sink_mortal {
            return self.graph.node(id).alive;
        }
        let node = self.graph.node(id);
        node.alive && node.energy >= rx
    }

    /// Resolves the node's next-hop choice for this round. ACS applies its
    /// local pheromone update immediately after choosing.
    fn resolve_choice(&mut self, node: NodeId) -> Option<NodeId> {
        match &mut self.router {
            Router::Daaca { tables, .. } => {
                let energy = self.graph.node(node).energy;
                let table = &mut tables[node.index()];
                if table
                    .refresh_probabilities(
                        energy,
                        self.graph.sink(),
                        &self.cfg.energy,
                        &self.cfg.daaca,
                    )
                    .is_err()
                {
                    return None;
                }
                match table.select_next_hop(&self.cfg.daaca, &mut self.rng) {
                    Err(_) => None,
                    Ok(next) => {
                        if self.cfg.daaca.variant == Variant::Acs {
                            table.acs_local_update(next, &self.cfg.daaca);
                        }
                        Some(next)
                    }
                }
            }
            Router::Aca(state) => state.select_next_hop(node, &mut self.rng).ok(),
            Router::Tree { tree, .. } => {
                let parent = tree.parent_of(node)?;
                self.graph.node(parent).alive.then_some(parent)
            }
        }
    }

    /// Executes one round. Requires an alive sink and at least one alive
    /// source; otherwise the simulation has ended.
    pub fn run_round(&mut self) -> Result<RoundOutcome, RunEnd> {
        if !self.graph.node(self.graph.sink()).alive {
            return Err(RunEnd::SinkDead);
        }
        let active: Vec<NodeId> = self
            .sources
            .iter()
            .copied()
            .filter(|&s| self.graph.node(s).alive)
            .collect();
        if active.is_empty() {
            return Err(RunEnd::NoAliveSources);
        }

        let n = self.graph.len();
        let sink = self.graph.sink();
        let k = self.cfg.energy.packet_bits;
        let rx_cost = self.cfg.energy.rx_cost(k);
        let ledger_before = self.ledger.total();

        let mut resolution: Vec<Option<Resolution>> = vec![None; n];
        let mut in_degree: Vec<u32> = vec![0; n];
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        let mut attempts = 0u64;
        let mut successes = 0u64;
        let mut delivered = 0u64;
        let mut dropped = 0u64;
        let mut delivered_packets: Vec<Packet> = Vec::new();

        for &src in &active {
            self.packets_sent += 1;
            let mut packet = Packet::new(k, src);
            let mut fate_delivered = false;
            loop {
                let cur = packet.holder();
                if cur == sink {
                    fate_delivered = true;
                    break;
                }
                // ACA packets die when the hop budget is spent.
                if let Router::Aca(state) = &self.router {
                    if packet.hops() as u32 >= state.ttl_init {
                        break;
                    }
                }
                if resolution[cur.index()].is_none() {
                    let res = match self.resolve_choice(cur) {
                        None => {
                            attempts += 1;
                            Resolution::DeadEnd
                        }
                        Some(next) => {
                            attempts += 1;
                            if !self.receiver_can_take(next, rx_cost) {
                                Resolution::Failed
                            } else {
                                let d = self.graph.dist(cur, next);
                                let tx_cost = self.cfg.energy.tx_cost(k, d);
                                let sender_energy = self.graph.node(cur).energy;
                                if sender_energy >= tx_cost {
                                    self.charge(cur, tx_cost, Bucket::DataTx);
                                    self.charge(next, rx_cost, Bucket::DataRx);
                                    successes += 1;
                                    in_degree[next.index()] += 1;
                                    edges.push((cur, next));
                                    self.window_edges.insert((cur.0, next.0));
                                    self.after_successful_hop(cur, next, &packet.id_list);
                                    Resolution::Forwarded(next)
                                } else {
                                    // The transmitter spends what remains,
                                    // dies, and the packet drops.
                                    self.charge(cur, sender_energy, Bucket::DataTx);
                                    Resolution::Failed
                                }
                            }
                        }
                    };
                    resolution[cur.index()] = Some(res);
                }
                match resolution[cur.index()].unwrap() {
                    Resolution::DeadEnd | Resolution::Failed => break,
                    Resolution::Forwarded(next) => {
                        let d = self.graph.dist(cur, next);
                        packet.record_hop(cur, next, d, self.cfg.energy.tx_cost(k, d));
                        debug_assert!(
                            packet.id_list.len() <= n + 1,
                            "forwarding walk exceeded node count"
                        );
                    }
                }
            }
            if fate_delivered {
                delivered += 1;
                delivered_packets.push(packet);
            } else {
                dropped += 1;
            }
        }

        // Conjunction bookkeeping and best-path offers at the sink.
        if let Router::Daaca { best, conj, .. } = &mut self.router {
            for (i, &deg) in in_degree.iter().enumerate() {
                if deg >= 2 {
                    conj.increment(NodeId(i as u32));
                }
            }
            if self.cfg.daaca.variant != Variant::Basic {
                for packet in &delivered_packets {
                    best.offer(&packet.id_list, packet.energy_consumption);
                }
            }
        }

        // Per-round aging drives ACA's idle evaporation.
        if let Router::Aca(state) = &mut self.router {
            state.age_and_evaporate();
        }

        // Deaths: anything that can no longer afford the cheapest action.
        let threshold = self.cfg.energy.death_threshold();
        let mut deaths = Vec::new();
        for i in 0..n {
            let id = NodeId(i as u32);
            if id == sink && !self.cfg.sink_mortal {
                continue;
            }
            let node = self.graph.node_mut(id);
            if node.alive && node.energy < threshold {
                node.alive = false;
                deaths.push(id);
            }
        }
        if self.first_death_round.is_none() && deaths.iter().any(|&d| d != sink) {
            self.first_death_round = Some(self.round + 1);
        }

        self.round += 1;
        self.delivered_total += delivered;
        self.dropped_total += dropped;
        self.hop_attempts_total += attempts;
        self.hop_successes_total += successes;

        let outcome = RoundOutcome {
            round: self.round,
            delivered,
            dropped,
            hop_attempts: attempts,
            hop_successes: successes,
            energy_spent: self.ledger.total() - ledger_before,
            deaths,
            forwarding_edges: edges,
        };

        if self.cfg.debug_checks {
            self.assert_round_invariants(&outcome, active.len() as u64);
        }

        // Degree/radius measurement at the end of the first full window.
        if self.round == self.cfg.daaca.round_to_update && self.measured_degree.is_none() {
            self.capture_structure_metrics(&outcome);
        }

        if self.round.is_multiple_of(self.cfg.daaca.round_to_update) {
            self.maintenance();
            self.push_series_point();
        }

        Ok(outcome)
    }

    fn after_successful_hop(&mut self, from: NodeId, to: NodeId, path_before: &[NodeId]) {
        match &mut self.router {
            Router::Daaca { tables, .. } => {
                // Estimate the receiver's drain after this transmission.
                if to != self.graph.sink() {
                    tables[from.index()].update_energy_estimate(to, &self.cfg.energy);
                } else {
                    // Sink entries keep a pinned estimate; still age the edge.
                    if let Some(e) = tables[from.index()].entry_mut(to) {
                        e.times += 1;
                    }
                }
            }
            Router::Aca(state) => {
                state.mark_used(from, to);
                // Feedback fires when the packet reaches a node with hop
                // budget to spare, or reaches the sink. hops used so far =
                // path_before.len() edges including this hop.
                let hops_used = path_before.len() as u32;
                let ttl_remaining = state.ttl_init.saturating_sub(hops_used);
                let trigger = to == self.graph.sink() || ttl_remaining > state.ehc(to);
                if trigger {
                    let mut full: Vec<NodeId> = path_before.to_vec();
                    full.push(to);
                    let deposited = state.feedback_deposit(&full);
                    debug_assert_eq!(deposited, full.len() - 1);
                    // Feedback retraces the path in reverse, one control
                    // packet per hop.
                    let pairs: Vec<(NodeId, NodeId)> =
                        full.windows(2).map(|p| (p[0], p[1])).collect();
                    for (a, b) in pairs {
                        let d = self.graph.dist(a, b);
                        let tx = self.cfg.energy.tx_cost(self.cfg.ctrl_bits, d);
                        let rx = self.cfg.energy.rx_cost(self.cfg.ctrl_bits);
                        self.charge(b, tx, Bucket::CtrlTx);
                        self.charge(a, rx, Bucket::CtrlRx);
                    }
                }
            }
            Router::Tree { .. } => {}
        }
    }

    /// Periodic maintenance at update-window boundaries: pheromone
    /// adjustment plus energy broadcast for the DAACA family, topology
    /// refresh for ACA, rebuild for the tree baselines.
    fn maintenance(&mut self) {
        match self.cfg.algorithm {
            Algorithm::Basic | Algorithm::Es | Algorithm::Mm | Algorithm::Acs => {
                self.daaca_maintenance();
            }
            Algorithm::Aca => {
                if let Router::Aca(state) = &mut self.router {
                    state.refresh_topology(&self.graph);
                }
            }
            Algorithm::Pedap | Algorithm::PedapPa | Algorithm::Lmst | Algorithm::LPedap => {
                self.router = self.build_tree_router(self.round);
            }
        }
        self.window_edges.clear();
    }

    fn daaca_maintenance(&mut self) {
        let kappa = self.cfg.daaca.kappa(&self.cfg.energy, self.cfg.range);
        let cfg = self.cfg.daaca;
        let alive: Vec<bool> = self.graph.nodes.iter().map(|n| n.alive).collect();

        let conj_broadcasters = {
            let Router::Daaca { tables, best, conj } = &mut self.router else {
                unreachable!()
            };
            for (i, table) in tables.iter_mut().enumerate() {
                if !alive[i] {
                    continue;
                }
                table.evaporate(&cfg);
            }
            match cfg.variant {
                Variant::Basic => {
                    for (i, table) in tables.iter_mut().enumerate() {
                        if alive[i] {
                            table.deposit_basic(kappa, &cfg);
                        }
                    }
                    deposit_conjunction(tables, conj, kappa, &cfg)
                }
                Variant::Es | Variant::Mm => {
                    for (i, table) in tables.iter_mut().enumerate() {
                        if alive[i] {
                            table.deposit_basic(kappa, &cfg);
                        }
                    }
                    let triggered = deposit_conjunction(tables, conj, kappa, &cfg);
                    deposit_elitist(tables, best, kappa, &cfg);
                    triggered
                }
                Variant::Acs => {
                    acs_global_update(tables, best, kappa, &cfg);
                    deposit_conjunction(tables, conj, kappa, &cfg)
                }
            }
        };

        // Conjunction nodes announce their current energy to their parents.
        for node in conj_broadcasters {
            if !self.graph.node(node).alive {
                continue;
            }
            let tx = self.cfg.energy.tx_cost(self.cfg.ctrl_bits, self.cfg.range);
            let rx = self.cfg.energy.rx_cost(self.cfg.ctrl_bits);
            self.charge(node, tx, Bucket::CtrlTx);
            let neighbors: Vec<NodeId> = self.graph.neighbors(node).to_vec();
            let energy_now = self.graph.node(node).energy;
            for nb in neighbors {
                if !self.graph.node(nb).alive {
                    continue;
                }
                self.charge(nb, rx, Bucket::CtrlRx);
            }
            if let Router::Daaca { tables, .. } = &mut self.router {
                for table in tables.iter_mut() {
                    if let Some(entry) = table.entry_mut(node) {
                        entry.e_estimate = energy_now;
                        if cfg.reset_times_on_sync {
                            entry.times = 0;
                        }
                    }
                }
            }
        }

        // Full energy broadcast: everyone pays for the exchange first, then
        // estimates snap to the post-exchange truth and dead neighbors drop
        // out of the tables.
        let tx = self.cfg.energy.tx_cost(self.cfg.ctrl_bits, self.cfg.range);
        let rx = self.cfg.energy.rx_cost(self.cfg.ctrl_bits);
        for i in 0..self.graph.len() {
            let id = NodeId(i as u32);
            if !self.graph.node(id).alive {
                continue;
            }
            self.charge(id, tx, Bucket::CtrlTx);
            let neighbors: Vec<NodeId> = self.graph.neighbors(id).to_vec();
            for nb in neighbors {
                if self.graph.node(nb).alive {
                    self.charge(nb, rx, Bucket::CtrlRx);
                }
            }
        }
        {
            let Router::Daaca { tables, .. } = &mut self.router else {
                unreachable!()
            };
            broadcast_energy_sync(&self.graph, tables, &self.cfg.energy, &cfg);
        }

        // Window-local state resets.
        if let Router::Daaca { best, conj, .. } = &mut self.router {
            conj.reset();
            if !cfg.all_time_best {
                best.clear();
            }
        }
    }

    fn capture_structure_metrics(&mut self, outcome: &RoundOutcome) {
        match &self.router {
            Router::Daaca { .. } | Router::Aca(_) => {
                // Per-round forwarding structure: every participant except
                // the sink transmits exactly once.
                let mut participants: BTreeSet<NodeId> = BTreeSet::new();
                for &(a, b) in &outcome.forwarding_edges {
                    participants.insert(a);
                    participants.insert(b);
                }
                self.measured_degree =
                    Some((outcome.forwarding_edges.len(), participants.len().max(1)));
                let edges: Vec<(NodeId, NodeId)> = self
                    .window_edges
                    .iter()
                    .map(|&(a, b)| (NodeId(a), NodeId(b)))
                    .collect();
                self.measured_radius = metrics::mean_edge_length(&self.graph, edges);
            }
            Router::Tree {
                tree,
                structure_edges,
                structure_entry_count,
            } => {
                let alive = self.graph.alive_count();
                match self.cfg.algorithm {
                    Algorithm::Pedap | Algorithm::PedapPa => {
                        // Tree nodes: reachable alive nodes plus the sink.
                        let tree_nodes = tree.edges().len() + 1;
                        self.measured_degree = Some((tree.edges().len(), tree_nodes));
                        self.measured_radius = metrics::mean_edge_length(&self.graph, tree.edges());
                    }
                    Algorithm::Lmst | Algorithm::LPedap => {
                        self.measured_degree = Some((*structure_entry_count, alive));
                        self.measured_radius =
                            metrics::mean_edge_length(&self.graph, structure_edges.iter().copied());
                    }
                    _ => {}
                }
            }
        }
    }

    fn push_series_point(&mut self) {
        self.series.push(SeriesPoint {
            round: self.round,
            packets_sent: self.packets_sent,
            avg_remaining: metrics::avg_remaining_energy(&self.graph, false),
            avg_remaining_with_sink: metrics::avg_remaining_energy(&self.graph, true),
            energy_difference: metrics::energy_difference(&self.graph, false),
            energy_difference_with_sink: metrics::energy_difference(&self.graph, true),
        });
    }

    fn assert_round_invariants(&self, outcome: &RoundOutcome, active_sources: u64) {
        assert!(outcome.hop_successes <= outcome.hop_attempts);
        assert_eq!(outcome.delivered + outcome.dropped, active_sources);
        // Forwarding structure is a functional graph (one out-edge per node)
        // oriented toward the sink; tree parents guarantee acyclicity, ant
        // routing guarantees strictly decreasing sink distance.
        let mut seen_from = BTreeSet::new();
        for &(a, b) in &outcome.forwarding_edges {
            assert!(seen_from.insert(a), "node {a} transmitted twice in a round");
            if !matches!(self.router, Router::Tree { .. }) {
                assert!(
                    self.graph.dist_to_sink(b) < self.graph.dist_to_sink(a),
                    "hop {a}->{b} is not sink-ward"
                );
            }
        }
        // Conservation: ledger total equals initial minus residual energy,
        // exact to 1e-12 relative to the system's energy scale.
        let drift = self.conservation_drift();
        assert!(
            drift <= 1e-12 * self.total_initial_energy().max(1.0),
            "energy ledger drift {drift}"
        );
    }

    fn total_initial_energy(&self) -> f64 {
        self.cfg.energy.e_init * self.graph.len() as f64
    }

    /// Removes an alive non-sink node mid-run. Exactly the victim's
    /// neighbors' state is touched; the report lists them.
    pub fn scenario_remove_node(&mut self, victim: NodeId) -> Result<ScenarioReport, NetError> {
        let affected = self.graph.remove_node(victim)?;
        match &mut self.router {
            Router::Daaca { tables, .. } => {
                for &nb in &affected {
                    tables[nb.index()].remove_entry(victim);
                }
                tables[victim.index()].entries.clear();
            }
            Router::Aca(state) => {
                for &nb in &affected {
                    state.edges[nb.index()].retain(|e| e.neighbor != victim);
                }
                state.edges[victim.index()].clear();
            }
            Router::Tree { tree, .. } => {
                // Children of the victim lose their parent until the next
                // rebuild; their packets drop in the meantime.
                for p in tree.parent.iter_mut() {
                    if *p == Some(victim) {
                        *p = None;
                    }
                }
                tree.parent[victim.index()] = None;
            }
        }
        Ok(ScenarioReport { touched: affected })
    }

    /// Inserts a fresh node mid-run. Only the in-range nodes gain state; the
    /// new node builds its own sink-ward table.
    pub fn scenario_add_node(
        &mut self,
        pos: Position,
    ) -> Result<(NodeId, ScenarioReport), NetError> {
        let (id, linked) = self.graph.add_node(pos, self.cfg.energy.e_init)?;
        match &mut self.router {
            Router::Daaca { tables, conj, .. } => {
                let new_table =
                    RoutingTable::build(id, &self.graph, &self.cfg.energy, &self.cfg.daaca);
                tables.push(new_table);
                let new_dist = self.graph.dist_to_sink(id);
                for &nb in &linked {
                    if nb == self.graph.sink() {
                        continue;
                    }
                    if new_dist < self.graph.dist_to_sink(nb) {
                        let e_dist = self
                            .cfg
                            .energy
                            .tx_cost(self.cfg.energy.packet_bits, self.graph.dist(nb, id));
                        tables[nb.index()]
                            .entries
                            .push(crate::routing::RoutingEntry {
                                neighbor: id,
                                e_dist,
                                e_dist_prime: e_dist,
                                e_estimate: self.cfg.energy.e_init,
                                pheromone: self.cfg.daaca.eta_init,
                                tau: 1.0 / e_dist,
                                prob: 0.0,
                                times: 0,
                                selectable: true,
                            });
                    }
                }
                conj.ensure_len(id.index() + 1);
            }
            Router::Aca(state) => {
                state.refresh_topology(&self.graph);
            }
            Router::Tree { .. } => {
                // Joins the structure at the next rebuild.
            }
        }
        Ok((id, ScenarioReport { touched: linked }))
    }

    /// Runs to completion under the configured stop policy and produces the
    /// metric bundle.
    pub fn run_to_completion(&mut self) -> (MetricsReport, RunEnd) {
        let mut last_outcome: Option<RoundOutcome> = None;
        let end = loop {
            match self.run_round() {
                Err(end) => break end,
                Ok(outcome) => {
                    let stop_death =
                        self.cfg.stop == StopPolicy::FirstDeath && self.first_death_round.is_some();
                    let stop_budget = self.packets_sent >= self.cfg.packet_budget;
                    last_outcome = Some(outcome);
                    if stop_death {
                        break RunEnd::FirstDeath;
                    }
                    if stop_budget {
                        break RunEnd::BudgetExhausted;
                    }
                }
            }
        };
        // Late measurement for runs shorter than one update window.
        if self.measured_degree.is_none() {
            if let Some(outcome) = &last_outcome {
                self.capture_structure_metrics(outcome);
            }
        }
        if self.series.last().map(|p| p.round) != Some(self.round) {
            self.push_series_point();
        }
        (self.report(), end)
    }

    fn report(&self) -> MetricsReport {
        let lifetime = match self.cfg.stop {
            StopPolicy::FirstDeath => Some(match self.first_death_round {
                Some(round) => LifetimeOutcome {
                    round,
                    censored: false,
                },
                None => LifetimeOutcome {
                    round: self.round,
                    censored: true,
                },
            }),
            StopPolicy::Budget => self.first_death_round.map(|round| LifetimeOutcome {
                round,
                censored: false,
            }),
        };
        MetricsReport {
            algorithm: self.cfg.algorithm,
            seed: self.rng.seed(),
            n: self.cfg.n,
            width: self.cfg.width,
            length: self.cfg.length,
            packet_budget: self.cfg.packet_budget,
            rounds_executed: self.round,
            packets_sent: self.packets_sent,
            delivered: self.delivered_total,
            dropped: self.dropped_total,
            avg_remaining: metrics::avg_remaining_energy(&self.graph, false),
            avg_remaining_with_sink: metrics::avg_remaining_energy(&self.graph, true),
            energy_difference: metrics::energy_difference(&self.graph, false),
            energy_difference_with_sink: metrics::energy_difference(&self.graph, true),
            avg_degree: self
                .measured_degree
                .and_then(|(e, m)| metrics::average_degree(e, m)),
            degree_counts: self.measured_degree,
            avg_tx_radius: self.measured_radius,
            hop_success_ratio: metrics::hop_success_ratio(
                self.hop_successes_total,
                self.hop_attempts_total,
            ),
            lifetime,
            sink_exhaust_round: self.sink_exhaust_round,
            total_energy_spent: self.ledger.total(),
            series: self.series.clone(),
        }
    }

    /// Conservation check: initial energy minus residuals equals the ledger
    /// total, to 1e-12 relative. Nodes added mid-run extend the baseline.
    pub fn conservation_drift(&self) -> f64 {
        let initial = self.total_initial_energy();
        let residual: f64 = self.graph.nodes.iter().map(|n| n.energy).sum();
        ((initial - residual) - self.ledger.total()).abs()
    }

    /// Routing tables snapshot for scenario locality assertions.
    pub fn tables_snapshot(&self) -> Option<Vec<RoutingTable>> {
        match &self.router {
            Router::Daaca { tables, .. } => Some(tables.clone()),
            _ => None,
        }
    }

    /// Pheromone bounds check across every table (MM invariant support).
    pub fn pheromones_within(&self, lo: f64, hi: f64) -> bool {
        match &self.router {
            Router::Daaca { tables, .. } => tables.iter().all(|t| {
                t.entries
                    .iter()
                    .all(|e| e.pheromone >= lo - 1e-12 && e.pheromone <= hi + 1e-12)
            }),
            _ => true,
        }
    }
}

/// Runs one configured simulation for each seed, sequentially.
pub fn run_experiment(cfg: &SimConfig, seeds: &[u64]) -> Result<Vec<MetricsReport>, NetError> {
    seeds
        .iter()
        .map(|&seed| {
            let mut sim = Simulation::new(cfg.clone(), seed)?;
            Ok(sim.run_to_completion().0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_fixture() -> (SimConfig, NetworkGraph) {
        // Forced path: source 2 only reaches relay 1; relay 1 only reaches
        // the sink.
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 4.0, y: 0.0 },
            Position { x: 12.0, y: 0.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 20.0, 10.0, 10.0).unwrap();
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.debug_checks = true;
        (cfg, g)
    }

    #[test]
    fn line_round_charges_each_role_once() {
        let (cfg, g) = line_fixture();
        let em = cfg.energy;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        let outcome = sim.run_round().unwrap();
        assert_eq!(outcome.delivered, 1);
        assert_eq!(outcome.dropped, 0);
        assert_eq!(outcome.hop_attempts, 2);
        assert_eq!(outcome.hop_successes, 2);

        let k = em.packet_bits;
        let e = em.e_init;
        let src = sim.graph.node(NodeId(2)).energy;
        let relay = sim.graph.node(NodeId(1)).energy;
        let sink = sim.graph.node(NodeId(0)).energy;
        assert!((src - (e - em.tx_cost(k, 8.0))).abs() < 1e-15);
        assert!((relay - (e - em.rx_cost(k) - em.tx_cost(k, 4.0))).abs() < 1e-15);
        assert!((sink - (e - em.rx_cost(k))).abs() < 1e-15);
        assert!(sim.conservation_drift() < 1e-12 * 30.0);
    }

    #[test]
    fn y_junction_aggregates_and_counts_conjunction() {
        // Two sources funnel through relay 1: the relay receives twice but
        // transmits once.
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 4.0, y: 0.0 },
            Position { x: 12.0, y: 3.0 },
            Position { x: 12.0, y: -3.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 20.0, 10.0, 10.0).unwrap();
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.debug_checks = true;
        let em = cfg.energy;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2), NodeId(3)], 7).unwrap();
        let outcome = sim.run_round().unwrap();
        assert_eq!(outcome.delivered, 2);
        assert_eq!(
            outcome.hop_attempts, 3,
            "relay transmits once for both packets"
        );
        assert_eq!(outcome.forwarding_edges.len(), 3);

        let k = em.packet_bits;
        let d = sim.graph.dist(NodeId(2), NodeId(1));
        let relay = sim.graph.node(NodeId(1)).energy;
        let expected = em.e_init - 2.0 * em.rx_cost(k) - em.tx_cost(k, 4.0);
        assert!((relay - expected).abs() < 1e-15, "relay pays 2 rx + 1 tx");
        let _ = d;

        if let Router::Daaca { conj, .. } = &sim.router {
            assert_eq!(
                conj.get(NodeId(1)),
                1,
                "conjunction counted once this round"
            );
            assert_eq!(conj.get(NodeId(0)), 0, "sink saw one distinct transmission");
        } else {
            panic!("expected daaca router");
        }
    }

    #[test]
    fn no_alive_sources_ends_simulation() {
        let (cfg, g) = line_fixture();
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        sim.graph.node_mut(NodeId(2)).alive = false;
        assert_eq!(sim.run_round().unwrap_err(), RunEnd::NoAliveSources);
    }

    #[test]
    fn dead_sink_ends_simulation_when_mortal() {
        let (mut cfg, g) = line_fixture();
        cfg.sink_mortal = true;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        sim.graph.node_mut(NodeId(0)).alive = false;
        assert_eq!(sim.run_round().unwrap_err(), RunEnd::SinkDead);
    }

    #[test]
    fn budget_of_1000_with_10_sources_runs_100_rounds() {
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.n = 200;
        cfg.packet_budget = 1000;
        cfg.n_sources = 10;
        let mut sim = Simulation::new(cfg, 42).unwrap();
        let (report, end) = sim.run_to_completion();
        assert_eq!(end, RunEnd::BudgetExhausted);
        assert_eq!(report.rounds_executed, 100);
        assert_eq!(report.packets_sent, 1000);
    }

    #[test]
    fn same_seed_reproduces_the_run_exactly() {
        let run = || {
            let mut cfg = SimConfig::new(Algorithm::Acs);
            cfg.n = 100;
            cfg.packet_budget = 500;
            cfg.daaca.round_to_update = 20;
            let mut sim = Simulation::new(cfg, 42).unwrap();
            let (report, _) = sim.run_to_completion();
            format!("{report:?}")
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn conservation_holds_for_every_algorithm() {
        for algorithm in Algorithm::ALL {
            let mut cfg = SimConfig::new(algorithm);
            cfg.n = 80;
            cfg.width = 30.0;
            cfg.length = 30.0;
            cfg.packet_budget = 300;
            cfg.daaca.round_to_update = 10;
            cfg.aca.idle_threshold = 10;
            cfg.debug_checks = true;
            let mut sim = Simulation::new(cfg, 11).unwrap();
            let (report, _) = sim.run_to_completion();
            let drift = sim.conservation_drift();
            let scale = 10.0 * report.n as f64;
            assert!(drift <= 1e-12 * scale, "{algorithm}: drift {drift}");
        }
    }

    #[test]
    fn average_remaining_energy_matches_ledger() {
        // Non-sink drain plus sink drain must equal the ledger total, and
        // the mean ties back to E_init minus per-node consumption.
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.n = 80;
        cfg.width = 30.0;
        cfg.length = 30.0;
        cfg.packet_budget = 400;
        cfg.daaca.round_to_update = 20;
        let mut sim = Simulation::new(cfg, 5).unwrap();
        let (report, _) = sim.run_to_completion();
        let e_init = sim.cfg.energy.e_init;
        let non_sink = (sim.graph.len() - 1) as f64;
        let sink_spent = e_init - sim.graph.node(sim.graph.sink()).energy;
        let non_sink_spent = non_sink * (e_init - report.avg_remaining);
        let drift = (non_sink_spent + sink_spent - sim.ledger.total()).abs();
        assert!(
            drift <= 1e-12 * (e_init * sim.graph.len() as f64),
            "drift {drift}"
        );
    }

    #[test]
    fn average_energy_is_non_increasing() {
        let mut cfg = SimConfig::new(Algorithm::Es);
        cfg.n = 60;
        cfg.width = 30.0;
        cfg.length = 30.0;
        cfg.packet_budget = 400;
        cfg.daaca.round_to_update = 10;
        let mut sim = Simulation::new(cfg, 3).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..40 {
            sim.run_round().unwrap();
            let now = metrics::avg_remaining_energy(&sim.graph, false);
            assert!(now <= last + 1e-15);
            last = now;
        }
    }

    #[test]
    fn lifetime_mode_stops_at_first_death() {
        // Tight budget: the relay pays rx + tx each round and dies first.
        let (mut cfg, g) = line_fixture();
        cfg.energy.e_init = 0.001;
        cfg.stop = StopPolicy::FirstDeath;
        cfg.packet_budget = 10_000;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        let (report, end) = sim.run_to_completion();
        assert_eq!(end, RunEnd::FirstDeath);
        let lt = report.lifetime.unwrap();
        assert_eq!(lt.round, 2, "relay exhausts during round 2");
        assert!(!lt.censored);
        assert!(!sim.graph.node(NodeId(1)).alive);
    }

    #[test]
    fn lifetime_censors_when_budget_ends_first() {
        let (mut cfg, g) = line_fixture();
        cfg.stop = StopPolicy::FirstDeath;
        cfg.packet_budget = 5;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        let (report, end) = sim.run_to_completion();
        assert_eq!(end, RunEnd::BudgetExhausted);
        let lt = report.lifetime.unwrap();
        assert!(lt.censored);
        assert_eq!(lt.round, 5);
    }

    #[test]
    fn mm_pheromones_stay_bounded_through_a_run() {
        let mut cfg = SimConfig::new(Algorithm::Mm);
        cfg.n = 60;
        cfg.width = 30.0;
        cfg.length = 30.0;
        cfg.daaca.round_to_update = 5;
        cfg.packet_budget = 500;
        let mut sim = Simulation::new(cfg, 9).unwrap();
        for _ in 0..50 {
            sim.run_round().unwrap();
            assert!(sim.pheromones_within(0.5, 0.9), "bounds violated mid-run");
        }
    }

    #[test]
    fn basic_window_decays_and_deposits_on_max_estimate() {
        // One maintenance pass on the forced line: after the window the
        // relay's sink entry carries (1 - rho) * eta_init plus the deposit
        // every node places on its best-estimated neighbor every window.
        let (mut cfg, g) = line_fixture();
        cfg.daaca.round_to_update = 1;
        let kappa = cfg.daaca.kappa(&cfg.energy, 10.0);
        let em = cfg.energy;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        sim.run_round().unwrap();
        let tables = sim.tables_snapshot().unwrap();
        let relay_entry = tables[1].entry(NodeId(0)).unwrap();
        let expected = 0.8 * 0.8 + kappa * em.tx_cost(em.packet_bits, 4.0);
        assert!((relay_entry.pheromone - expected).abs() < 1e-12);
    }

    #[test]
    fn star_sync_cost_matches_hand_count() {
        // Sink at the center of a 5-leaf star; leaves are out of range of
        // each other. One maintenance pass charges every broadcaster tx at
        // full range and every listener one reception: 6 tx + 10 rx total,
        // of which the center's own broadcast accounts for tx + 5 rx.
        let mut positions = vec![Position { x: 10.0, y: 10.0 }];
        for i in 0..5 {
            let angle = i as f64 * std::f64::consts::TAU / 5.0;
            positions.push(Position {
                x: 10.0 + 9.9 * angle.cos(),
                y: 10.0 + 9.9 * angle.sin(),
            });
        }
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 20.0, 20.0, 10.0).unwrap();
        assert_eq!(g.neighbors(NodeId(0)).len(), 5);
        assert_eq!(g.neighbors(NodeId(1)).len(), 1);

        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.daaca.round_to_update = 1;
        let em = cfg.energy;
        let ctrl = cfg.ctrl_bits;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(1)], 7).unwrap();
        sim.run_round().unwrap();

        let txc = em.tx_cost(ctrl, 10.0);
        let rxc = em.rx_cost(ctrl);
        let expected_control = 6.0 * txc + 10.0 * rxc;
        let control = sim.ledger.control_tx + sim.ledger.control_rx;
        assert!(
            (control - expected_control).abs() < 1e-15,
            "control {control} vs {expected_control}"
        );
        // The derivation for one 5-neighbor broadcaster.
        assert!((txc + 5.0 * rxc - 3.968e-5).abs() < 1e-12);
    }

    #[test]
    fn sync_resets_estimates_to_truth() {
        let (mut cfg, g) = line_fixture();
        cfg.daaca.round_to_update = 3;
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        for _ in 0..3 {
            sim.run_round().unwrap();
        }
        let tables = sim.tables_snapshot().unwrap();
        let entry = tables[2].entry(NodeId(1)).unwrap();
        assert_eq!(entry.times, 0, "estimate age resets after sync");
        assert!(
            (entry.e_estimate - sim.graph.node(NodeId(1)).energy).abs() < 1e-15,
            "estimate snaps to the broadcast truth"
        );
    }

    #[test]
    fn remove_node_touches_exactly_former_neighbors() {
        let mut cfg = SimConfig::new(Algorithm::Basic);
        cfg.n = 60;
        cfg.width = 30.0;
        cfg.length = 30.0;
        let mut sim = Simulation::new(cfg, 21).unwrap();
        let victim = NodeId(9);
        let expected: Vec<NodeId> = sim.graph.neighbors(victim).to_vec();
        let before = sim.tables_snapshot().unwrap();
        let report = sim.scenario_remove_node(victim).unwrap();
        assert_eq!(report.touched, expected);
        let after = sim.tables_snapshot().unwrap();
        for i in 0..before.len() {
            let id = NodeId(i as u32);
            if id == victim || expected.contains(&id) {
                continue;
            }
            assert_eq!(before[i], after[i], "table {i} must be untouched");
        }
        assert!(
            sim.scenario_remove_node(NodeId(0)).is_err(),
            "sink refuses removal"
        );
    }

    #[test]
    fn removing_a_leaf_leaves_delivery_unchanged() {
        // Leaf node 3 sits off the forced path and relays nothing.
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 4.0, y: 0.0 },
            Position { x: 12.0, y: 0.0 },
            Position { x: 4.0, y: 8.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 20.0, 10.0, 10.0).unwrap();
        let cfg = SimConfig::new(Algorithm::Basic);
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        let before = sim.run_round().unwrap();
        sim.scenario_remove_node(NodeId(3)).unwrap();
        let after = sim.run_round().unwrap();
        assert_eq!(before.delivered, after.delivered);
        assert_eq!(after.dropped, 0);
    }

    #[test]
    fn bottleneck_removal_drops_packets_until_relay_added() {
        // Source 2 can only reach the sink through relay 1.
        let (cfg, g) = line_fixture();
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        assert_eq!(sim.run_round().unwrap().delivered, 1);

        sim.scenario_remove_node(NodeId(1)).unwrap();
        let starved = sim.run_round().unwrap();
        assert_eq!(starved.delivered, 0);
        assert_eq!(starved.dropped, 1, "dead-end drops the packet");

        // A fresh relay in range of both source and sink restores delivery.
        let (id, report) = sim.scenario_add_node(Position { x: 5.0, y: 0.0 }).unwrap();
        assert!(report.touched.contains(&NodeId(0)));
        assert!(report.touched.contains(&NodeId(2)));
        let restored = sim.run_round().unwrap();
        assert_eq!(restored.delivered, 1, "new relay {id} carries traffic");
    }

    #[test]
    fn added_node_out_of_range_touches_nobody() {
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 4.0, y: 0.0 },
            Position { x: 12.0, y: 0.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 40.0, 40.0, 10.0).unwrap();
        let cfg = SimConfig::new(Algorithm::Basic);
        let mut sim = Simulation::with_graph(cfg, g, &[NodeId(2)], 7).unwrap();
        let (id, report) = sim
            .scenario_add_node(Position { x: 35.0, y: 35.0 })
            .unwrap();
        assert!(report.touched.is_empty());
        let tables = sim.tables_snapshot().unwrap();
        assert!(
            tables[id.index()].entries.is_empty(),
            "isolated node has an empty table"
        );
    }

    #[test]
    fn algorithm_slugs_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.slug()), Some(a));
        }
        assert_eq!(Algorithm::parse("ES"), Some(Algorithm::Es));
        assert_eq!(Algorithm::parse("nonsense"), None);
    }
}
