//! ACA: ant-colony data aggregation driven by hop counts.
//!
//! Next hops are drawn with weight `tau * eta^beta` where `eta = 1/(hop+1)`
//! of the candidate. Pheromone deposits are triggered by feedback messages:
//! whenever a packet reaches a node while its remaining hop budget (TTL)
//! still exceeds that node's extended hop count (EHC), or reaches the sink,
//! a feedback message walks the reverse path depositing on every traversed
//! edge — and paying radio energy for every feedback hop, which is this
//! algorithm's characteristic overhead.

use super::{HopCountTable, UNREACHABLE};
use crate::net::{NetworkGraph, NodeId};
use crate::rng::RngStream;
use crate::routing::DeadEnd;

/// ACA tunables. The originals never quantify these; defaults are documented
/// choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcaConfig {
    /// Weight exponent on the hop-count heuristic.
    pub beta: f64,
    /// Initial pheromone per directed edge.
    pub tau_init: f64,
    /// Fixed deposit per edge per feedback pass.
    pub delta: f64,
    /// Evaporation fraction applied to idle edges.
    pub rho_aca: f64,
    /// Rounds of edge idleness before evaporation fires.
    pub idle_threshold: u64,
    /// EHC = hop + slack.
    pub ehc_slack: u32,
}

impl Default for AcaConfig {
    fn default() -> Self {
        Self {
            beta: 2.0,
            tau_init: 0.8,
            delta: 0.05,
            rho_aca: 0.3,
            idle_threshold: 100,
            ehc_slack: 2,
        }
    }
}

/// One sink-ward candidate edge.
#[derive(Debug, Clone)]
pub struct AcaEdge {
    pub neighbor: NodeId,
    pub tau: f64,
    pub idle_rounds: u64,
}

/// Full ACA routing state.
#[derive(Debug, Clone)]
pub struct AcaState {
    pub cfg: AcaConfig,
    pub hops: HopCountTable,
    /// Sink-ward candidates per node, sorted by neighbor id.
    pub edges: Vec<Vec<AcaEdge>>,
    /// Per-packet hop budget at generation, from the sink's hop eccentricity.
    pub ttl_init: u32,
}

impl AcaState {
    pub fn new(graph: &NetworkGraph, cfg: AcaConfig) -> Self {
        let hops = HopCountTable::compute(graph);
        let edges = Self::sink_ward_edges(graph, cfg.tau_init);
        let ttl_init = Self::diameter_estimate(&hops) + cfg.ehc_slack;
        Self {
            cfg,
            hops,
            edges,
            ttl_init,
        }
    }

    /// Hop-diameter estimate: twice the sink's hop eccentricity bounds the
    /// diameter from above and leaves sink-ward walks room to wander.
    fn diameter_estimate(hops: &HopCountTable) -> u32 {
        2 * hops.max_finite()
    }

    fn sink_ward_edges(graph: &NetworkGraph, tau_init: f64) -> Vec<Vec<AcaEdge>> {
        let mut edges: Vec<Vec<AcaEdge>> = vec![Vec::new(); graph.len()];
        for node in &graph.nodes {
            if !node.alive || node.is_sink {
                continue;
            }
            let own_dist = graph.dist_to_sink(node.id);
            for &nb in graph.neighbors(node.id) {
                if graph.node(nb).alive && graph.dist_to_sink(nb) < own_dist {
                    edges[node.id.index()].push(AcaEdge {
                        neighbor: nb,
                        tau: tau_init,
                        idle_rounds: 0,
                    });
                }
            }
        }
        edges
    }

    /// Recomputes hop counts, TTL and candidate sets over the alive graph,
    /// carrying existing pheromone values across.
    pub fn refresh_topology(&mut self, graph: &NetworkGraph) {
        self.hops = HopCountTable::compute(graph);
        self.ttl_init = Self::diameter_estimate(&self.hops) + self.cfg.ehc_slack;
        let old = std::mem::take(&mut self.edges);
        self.edges = Self::sink_ward_edges(graph, self.cfg.tau_init);
        for (i, list) in self.edges.iter_mut().enumerate() {
            for edge in list.iter_mut() {
                if let Some(prev) = old
                    .get(i)
                    .and_then(|l| l.iter().find(|e| e.neighbor == edge.neighbor))
                {
                    edge.tau = prev.tau;
                    edge.idle_rounds = prev.idle_rounds;
                }
            }
        }
    }

    /// Extended hop count of a node.
    pub fn ehc(&self, id: NodeId) -> u32 {
        let h = self.hops.get(id);
        if h == UNREACHABLE {
            UNREACHABLE
        } else {
            h + self.cfg.ehc_slack
        }
    }

    /// Selection distribution over sink-ward candidates:
    /// `p(j) = tau(i,j) * (1/(hop(j)+1))^beta / sum`.
    pub fn probabilities(&self, from: NodeId) -> Result<Vec<(NodeId, f64)>, DeadEnd> {
        let mut weights = Vec::new();
        let mut total = 0.0;
        for edge in &self.edges[from.index()] {
            let hop = self.hops.get(edge.neighbor);
            if hop == UNREACHABLE {
                continue;
            }
            let eta = 1.0 / (hop as f64 + 1.0);
            let w = edge.tau * eta.powf(self.cfg.beta);
            if w > 0.0 {
                weights.push((edge.neighbor, w));
                total += w;
            }
        }
        if total <= 0.0 {
            return Err(DeadEnd);
        }
        for w in &mut weights {
            w.1 /= total;
        }
        Ok(weights)
    }

    /// Roulette-wheel sample over [`AcaState::probabilities`].
    pub fn select_next_hop(&self, from: NodeId, rng: &mut RngStream) -> Result<NodeId, DeadEnd> {
        let probs = self.probabilities(from)?;
        let u = rng.next_f64();
        let mut cum = 0.0;
        for &(id, p) in &probs {
            cum += p;
            if u < cum {
                return Ok(id);
            }
        }
        Ok(probs.last().unwrap().0)
    }

    /// Marks a directed edge as used this round (resets idleness).
    pub fn mark_used(&mut self, from: NodeId, to: NodeId) {
        if let Some(edge) = self.edges[from.index()]
            .iter_mut()
            .find(|e| e.neighbor == to)
        {
            edge.idle_rounds = 0;
        }
    }

    /// Deposits along a traversed path prefix (feedback pass). Returns the
    /// number of edges deposited; the caller charges one control
    /// transmission and reception per edge.
    pub fn feedback_deposit(&mut self, path: &[NodeId]) -> usize {
        let mut deposited = 0;
        for pair in path.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            if let Some(edge) = self.edges[from.index()]
                .iter_mut()
                .find(|e| e.neighbor == to)
            {
                edge.tau += self.cfg.delta;
                deposited += 1;
            }
        }
        deposited
    }

    /// Ages every edge by one round and evaporates those idle for at least
    /// the threshold, restarting their idle clock.
    pub fn age_and_evaporate(&mut self) {
        for list in &mut self.edges {
            for edge in list.iter_mut() {
                edge.idle_rounds += 1;
                if edge.idle_rounds >= self.cfg.idle_threshold {
                    edge.tau *= 1.0 - self.cfg.rho_aca;
                    edge.idle_rounds = 0;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Position;

    /// Sink at the origin; two candidates at hop 1 and hop 3 from the sink.
    fn hop_fixture() -> (NetworkGraph, AcaState) {
        // Chain sink(0) - 1 - 2 - 3, plus node 4 adjacent to both 1 and 3.
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 8.0, y: 0.0 },
            Position { x: 16.0, y: 0.0 },
            Position { x: 24.0, y: 0.0 },
            Position { x: 18.0, y: 6.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 30.0, 10.0, 10.0).unwrap();
        let state = AcaState::new(&g, AcaConfig::default());
        (g, state)
    }

    #[test]
    fn uniform_when_taus_and_hops_match() {
        let positions = [
            Position { x: 0.0, y: 0.0 },
            Position { x: 4.0, y: 3.0 },
            Position { x: 4.0, y: -3.0 },
            Position { x: 8.0, y: 0.0 },
        ];
        let g =
            NetworkGraph::from_positions(&positions, NodeId(0), 10.0, 20.0, 10.0, 10.0).unwrap();
        let state = AcaState::new(&g, AcaConfig::default());
        // Node 3's sink-ward candidates: the symmetric hop-1 pair plus the
        // sink itself.
        let probs = state.probabilities(NodeId(3)).unwrap();
        assert_eq!(probs.len(), 3);
        let p1 = probs.iter().find(|p| p.0 == NodeId(1)).unwrap().1;
        let p2 = probs.iter().find(|p| p.0 == NodeId(2)).unwrap().1;
        assert!((p1 - p2).abs() < 1e-12);
    }

    #[test]
    fn hop_weights_follow_inverse_square_law() {
        // Equal taus, candidates at hop 1 and hop 3, beta = 2:
        // weights (1/2)^2 : (1/4)^2 = 4 : 1, probabilities 0.8 / 0.2.
        let (_, mut state) = hop_fixture();
        state.edges[2] = vec![
            AcaEdge {
                neighbor: NodeId(1),
                tau: 0.8,
                idle_rounds: 0,
            },
            AcaEdge {
                neighbor: NodeId(3),
                tau: 0.8,
                idle_rounds: 0,
            },
        ];
        state.hops.hops[1] = 1;
        state.hops.hops[3] = 3;
        let probs = state.probabilities(NodeId(2)).unwrap();
        assert!((probs[0].1 - 0.8).abs() < 1e-12);
        assert!((probs[1].1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (_, state) = hop_fixture();
        for id in [NodeId(2), NodeId(3), NodeId(4)] {
            let probs = state.probabilities(id).unwrap();
            let total: f64 = probs.iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn feedback_deposits_exactly_path_edges() {
        let (_, mut state) = hop_fixture();
        let path = [NodeId(3), NodeId(2), NodeId(1), NodeId(0)];
        let deposited = state.feedback_deposit(&path);
        assert_eq!(deposited, 3);
        let tau = |s: &AcaState, from: u32, to: u32| {
            s.edges[from as usize]
                .iter()
                .find(|e| e.neighbor == NodeId(to))
                .unwrap()
                .tau
        };
        assert!((tau(&state, 3, 2) - 0.85).abs() < 1e-12);
        assert!((tau(&state, 2, 1) - 0.85).abs() < 1e-12);
        assert!((tau(&state, 1, 0) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn idle_edges_evaporate_at_threshold() {
        let (_, mut state) = hop_fixture();
        let threshold = state.cfg.idle_threshold;
        for _ in 0..threshold - 1 {
            state.age_and_evaporate();
        }
        assert_eq!(state.edges[1][0].tau, 0.8, "below threshold keeps tau");
        state.age_and_evaporate();
        assert!((state.edges[1][0].tau - 0.8 * 0.7).abs() < 1e-12);
        assert_eq!(state.edges[1][0].idle_rounds, 0, "idle clock restarts");
    }

    #[test]
    fn used_edges_do_not_evaporate() {
        let (_, mut state) = hop_fixture();
        for _ in 0..state.cfg.idle_threshold {
            state.mark_used(NodeId(1), NodeId(0));
            state.age_and_evaporate();
        }
        // One aging tick after the final use leaves idle_rounds at 1.
        assert!(state.edges[1][0].tau > 0.79);
    }

    #[test]
    fn ttl_gate_boundary_arithmetic() {
        let (_, state) = hop_fixture();
        // TTL starts at the diameter estimate plus slack: 2 * 3 + 2 = 8 on
        // the chain fixture. The feedback gate fires while the remaining
        // budget exceeds the node's extended hop count.
        assert_eq!(state.ttl_init, 8);
        assert_eq!(state.ehc(NodeId(2)), 4);
        // After one hop the budget (7) clears node 2's EHC (4): trigger.
        assert!(state.ttl_init - 1 > state.ehc(NodeId(2)));
        // A hypothetical five-hop wander leaves 3 <= 4: no trigger.
        assert!(state.ttl_init - 5 <= state.ehc(NodeId(2)));
    }
}
