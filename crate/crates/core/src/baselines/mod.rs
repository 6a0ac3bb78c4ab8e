//! Comparison algorithms reconstructed from their published summaries:
//! ACA (hop-count ant routing with feedback deposits), PEDAP and PEDAP-PA
//! (global minimum spanning trees), LMST (local minimum spanning trees) and
//! L-PEDAP (shortest-path routing over a localized sparse structure).
//!
//! These are best-effort reconstructions of the cited originals; metric
//! comparisons against them are directional rather than exact.

pub mod aca;
pub mod lmst;
pub mod mst;
pub mod rng_graph;

use crate::net::{NetworkGraph, NodeId};
use std::collections::VecDeque;

/// Hop counts to the sink over the alive visibility graph. Unreachable nodes
/// get `u32::MAX`.
#[derive(Debug, Clone)]
pub struct HopCountTable {
    pub hops: Vec<u32>,
}

pub const UNREACHABLE: u32 = u32::MAX;

impl HopCountTable {
    pub fn compute(graph: &NetworkGraph) -> Self {
        let n = graph.len();
        let mut hops = vec![UNREACHABLE; n];
        let sink = graph.sink();
        let mut queue = VecDeque::new();
        hops[sink.index()] = 0;
        queue.push_back(sink);
        while let Some(cur) = queue.pop_front() {
            let next_hop = hops[cur.index()] + 1;
            for &nb in graph.neighbors(cur) {
                if graph.node(nb).alive && hops[nb.index()] == UNREACHABLE {
                    hops[nb.index()] = next_hop;
                    queue.push_back(nb);
                }
            }
        }
        Self { hops }
    }

    pub fn get(&self, id: NodeId) -> u32 {
        self.hops[id.index()]
    }

    /// Largest finite hop count (the sink's hop eccentricity).
    pub fn max_finite(&self) -> u32 {
        self.hops
            .iter()
            .filter(|&&h| h != UNREACHABLE)
            .copied()
            .max()
            .unwrap_or(0)
    }
}

/// Parent-pointer aggregation tree rooted at the sink.
#[derive(Debug, Clone)]
pub struct AggregationTree {
    /// `parent[i]` = next hop toward the sink; None for the sink itself and
    /// for unreachable nodes.
    pub parent: Vec<Option<NodeId>>,
    pub rebuilt_at: u64,
}

impl AggregationTree {
    pub fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.parent.get(id.index()).copied().flatten()
    }

    /// Nodes with no route to the sink (excluding the sink).
    pub fn unreachable(&self, graph: &NetworkGraph) -> Vec<NodeId> {
        self.parent
            .iter()
            .enumerate()
            .filter(|(i, p)| {
                p.is_none() && NodeId(*i as u32) != graph.sink() && graph.nodes[*i].alive
            })
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    /// Undirected tree edges (child, parent) over alive nodes.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|parent| (NodeId(i as u32), parent)))
            .collect()
    }

    /// Asserts acyclicity by walking every parent chain; panics on a cycle.
    pub fn assert_acyclic(&self, graph: &NetworkGraph) {
        let n = self.parent.len();
        for start in 0..n {
            let mut cur = NodeId(start as u32);
            let mut steps = 0;
            while let Some(p) = self.parent_of(cur) {
                cur = p;
                steps += 1;
                assert!(steps <= n, "cycle detected in aggregation tree");
            }
            if steps > 0 {
                assert_eq!(cur, graph.sink(), "parent chain must end at the sink");
            }
        }
    }
}
