//! Relative neighborhood graph over the alive visibility graph.
//!
//! An edge (u, v) survives iff no witness w is strictly closer to both
//! endpoints than they are to each other. Ties (equidistant witnesses) keep
//! the edge, so an equilateral triangle keeps all three sides.

use crate::net::{NetworkGraph, NodeId};

/// Undirected RNG edges as (low id, high id) pairs, sorted.
pub fn build_rng(graph: &NetworkGraph) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for node in &graph.nodes {
        if !node.alive {
            continue;
        }
        let u = node.id;
        for &v in graph.neighbors(u) {
            if v <= u || !graph.node(v).alive {
                continue;
            }
            let d_uv = graph.dist(u, v);
            // Any witness closer than d_uv to u lies within range of u, so
            // scanning u's neighborhood is exhaustive.
            let blocked = graph.neighbors(u).iter().any(|&w| {
                w != v && graph.node(w).alive && graph.dist(u, w) < d_uv && graph.dist(v, w) < d_uv
            });
            if !blocked {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Connectivity of an undirected edge list restricted to alive nodes,
/// starting from the sink. Test and property support.
pub fn connected_to_sink(graph: &NetworkGraph, edges: &[(NodeId, NodeId)]) -> Vec<bool> {
    let n = graph.len();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a.index()].push(b);
        adj[b.index()].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![graph.sink()];
    seen[graph.sink().index()] = true;
    while let Some(cur) = stack.pop() {
        for &nb in &adj[cur.index()] {
            if !seen[nb.index()] {
                seen[nb.index()] = true;
                stack.push(nb);
            }
        }
    }
    seen
}
