//! Local minimum spanning trees (LMST) and the L-PEDAP routing structure.
//!
//! Each node computes a minimum spanning tree over its closed neighborhood
//! and keeps directed links to its own tree neighbors. The network structure
//! is the symmetrized set: an undirected edge survives only when both
//! endpoints kept it. L-PEDAP routes over the intersection of that structure
//! with the relative neighborhood graph via a shortest-path tree to the sink.

use super::rng_graph::build_rng;
use super::AggregationTree;
use crate::energy::EnergyModel;
use crate::net::{NetworkGraph, NodeId};
use std::collections::BinaryHeap;

/// Local-tree edge weighting. Energy-aware weights track residual energy
/// (nodes re-exchange energies every rebuild); geometric weights depend on
/// distance alone, which keeps the structure inside the relative
/// neighborhood graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmstWeighting {
    EnergyAware,
    Geometric,
}

/// Symmetric weight for local tree computation: radio cost of the edge,
/// inflated by both endpoints' inverse residual fractions in energy-aware
/// mode. Reduces to the plain radio cost on a fresh network.
pub fn lmst_weight(
    graph: &NetworkGraph,
    em: &EnergyModel,
    mode: LmstWeighting,
    a: NodeId,
    b: NodeId,
) -> f64 {
    let base = em.tx_cost(em.packet_bits, graph.dist(a, b));
    match mode {
        LmstWeighting::Geometric => base,
        LmstWeighting::EnergyAware => {
            let fa = (graph.node(a).energy / em.e_init).max(1e-12);
            let fb = (graph.node(b).energy / em.e_init).max(1e-12);
            base / (fa * fb)
        }
    }
}

/// Directed LMST adjacency: `links[i]` are the tree neighbors node i keeps
/// after computing the MST of its closed neighborhood.
pub fn lmst_directed_links(
    graph: &NetworkGraph,
    em: &EnergyModel,
    mode: LmstWeighting,
) -> Vec<Vec<NodeId>> {
    let n = graph.len();
    let mut links: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for node in &graph.nodes {
        if !node.alive {
            continue;
        }
        let u = node.id;
        // Closed neighborhood, owner first.
        let mut view: Vec<NodeId> = vec![u];
        view.extend(
            graph
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&v| graph.node(v).alive),
        );
        if view.len() < 2 {
            continue;
        }
        links[u.index()] = local_mst_neighbors_of_root(graph, em, mode, &view);
    }
    links
}

/// Prim over the local view (vertices `view`, edges = pairs within range),
/// returning the root's tree neighbors. The root is `view[0]`.
fn local_mst_neighbors_of_root(
    graph: &NetworkGraph,
    em: &EnergyModel,
    mode: LmstWeighting,
    view: &[NodeId],
) -> Vec<NodeId> {
    let m = view.len();
    let mut in_tree = vec![false; m];
    let mut best_cost = vec![f64::INFINITY; m];
    let mut best_parent = vec![usize::MAX; m];
    in_tree[0] = true;
    for j in 1..m {
        if graph.dist(view[0], view[j]) <= graph.range {
            best_cost[j] = lmst_weight(graph, em, mode, view[0], view[j]);
            best_parent[j] = 0;
        }
    }
    let mut root_neighbors = Vec::new();
    for _ in 1..m {
        let mut pick = usize::MAX;
        for j in 0..m {
            if !in_tree[j]
                && best_parent[j] != usize::MAX
                && (pick == usize::MAX || best_cost[j] < best_cost[pick])
            {
                pick = j;
            }
        }
        if pick == usize::MAX {
            break; // local view disconnected; remaining nodes unreachable
        }
        in_tree[pick] = true;
        if best_parent[pick] == 0 {
            root_neighbors.push(view[pick]);
        }
        for j in 0..m {
            if !in_tree[j] && graph.dist(view[pick], view[j]) <= graph.range {
                let w = lmst_weight(graph, em, mode, view[pick], view[j]);
                if w < best_cost[j] {
                    best_cost[j] = w;
                    best_parent[j] = pick;
                }
            }
        }
    }
    root_neighbors.sort_unstable();
    root_neighbors
}

/// Symmetrized LMST: undirected edge (u, v) kept iff each endpoint appears in
/// the other's local tree links. Returned as (low id, high id) pairs.
pub fn build_lmst(
    graph: &NetworkGraph,
    em: &EnergyModel,
    mode: LmstWeighting,
) -> Vec<(NodeId, NodeId)> {
    let links = lmst_directed_links(graph, em, mode);
    let mut edges = Vec::new();
    for (i, out) in links.iter().enumerate() {
        let u = NodeId(i as u32);
        for &v in out {
            if v > u && links[v.index()].contains(&u) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// L-PEDAP sparse structure: intersection of the geometric LMST with the
/// relative neighborhood graph. Distance-monotone local trees are a subgraph
/// of the RNG, so the intersection is the LMST itself and stays connected
/// whenever the visibility graph is; energy-awareness lives in the routing
/// weights instead of the structure.
pub fn build_l_pedap_structure(graph: &NetworkGraph, em: &EnergyModel) -> Vec<(NodeId, NodeId)> {
    let lmst = build_lmst(graph, em, LmstWeighting::Geometric);
    let rng: std::collections::HashSet<(NodeId, NodeId)> = build_rng(graph).into_iter().collect();
    lmst.into_iter().filter(|e| rng.contains(e)).collect()
}

/// Shortest-path tree to the sink over an undirected edge structure, with
/// per-hop cost equal to the transmitting child's energy-aware radio cost.
/// Ties resolve to the lowest parent id.
pub fn shortest_path_tree(
    graph: &NetworkGraph,
    em: &EnergyModel,
    edges: &[(NodeId, NodeId)],
    rebuilt_at: u64,
) -> AggregationTree {
    let n = graph.len();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a.index()].push(b);
        adj[b.index()].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let sink = graph.sink();
    dist[sink.index()] = 0.0;

    #[derive(PartialEq)]
    struct Entry(f64, NodeId);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Min-heap on cost, then lowest id.
            other
                .0
                .total_cmp(&self.0)
                .then_with(|| other.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, sink));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u.index()] {
            continue;
        }
        for &v in &adj[u.index()] {
            if !graph.node(v).alive {
                continue;
            }
            // v transmits toward u on its way to the sink.
            let frac = (graph.node(v).energy / em.e_init).max(1e-12);
            let hop = em.tx_cost(em.packet_bits, graph.dist(u, v)) / frac;
            let cand = d + hop;
            if cand < dist[v.index()] {
                dist[v.index()] = cand;
                parent[v.index()] = Some(u);
                heap.push(Entry(cand, v));
            }
        }
    }

    AggregationTree { parent, rebuilt_at }
}
