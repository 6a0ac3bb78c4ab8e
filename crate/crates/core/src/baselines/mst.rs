//! Global minimum spanning trees for the PEDAP family, grown from the sink
//! with Prim's algorithm.
//!
//! PEDAP weighs an edge by the radio cost of sending one data packet across
//! it. PEDAP-PA divides that cost by the child's residual-energy fraction,
//! so drained relays price themselves out of the tree (reconstruction of the
//! power-aware variant).

use super::AggregationTree;
use crate::energy::EnergyModel;
use crate::net::{NetworkGraph, NodeId};

/// Edge weight for Prim growth: `parent` is already in the tree, `child` is
/// the candidate join. The child is the one that will transmit.
pub type EdgeWeight<'a> = dyn Fn(NodeId, NodeId) -> f64 + 'a;

/// Grows a spanning tree from the sink over alive nodes, greedily adding the
/// cheapest (tree-node, outside-node) edge. With a symmetric weight function
/// this is exactly the minimum spanning tree of the alive visibility graph;
/// nodes outside the sink's component stay unreachable.
pub fn build_global_mst(
    graph: &NetworkGraph,
    weight: &EdgeWeight,
    rebuilt_at: u64,
) -> AggregationTree {
    let n = graph.len();
    let sink = graph.sink();
    let mut in_tree = vec![false; n];
    let mut best_cost = vec![f64::INFINITY; n];
    let mut best_parent: Vec<Option<NodeId>> = vec![None; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];

    in_tree[sink.index()] = true;
    for &nb in graph.neighbors(sink) {
        if graph.node(nb).alive {
            let w = weight(sink, nb);
            if w < best_cost[nb.index()] {
                best_cost[nb.index()] = w;
                best_parent[nb.index()] = Some(sink);
            }
        }
    }

    loop {
        // Cheapest frontier node; ties resolve to the lowest id because the
        // scan is in id order with a strict comparison.
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if !in_tree[i] && graph.nodes[i].alive && best_parent[i].is_some() {
                match pick {
                    None => pick = Some(i),
                    Some(p) if best_cost[i] < best_cost[p] => pick = Some(i),
                    _ => {}
                }
            }
        }
        let Some(next) = pick else { break };
        in_tree[next] = true;
        parent[next] = best_parent[next];
        let next_id = NodeId(next as u32);
        for &nb in graph.neighbors(next_id) {
            if !in_tree[nb.index()] && graph.node(nb).alive {
                let w = weight(next_id, nb);
                if w < best_cost[nb.index()] {
                    best_cost[nb.index()] = w;
                    best_parent[nb.index()] = Some(next_id);
                }
            }
        }
    }

    AggregationTree { parent, rebuilt_at }
}

/// PEDAP edge weight: radio cost of one data packet across the edge.
pub fn pedap_weight<'a>(
    graph: &'a NetworkGraph,
    em: &'a EnergyModel,
) -> impl Fn(NodeId, NodeId) -> f64 + 'a {
    move |a, b| em.tx_cost(em.packet_bits, graph.dist(a, b))
}

/// PEDAP-PA edge weight: PEDAP cost inflated by the transmitting child's
/// inverse residual-energy fraction.
pub fn pedap_pa_weight<'a>(
    graph: &'a NetworkGraph,
    em: &'a EnergyModel,
) -> impl Fn(NodeId, NodeId) -> f64 + 'a {
    move |parent, child| {
        let frac = (graph.node(child).energy / em.e_init).max(1e-12);
        em.tx_cost(em.packet_bits, graph.dist(parent, child)) / frac
    }
}

/// Total weight of a tree under a symmetric weight function, for oracle
/// comparisons.
pub fn tree_weight(tree: &AggregationTree, weight: &EdgeWeight) -> f64 {
    tree.edges()
        .iter()
        .map(|&(child, parent)| weight(parent, child))
        .sum()
}


/// Exhaustive spanning-tree oracle for small graphs, kept independent of the
/// Prim implementation. Test support only.
pub mod oracle {
    use super::EdgeWeight;
    use crate::net::{NetworkGraph, NodeId};

    /// Minimum spanning weight of the sink's connected component by
    /// exhaustive search over acyclic edge subsets. Returns None when the
    /// component has a single node.
    pub fn min_spanning_weight(graph: &NetworkGraph, weight: &EdgeWeight) -> Option<f64> {
        // Component of the sink over alive nodes.
        let mut comp = vec![false; graph.len()];
        let mut stack = vec![graph.sink()];
        comp[graph.sink().index()] = true;
        while let Some(cur) = stack.pop() {
            for &nb in graph.neighbors(cur) {
                if graph.node(nb).alive && !comp[nb.index()] {
                    comp[nb.index()] = true;
                    stack.push(nb);
                }
            }
        }
        let members: Vec<usize> = (0..graph.len()).filter(|&i| comp[i]).collect();
        if members.len() < 2 {
            return None;
        }
        let index_of = |id: usize| members.iter().position(|&m| m == id).unwrap();

        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for &i in &members {
            for &nb in graph.neighbors(NodeId(i as u32)) {
                let j = nb.index();
                if comp[j] && i < j {
                    edges.push((index_of(i), index_of(j), weight(NodeId(i as u32), nb)));
                }
            }
        }
        edges.sort_by(|a, b| a.2.total_cmp(&b.2));

        let mut best = f64::INFINITY;
        let dsu: Vec<usize> = (0..members.len()).collect();
        search(&edges, 0, members.len(), dsu, 0.0, &mut best);
        best.is_finite().then_some(best)
    }

    // Enumerates every spanning tree as an increasing-index sequence of
    // cycle-free edges; n is small enough that cloning the DSU per branch is
    // cheaper than undo bookkeeping.
    fn search(
        edges: &[(usize, usize, f64)],
        from: usize,
        components: usize,
        dsu: Vec<usize>,
        acc: f64,
        best: &mut f64,
    ) {
        if components == 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if edges.len() - from < components - 1 || acc >= *best {
            return;
        }
        for e in from..edges.len() {
            let (a, b, w) = edges[e];
            let (ra, rb) = (find(&dsu, a), find(&dsu, b));
            if ra == rb {
                continue;
            }
            let mut next = dsu.clone();
            next[ra] = rb;
            search(edges, e + 1, components - 1, next, acc + w, best);
        }
    }

    fn find(dsu: &[usize], mut x: usize) -> usize {
        while dsu[x] != x {
            x = dsu[x];
        }
        x
    }
}
