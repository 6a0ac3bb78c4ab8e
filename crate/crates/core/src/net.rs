//! Network model: node placement, neighbor discovery and distance geometry.
//!
//! The network is a visibility graph: an edge exists between two nodes iff
//! their Euclidean distance is at most the shared transmission range `R`.

use crate::rng::RngStream;

/// Dense node identifier, 0..n-1. The sink has a designated id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn dist(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// One physical sensor: position, residual energy and liveness.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub pos: Position,
    /// Residual energy in joules; never negative.
    pub energy: f64,
    pub alive: bool,
    pub is_sink: bool,
    pub is_source: bool,
}

/// Where the sink is placed at deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkPlacement {
    /// Node 0 at the field center (default).
    Center,
    /// Node 0 at the field origin corner.
    Corner,
    /// Node 0 placed uniformly like every other node.
    Random,
}

/// Visibility graph over the deployed nodes.
///
/// Neighbor sets are symmetric by construction and sorted by id, which keeps
/// every iteration order deterministic.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    pub nodes: Vec<NodeState>,
    /// Maximum transmission range R in meters.
    pub range: f64,
    pub width: f64,
    pub length: f64,
    neighbors: Vec<Vec<NodeId>>,
    sink: NodeId,
}

/// Errors raised while building or mutating a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetError {
    Config(String),
}

impl std::fmt::Display for NetError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetError::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl std::error::Error for NetError {}

impl NetworkGraph {
    /// Deploys `n` nodes uniformly on a `width x length` field and computes
    /// neighbor sets with range `range`. The sink is node 0, placed per
    /// `placement`. Isolated non-sink nodes are allowed (their ids are
    /// available via [`NetworkGraph::isolated_nodes`]); deployment proceeds.
    pub fn deploy_random(
        n: usize,
        width: f64,
        length: f64,
        range: f64,
        e_init: f64,
        placement: SinkPlacement,
        rng: &mut RngStream,
    ) -> Result<Self, NetError> {
        if n < 2 {
            return Err(NetError::Config(format!("need at least 2 nodes, got {n}")));
        }
        if !(width > 0.0) || !(length > 0.0) {
            return Err(NetError::Config(format!(
                "field dimensions must be positive, got {width}x{length}"
            )));
        }
        if !(range > 0.0) {
            return Err(NetError::Config(format!(
                "range must be positive, got {range}"
            )));
        }

        let mut nodes = Vec::with_capacity(n);
        let sink_pos = match placement {
            SinkPlacement::Center => Position {
                x: width / 2.0,
                y: length / 2.0,
            },
            SinkPlacement::Corner => Position { x: 0.0, y: 0.0 },
            SinkPlacement::Random => Position {
                x: rng.uniform(0.0, width),
                y: rng.uniform(0.0, length),
            },
        };
        nodes.push(NodeState {
            id: NodeId(0),
            pos: sink_pos,
            energy: e_init,
            alive: true,
            is_sink: true,
            is_source: false,
        });
        for i in 1..n {
            nodes.push(NodeState {
                id: NodeId(i as u32),
                pos: Position {
                    x: rng.uniform(0.0, width),
                    y: rng.uniform(0.0, length),
                },
                energy: e_init,
                alive: true,
                is_sink: false,
                is_source: false,
            });
        }

        let mut graph = Self {
            nodes,
            range,
            width,
            length,
            neighbors: Vec::new(),
            sink: NodeId(0),
        };
        graph.rebuild_neighbor_sets();
        Ok(graph)
    }

    /// Builds a graph from explicit positions, for scripted topologies. The
    /// sink is `positions[sink.index()]`; every node starts at `e_init`.
    pub fn from_positions(
        positions: &[Position],
        sink: NodeId,
        range: f64,
        width: f64,
        length: f64,
        e_init: f64,
    ) -> Result<Self, NetError> {
        if positions.len() < 2 {
            return Err(NetError::Config(format!(
                "need at least 2 nodes, got {}",
                positions.len()
            )));
        }
        if sink.index() >= positions.len() {
            return Err(NetError::Config(format!("sink id {sink} out of range")));
        }
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(i, &pos)| NodeState {
                id: NodeId(i as u32),
                pos,
                energy: e_init,
                alive: true,
                is_sink: NodeId(i as u32) == sink,
                is_source: false,
            })
            .collect();
        let mut graph = Self {
            nodes,
            range,
            width,
            length,
            neighbors: Vec::new(),
            sink,
        };
        graph.rebuild_neighbor_sets();
        Ok(graph)
    }

    fn rebuild_neighbor_sets(&mut self) {
        let n = self.nodes.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if self.nodes[i].pos.dist(&self.nodes[j].pos) <= self.range {
                    neighbors[i].push(NodeId(j as u32));
                    neighbors[j].push(NodeId(i as u32));
                }
            }
        }
        // i < j insertion order already leaves each list sorted.
        self.neighbors = neighbors;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut NodeState {
        &mut self.nodes[id.index()]
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.neighbors[id.index()]
    }

    pub fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.nodes[a.index()].pos.dist(&self.nodes[b.index()].pos)
    }

    pub fn dist_to_sink(&self, id: NodeId) -> f64 {
        self.dist(id, self.sink)
    }

    /// Non-sink nodes with an empty neighbor set. Such sources drop every
    /// packet they generate; deployment only warns about them.
    pub fn isolated_nodes(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| !n.is_sink && self.neighbors[n.id.index()].is_empty())
            .map(|n| n.id)
            .collect()
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    /// Marks `victim` as removed from the network and strips it from all
    /// neighbor sets. Returns the ids whose neighbor sets changed.
    pub fn remove_node(&mut self, victim: NodeId) -> Result<Vec<NodeId>, NetError> {
        if victim == self.sink {
            return Err(NetError::Config("cannot remove the sink".into()));
        }
        if !self.nodes[victim.index()].alive {
            return Err(NetError::Config(format!("node {victim} is not alive")));
        }
        let affected = self.neighbors[victim.index()].clone();
        for &nb in &affected {
            self.neighbors[nb.index()].retain(|&x| x != victim);
        }
        self.neighbors[victim.index()].clear();
        // The node keeps its residual charge; it just stops participating.
        self.nodes[victim.index()].alive = false;
        Ok(affected)
    }

    /// Inserts a fresh node at `pos` with energy `e_init`, wiring up exactly
    /// the neighbor sets within range. Returns (new id, ids gaining a link).
    pub fn add_node(
        &mut self,
        pos: Position,
        e_init: f64,
    ) -> Result<(NodeId, Vec<NodeId>), NetError> {
        if !(0.0..=self.width).contains(&pos.x) || !(0.0..=self.length).contains(&pos.y) {
            return Err(NetError::Config(format!(
                "position ({}, {}) outside field {}x{}",
                pos.x, pos.y, self.width, self.length
            )));
        }
        let id = NodeId(self.nodes.len() as u32);
        let mut linked = Vec::new();
        for other in &self.nodes {
            if other.alive && other.pos.dist(&pos) <= self.range {
                linked.push(other.id);
            }
        }
        self.nodes.push(NodeState {
            id,
            pos,
            energy: e_init,
            alive: true,
            is_sink: false,
            is_source: false,
        });
        self.neighbors.push(linked.clone());
        for &nb in &linked {
            self.neighbors[nb.index()].push(id);
        }
        Ok((id, linked))
    }
}
