//! Coupling graphs and the graph algorithms the allocator relies on.
//!
//! Graphs are undirected. A directed coupling (a CNOT that only runs one way
//! on hardware) can be reversed with Hadamards on both qubits, so direction
//! is dropped when a graph is built.

mod articulation;
mod chain;
mod embedding;
mod token_swap;

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::names::{FunName, Qidx};
use crate::types::ConstraintSet;

pub use articulation::{articulation_points, articulation_points_naive};
pub use chain::{assign_subgraphs, construct_subgraphs, SubgraphChain, Workspace};
pub use embedding::{is_embedding, subgraph_isomorphism, Embedding};
pub use token_swap::{
    replay_token_swaps, token_swapping_approx, token_swapping_exact, TokenMap, EXACT_MAX_NODES,
};

/// Ordered pairs of adjacent nodes, applied left to right.
pub type SwapSequence = Vec<(Qidx, Qidx)>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node `{0}` is declared twice")]
    DuplicateNode(Qidx),
    #[error("edge mentions unknown node `{0}`")]
    UnknownNode(Qidx),
    #[error("self-loop on `{0}`")]
    SelfLoop(Qidx),
    #[error("graph is not connected (`{0}` is unreachable from `{1}`)")]
    Disconnected(Qidx, Qidx),
    #[error("function `{fun}` needs {required} qubits but the device has {available}")]
    DeviceTooSmall {
        fun: FunName,
        required: usize,
        available: usize,
    },
    #[error("pattern graph has no embedding into the host graph")]
    NoEmbedding,
    #[error("invalid token map: {0}")]
    InvalidMap(&'static str),
    #[error("exact token swapping is limited to {max} nodes (got {nodes})")]
    TooLarge { nodes: usize, max: usize },
}

/// An undirected graph of physical qubits. Node order is the declaration
/// order; every tie in the algorithms below is broken by node name instead.
#[derive(Clone, Debug)]
pub struct CouplingGraph {
    nodes: Vec<Qidx>,
    edges: ConstraintSet,
    index: BTreeMap<Qidx, usize>,
    /// Neighbour indices, sorted by node name.
    adj: Vec<Vec<usize>>,
}

impl PartialEq for CouplingGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for CouplingGraph {}

impl CouplingGraph {
    /// Builds a connected graph. Duplicate edges collapse and edge
    /// direction is ignored.
    pub fn new<N, E, A, B>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator,
        N::Item: Into<Qidx>,
        E: IntoIterator<Item = (A, B)>,
        A: Into<Qidx>,
        B: Into<Qidx>,
    {
        let g = Self::build(nodes, edges)?;
        g.check_connected()?;
        Ok(g)
    }

    fn build<N, E, A, B>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator,
        N::Item: Into<Qidx>,
        E: IntoIterator<Item = (A, B)>,
        A: Into<Qidx>,
        B: Into<Qidx>,
    {
        let nodes: Vec<Qidx> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        let mut set = ConstraintSet::new();
        for (a, b) in edges {
            let (a, b) = (a.into(), b.into());
            for end in [&a, &b] {
                if !index.contains_key(end) {
                    return Err(GraphError::UnknownNode(end.clone()));
                }
            }
            set.insert(a.clone(), b)
                .map_err(|_| GraphError::SelfLoop(a))?;
        }
        Ok(Self::from_parts(nodes, set, index))
    }

    /// The layout graph of a constraint set, possibly disconnected. Used for
    /// routing hints in diagnostics.
    pub(crate) fn from_constraints(nodes: &BTreeSet<Qidx>, phi: &ConstraintSet) -> Self {
        let mut all = nodes.clone();
        all.extend(phi.qidxs());
        let nodes: Vec<Qidx> = all.into_iter().collect();
        let index = nodes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, q)| (q, i))
            .collect();
        Self::from_parts(nodes, phi.clone(), index)
    }

    fn from_parts(nodes: Vec<Qidx>, edges: ConstraintSet, index: BTreeMap<Qidx, usize>) -> Self {
        let mut adj = vec![Vec::new(); nodes.len()];
        for (a, b) in edges.iter() {
            let (i, j) = (index[a], index[b]);
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_by(|x, y| nodes[*x].cmp(&nodes[*y]));
        }
        CouplingGraph {
            nodes,
            edges,
            index,
            adj,
        }
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() {
            return Ok(());
        }
        let seen = self.reachable_from(0, None);
        match seen.iter().position(|s| !s) {
            Some(i) => Err(GraphError::Disconnected(
                self.nodes[i].clone(),
                self.nodes[0].clone(),
            )),
            None => Ok(()),
        }
    }

    pub(crate) fn reachable_from(&self, start: usize, removed: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        if let Some(r) = removed {
            seen[r] = true;
        }
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(r) = removed {
            seen[r] = false;
        }
        seen
    }

    pub fn nodes(&self) -> &[Qidx] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The edge set, which doubles as the constraint set Φ of the graph.
    pub fn edges(&self) -> &ConstraintSet {
        &self.edges
    }

    pub fn contains_node(&self, q: &Qidx) -> bool {
        self.index.contains_key(q)
    }

    pub fn has_edge(&self, a: &Qidx, b: &Qidx) -> bool {
        self.edges.contains(a, b)
    }

    pub fn neighbors(&self, q: &Qidx) -> impl Iterator<Item = &Qidx> {
        let list: &[usize] = match self.index.get(q) {
            Some(&i) => &self.adj[i],
            None => &[],
        };
        list.iter().map(move |&j| &self.nodes[j])
    }

    pub fn degree(&self, q: &Qidx) -> usize {
        self.index.get(q).map_or(0, |&i| self.adj[i].len())
    }

    pub(crate) fn idx(&self, q: &Qidx) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub(crate) fn adj(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Subgraph induced by `keep`, preserving node order. Connectivity is
    /// not checked.
    pub fn induced(&self, keep: &BTreeSet<Qidx>) -> CouplingGraph {
        let nodes: Vec<Qidx> = self
            .nodes
            .iter()
            .filter(|n| keep.contains(*n))
            .cloned()
            .collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self::from_parts(nodes, self.edges.restrict(keep), index)
    }

    pub fn is_connected(&self) -> bool {
        self.check_connected().is_ok()
    }

    /// Hop distances from `from` to every node (`usize::MAX` if unreachable).
    pub(crate) fn distances_from(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[from] = 0;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub(crate) fn all_distances(&self) -> Vec<Vec<usize>> {
        (0..self.nodes.len())
            .map(|i| self.distances_from(i))
            .collect()
    }

    /// Breadth-first shortest path `from, .., to`. Neighbours are expanded
    /// in name order, so among equally short paths the one found first by
    /// that order is returned. `None` if either node is missing or `to` is
    /// unreachable.
    pub fn shortest_path(&self, from: &Qidx, to: &Qidx) -> Option<Vec<Qidx>> {
        let (s, t) = (self.idx(from)?, self.idx(to)?);
        let mut parent = vec![usize::MAX; self.nodes.len()];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &w in &self.adj[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[t] == usize::MAX {
            return None;
        }
        let mut path = vec![self.nodes[t].clone()];
        let mut cur = t;
        while cur != s {
            cur = parent[cur];
            path.push(self.nodes[cur].clone());
        }
        path.reverse();
        Some(path)
    }
}

/// Standalone form of [`CouplingGraph::shortest_path`].
pub fn shortest_path(g: &CouplingGraph, from: &Qidx, to: &Qidx) -> Option<Vec<Qidx>> {
    g.shortest_path(from, to)
}


#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// Random connected graphs: a random tree plus extra edges.
    pub fn connected_graph(max_nodes: usize) -> impl Strategy<Value = CouplingGraph> {
        (1..=max_nodes).prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
            let extra = proptest::collection::vec((0..n, 0..n), 0..=n);
            (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
                let nodes: Vec<Qidx> = (0..n).map(|i| Qidx::from(alloc::format!("v{i}"))).collect();
                let mut edges: Vec<(Qidx, Qidx)> = parents
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (nodes[i + 1].clone(), nodes[p].clone()))
                    .collect();
                edges.extend(
                    extra
                        .into_iter()
                        .filter(|(a, b)| a != b)
                        .map(|(a, b)| (nodes[a].clone(), nodes[b].clone())),
                );
                CouplingGraph::new(nodes, edges).unwrap()
            })
        })
    }
}
