use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::{CouplingGraph, GraphError};
use crate::names::Qidx;

/// Injective, edge-preserving map from pattern nodes to host nodes.
pub type Embedding = BTreeMap<Qidx, Qidx>;

/// Finds an embedding of `pattern` into `host` (a subgraph monomorphism).
///
/// When the pattern is literally a subgraph of the host, which is always the
/// case for two members of one [`super::SubgraphChain`], the identity is
/// returned. Otherwise a backtracking search assigns pattern nodes in name
/// order to host nodes in name order and returns the first complete match.
pub fn subgraph_isomorphism(
    host: &CouplingGraph,
    pattern: &CouplingGraph,
) -> Result<Embedding, GraphError> {
    let literal = pattern.nodes().iter().all(|n| host.contains_node(n))
        && pattern.edges().is_subset(host.edges());
    if literal {
        return Ok(pattern
            .nodes()
            .iter()
            .map(|n| (n.clone(), n.clone()))
            .collect());
    }
    if pattern.node_count() > host.node_count() || pattern.edge_count() > host.edge_count() {
        return Err(GraphError::NoEmbedding);
    }

    let mut order: Vec<usize> = (0..pattern.node_count()).collect();
    order.sort_by(|a, b| pattern.nodes()[*a].cmp(&pattern.nodes()[*b]));
    let mut candidates: Vec<usize> = (0..host.node_count()).collect();
    candidates.sort_by(|a, b| host.nodes()[*a].cmp(&host.nodes()[*b]));

    let mut image = vec![usize::MAX; pattern.node_count()];
    let mut used = vec![false; host.node_count()];
    if search(host, pattern, &order, &candidates, 0, &mut image, &mut used) {
        Ok(order
            .iter()
            .map(|&p| (pattern.nodes()[p].clone(), host.nodes()[image[p]].clone()))
            .collect())
    } else {
        Err(GraphError::NoEmbedding)
    }
}

fn search(
    host: &CouplingGraph,
    pattern: &CouplingGraph,
    order: &[usize],
    candidates: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&p) = order.get(depth) else {
        return true;
    };
    for &h in candidates {
        if used[h] || host.adj(h).len() < pattern.adj(p).len() {
            continue;
        }
        let consistent = pattern
            .adj(p)
            .iter()
            .all(|&q| image[q] == usize::MAX || host.adj(h).contains(&image[q]));
        if !consistent {
            continue;
        }
        image[p] = h;
        used[h] = true;
        if search(host, pattern, order, candidates, depth + 1, image, used) {
            return true;
        }
        image[p] = usize::MAX;
        used[h] = false;
    }
    false
}

/// Checks injectivity and edge preservation directly.
pub fn is_embedding(host: &CouplingGraph, pattern: &CouplingGraph, phi: &Embedding) -> bool {
    let images: BTreeSet<&Qidx> = phi.values().collect();
    images.len() == phi.len()
        && pattern
            .nodes()
            .iter()
            .all(|n| phi.get(n).is_some_and(|h| host.contains_node(h)))
        && pattern
            .edges()
            .iter()
            .all(|(a, b)| host.has_edge(&phi[a], &phi[b]))
}
