use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{CouplingGraph, GraphError};
use crate::names::Qidx;

/// Cut vertices by an iterative DFS low-link pass, O(V + E).
pub fn articulation_points(g: &CouplingGraph) -> Result<BTreeSet<Qidx>, GraphError> {
    g.check_connected()?;
    let n = g.node_count();
    let mut out = BTreeSet::new();
    if n == 0 {
        return Ok(out);
    }
    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut parent = vec![UNSEEN; n];
    let mut is_cut = vec![false; n];
    let mut clock = 0;
    let root = 0;
    let mut root_children = 0;

    // (vertex, position of the next neighbour to look at)
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    disc[root] = clock;
    low[root] = clock;
    clock += 1;

    while let Some(top) = stack.last_mut() {
        let u = top.0;
        if let Some(&w) = g.adj(u).get(top.1) {
            top.1 += 1;
            if disc[w] == UNSEEN {
                parent[w] = u;
                disc[w] = clock;
                low[w] = clock;
                clock += 1;
                if u == root {
                    root_children += 1;
                }
                stack.push((w, 0));
            } else if w != parent[u] {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            let p = parent[u];
            if p != UNSEEN {
                low[p] = low[p].min(low[u]);
                if p != root && low[u] >= disc[p] {
                    is_cut[p] = true;
                }
            }
        }
    }
    if root_children > 1 {
        is_cut[root] = true;
    }
    for (i, cut) in is_cut.iter().enumerate() {
        if *cut {
            out.insert(g.nodes()[i].clone());
        }
    }
    Ok(out)
}

/// Reference implementation: a vertex is a cut vertex iff deleting it leaves
/// the rest disconnected.
pub fn articulation_points_naive(g: &CouplingGraph) -> Result<BTreeSet<Qidx>, GraphError> {
    g.check_connected()?;
    let n = g.node_count();
    let mut out = BTreeSet::new();
    for v in 0..n {
        if n <= 2 {
            break;
        }
        let start = if v == 0 { 1 } else { 0 };
        let seen = g.reachable_from(start, Some(v));
        let reached = seen.iter().filter(|s| **s).count();
        if reached < n - 1 {
            out.insert(g.nodes()[v].clone());
        }
    }
    Ok(out)
}
