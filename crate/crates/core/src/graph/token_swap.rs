use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::{CouplingGraph, GraphError, SwapSequence};
use crate::names::Qidx;

/// Partial injection `v ↦ p(v)`: the token now on `v` has to end up on
/// `p(v)`. Vertices outside the domain carry tokens that may end anywhere.
pub type TokenMap = BTreeMap<Qidx, Qidx>;

/// Largest graph [`token_swapping_exact`] accepts.
pub const EXACT_MAX_NODES: usize = 8;

/// `tokens[v]` is the destination index of the token on `v`.
fn token_vector(g: &CouplingGraph, p: &TokenMap) -> Result<Vec<Option<usize>>, GraphError> {
    let mut tokens = vec![None; g.node_count()];
    let mut hit = vec![false; g.node_count()];
    for (from, to) in p {
        let i = g
            .idx(from)
            .ok_or(GraphError::InvalidMap("source vertex not in graph"))?;
        let j = g
            .idx(to)
            .ok_or(GraphError::InvalidMap("target vertex not in graph"))?;
        if hit[j] {
            return Err(GraphError::InvalidMap("two tokens share a destination"));
        }
        hit[j] = true;
        tokens[i] = Some(j);
    }
    Ok(tokens)
}

struct Board<'g> {
    g: &'g CouplingGraph,
    tokens: Vec<Option<usize>>,
    swaps: Vec<(usize, usize)>,
}

impl Board<'_> {
    fn swap(&mut self, a: usize, b: usize) {
        debug_assert!(self.g.adj(a).contains(&b));
        self.tokens.swap(a, b);
        self.swaps.push((a, b));
    }

    fn unsatisfied(&self, v: usize) -> bool {
        matches!(self.tokens[v], Some(d) if d != v)
    }

    fn into_sequence(self) -> SwapSequence {
        let nodes = self.g.nodes();
        self.swaps
            .into_iter()
            .map(|(a, b)| (nodes[a].clone(), nodes[b].clone()))
            .collect()
    }
}

/// Approximate token swapping in the style of Miltzow et al.: repeatedly
/// walk from the first misplaced token (by name) along edges that bring
/// tokens closer to their destinations, and resolve the walk as
///
/// * a cycle: rotate the tokens around it,
/// * a chain ending on a vertex without a token: shift the chain forward,
/// * a chain ending on a token already home: one swap that displaces it.
///
/// Within a walk, a neighbour whose token also wants to come across is
/// swapped immediately. If the walks stop making progress (an iteration
/// bound far above anything seen in testing), a spanning-tree routine that
/// always terminates finishes the job.
pub fn token_swapping_approx(g: &CouplingGraph, p: &TokenMap) -> Result<SwapSequence, GraphError> {
    let tokens = token_vector(g, p)?;
    let n = g.node_count();
    let dist = g.all_distances();
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|a, b| g.nodes()[*a].cmp(&g.nodes()[*b]));

    let mut board = Board {
        g,
        tokens,
        swaps: Vec::new(),
    };
    let limit = 4 * n * n * n + 64;
    let mut rounds = 0;
    while let Some(start) = by_name.iter().copied().find(|&v| board.unsatisfied(v)) {
        rounds += 1;
        if rounds > limit {
            finish_on_tree(&mut board, &by_name);
            break;
        }
        walk(&mut board, &dist, start);
    }
    Ok(board.into_sequence())
}

fn walk(board: &mut Board<'_>, dist: &[Vec<usize>], start: usize) {
    let n = board.tokens.len();
    let mut path = vec![start];
    let mut pos = vec![usize::MAX; n];
    pos[start] = 0;
    loop {
        let u = *path.last().expect("path is never empty");
        let d = match board.tokens[u] {
            None => {
                for k in (1..path.len()).rev() {
                    board.swap(path[k - 1], path[k]);
                }
                return;
            }
            Some(d) if d == u => {
                let pred = path[path.len() - 2];
                board.swap(pred, u);
                return;
            }
            Some(d) => d,
        };
        let closer: Vec<usize> = board
            .g
            .adj(u)
            .iter()
            .copied()
            .filter(|&w| dist[w][d] < dist[u][d])
            .collect();
        let mutual = closer.iter().copied().find(|&w| match board.tokens[w] {
            Some(e) => dist[u][e] < dist[w][e],
            None => false,
        });
        if let Some(w) = mutual {
            board.swap(u, w);
            return;
        }
        let rank = |w: usize| -> u8 {
            match board.tokens[w] {
                None => 0,
                _ if pos[w] != usize::MAX => 1,
                Some(e) if e != w => 2,
                _ => 3,
            }
        };
        let w = *closer
            .iter()
            .min_by_key(|&&w| rank(w))
            .expect("a misplaced token on a connected graph has a closer neighbour");
        if pos[w] != usize::MAX {
            let j = pos[w];
            for i in (j..path.len() - 1).rev() {
                board.swap(path[i], path[i + 1]);
            }
            return;
        }
        pos[w] = path.len();
        path.push(w);
    }
}

/// Places tokens leaf by leaf on a BFS spanning tree. Each leaf receives
/// the token destined for it, or a free token if none is, and is then
/// retired; the remaining tree stays connected throughout.
fn finish_on_tree(board: &mut Board<'_>, by_name: &[usize]) {
    let g = board.g;
    let n = g.node_count();
    if n == 0 {
        return;
    }
    let mut tree = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &w in g.adj(u) {
            if !seen[w] {
                seen[w] = true;
                tree[u].push(w);
                tree[w].push(u);
                queue.push_back(w);
            }
        }
    }
    let mut alive = vec![true; n];
    for _ in 0..n {
        let leaf = by_name
            .iter()
            .copied()
            .find(|&v| alive[v] && tree[v].iter().filter(|&&w| alive[w]).count() <= 1)
            .expect("a tree always has a leaf");
        let wanted =
            |t: Option<usize>| match (0..n).find(|&v| alive[v] && board.tokens[v] == Some(leaf)) {
                Some(_) => t == Some(leaf),
                None => t.is_none(),
            };
        if !wanted(board.tokens[leaf]) {
            let from = tree_bfs(&tree, &alive, leaf, |v| wanted(board.tokens[v]));
            for pair in from.windows(2) {
                board.swap(pair[0], pair[1]);
            }
        }
        alive[leaf] = false;
    }
}

/// Path from the nearest vertex satisfying `goal` to `to`, inside the
/// alive part of the tree.
fn tree_bfs(
    tree: &[Vec<usize>],
    alive: &[bool],
    to: usize,
    goal: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let mut parent = vec![usize::MAX; tree.len()];
    parent[to] = to;
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            let mut path = vec![u];
            let mut cur = u;
            while cur != to {
                cur = parent[cur];
                path.push(cur);
            }
            return path;
        }
        for &w in &tree[u] {
            if alive[w] && parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    unreachable!("counting guarantees a suitable token in the remaining tree")
}

/// Shortest swap sequence by breadth-first search over token
/// configurations. Tokens without a destination are interchangeable.
pub fn token_swapping_exact(g: &CouplingGraph, p: &TokenMap) -> Result<SwapSequence, GraphError> {
    let n = g.node_count();
    if n > EXACT_MAX_NODES {
        return Err(GraphError::TooLarge {
            nodes: n,
            max: EXACT_MAX_NODES,
        });
    }
    let tokens = token_vector(g, p)?;
    const EMPTY: u64 = 0xF;
    let encode = |t: &[Option<usize>]| -> u64 {
        t.iter()
            .enumerate()
            .map(|(i, d)| d.map_or(EMPTY, |d| d as u64) << (4 * i))
            .fold(0, |acc, x| acc | x)
    };
    let done = |s: u64| -> bool {
        (0..n).all(|i| {
            let d = (s >> (4 * i)) & 0xF;
            d == EMPTY || d == i as u64
        })
    };
    let swap_in = |s: u64, a: usize, b: usize| -> u64 {
        let (da, db) = ((s >> (4 * a)) & 0xF, (s >> (4 * b)) & 0xF);
        let cleared = s & !(0xF << (4 * a)) & !(0xF << (4 * b));
        cleared | (db << (4 * a)) | (da << (4 * b))
    };
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|(a, b)| (g.idx(a).unwrap(), g.idx(b).unwrap()))
        .collect();

    let start = encode(&tokens);
    let mut parent: BTreeMap<u64, (u64, usize)> = BTreeMap::new();
    parent.insert(start, (start, usize::MAX));
    let mut queue = VecDeque::from([start]);
    let mut goal = None;
    while let Some(s) = queue.pop_front() {
        if done(s) {
            goal = Some(s);
            break;
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            let t = swap_in(s, a, b);
            if let alloc::collections::btree_map::Entry::Vacant(slot) = parent.entry(t) {
                slot.insert((s, k));
                queue.push_back(t);
            }
        }
    }
    let mut s = goal.expect("token swapping on a connected graph always has a solution");
    let mut out = Vec::new();
    while s != start {
        let (prev, k) = parent[&s];
        let (a, b) = edges[k];
        out.push((g.nodes()[a].clone(), g.nodes()[b].clone()));
        s = prev;
    }
    out.reverse();
    Ok(out)
}

/// Checks that every pair of `psi` is an edge and that playing `psi` from
/// the initial placement brings each token of `p` to its destination.
pub fn replay_token_swaps(g: &CouplingGraph, p: &TokenMap, psi: &[(Qidx, Qidx)]) -> bool {
    let Ok(mut tokens) = token_vector(g, p) else {
        return false;
    };
    for (a, b) in psi {
        if !g.has_edge(a, b) {
            return false;
        }
        let (i, j) = (g.idx(a).unwrap(), g.idx(b).unwrap());
        tokens.swap(i, j);
    }
    tokens
        .iter()
        .enumerate()
        .all(|(v, d)| d.is_none_or(|d| d == v))
}
