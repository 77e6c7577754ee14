use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use qalloc_core::graph::CouplingGraph;
use qalloc_core::names::{FunName, Qidx, Var};
use qalloc_core::source::{Expr, FunDef, Program};
use qalloc_core::types::SourceFunType;

use super::FuzzConfig;

/// A uniformly random spanning tree on `n` nodes `q0 … q{n-1}` (decoded
/// from a random Prüfer sequence), plus every other pair as an edge with
/// probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> CouplingGraph {
    let names: Vec<Qidx> = (0..n).map(|i| Qidx::from(format!("q{i}"))).collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    if n == 2 {
        edges.insert((0, 1));
    } else if n > 2 {
        let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &c in &code {
            degree[c] += 1;
        }
        for &c in &code {
            let leaf = (0..n)
                .find(|&i| degree[i] == 1)
                .expect("a Prüfer step always has a leaf");
            edges.insert((leaf.min(c), leaf.max(c)));
            degree[leaf] -= 1;
            degree[c] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
        edges.insert((rest[0], rest[1]));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.gen_bool(extra) {
                edges.insert((i, j));
            }
        }
    }
    CouplingGraph::new(
        names.iter().cloned(),
        edges
            .into_iter()
            .map(|(i, j)| (names[i].clone(), names[j].clone())),
    )
    .expect("a spanning tree is connected")
}

/// Smallest depth of an expression that turns `have` live variables into a
/// tuple of `want`: one `init` or `discard` per difference, then the tuple.
fn finish_cost(have: usize, want: usize) -> usize {
    have.abs_diff(want) + 1
}

#[derive(Clone, Copy)]
enum Prod {
    Return,
    Init,
    Discard,
    Cnot,
    H,
    Call(usize),
    SelfCall,
    If,
    Let,
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a FuzzConfig,
    funs: Vec<(FunName, SourceFunType)>,
    current: Option<(FunName, SourceFunType)>,
    next_var: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self) -> Var {
        let v = Var::from(format!("x{}", self.next_var));
        self.next_var += 1;
        v
    }

    fn take(&mut self, gamma: &mut Vec<Var>) -> Var {
        let i = self.rng.gen_range(0..gamma.len());
        gamma.swap_remove(i)
    }

    fn callable(
        &self,
        ty: &SourceFunType,
        have: usize,
        n: usize,
        depth: usize,
        want: usize,
    ) -> bool {
        have >= ty.params
            && n >= ty.budget
            && ty.results <= n + ty.params
            && depth > finish_cost(have - ty.params + ty.results, want)
    }

    /// An expression `e` with `Θ | n | gamma ⊢ e : qbit^want` and
    /// `e.depth() <= depth`. Requires `want <= |gamma| + n` and
    /// `depth >= finish_cost(|gamma|, want)`.
    fn expr(
        &mut self,
        mut gamma: Vec<Var>,
        n: usize,
        want: usize,
        depth: usize,
        in_then: bool,
    ) -> Expr {
        debug_assert!(want <= gamma.len() + n && depth >= finish_cost(gamma.len(), want));
        let have = gamma.len();
        let mut prods: Vec<(Prod, u32)> = Vec::new();
        if have == want {
            prods.push((Prod::Return, 2));
        }
        if n >= 1 && depth > finish_cost(have + 1, want) {
            prods.push((Prod::Init, 3));
        }
        if have >= 1 && depth > finish_cost(have - 1, want) {
            prods.push((Prod::Discard, 2));
        }
        let stay = depth > finish_cost(have, want);
        if have >= 2 && stay {
            prods.push((Prod::Cnot, 6));
        }
        if self.cfg.hadamard && have >= 1 && stay {
            prods.push((Prod::H, 4));
        }
        if have >= 1 && stay {
            prods.push((Prod::If, 2));
        }
        for i in 0..self.funs.len() {
            if self.callable(&self.funs[i].1, have, n, depth, want) {
                prods.push((Prod::Call(i), 3));
            }
        }
        if self.cfg.recursion && in_then {
            if let Some((_, ty)) = &self.current {
                if self.callable(ty, have, n, depth, want) {
                    prods.push((Prod::SelfCall, 2));
                }
            }
        }
        // (|Γ1|, k) splits for a tuple `let` that leave both halves
        // finishable within depth - 1.
        let mut splits = Vec::new();
        if depth >= 2 {
            for s in 0..=have {
                for k in 0..=s + n {
                    if depth > finish_cost(s, k) && depth > finish_cost(have - s + k, want) {
                        splits.push((s, k));
                    }
                }
            }
        }
        if !splits.is_empty() {
            prods.push((Prod::Let, 2));
        }
        let total: u32 = prods.iter().map(|p| p.1).sum();
        let mut pick = self.rng.gen_range(0..total);
        let prod = prods
            .iter()
            .find(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .map(|p| p.0)
            .expect("some production always applies");

        match prod {
            Prod::Return => {
                gamma.shuffle(self.rng);
                Expr::ret(gamma)
            }
            Prod::Init => {
                let x = self.fresh();
                gamma.push(x.clone());
                Expr::init(x, self.expr(gamma, n - 1, want, depth - 1, in_then))
            }
            Prod::Discard => {
                let x = self.take(&mut gamma);
                Expr::discard(x, self.expr(gamma, n + 1, want, depth - 1, in_then))
            }
            Prod::Cnot => {
                let a = self.take(&mut gamma);
                let b = self.take(&mut gamma);
                let outs = if self.rng.gen_bool(0.5) {
                    (a.clone(), b.clone())
                } else {
                    (self.fresh(), self.fresh())
                };
                gamma.push(outs.0.clone());
                gamma.push(outs.1.clone());
                Expr::cnot(outs, (a, b), self.expr(gamma, n, want, depth - 1, in_then))
            }
            Prod::H => {
                let a = self.take(&mut gamma);
                let out = if self.rng.gen_bool(0.5) {
                    a.clone()
                } else {
                    self.fresh()
                };
                gamma.push(out.clone());
                Expr::h(out, a, self.expr(gamma, n, want, depth - 1, in_then))
            }
            Prod::Call(_) | Prod::SelfCall => {
                let (f, ty) = match prod {
                    Prod::Call(i) => self.funs[i].clone(),
                    _ => self.current.clone().expect("self call inside a function"),
                };
                let args: Vec<Var> = (0..ty.params).map(|_| self.take(&mut gamma)).collect();
                let outs: Vec<Var> = (0..ty.results)
                    .map(|i| match args.get(i) {
                        Some(a) if self.rng.gen_bool(0.5) => a.clone(),
                        _ => self.fresh(),
                    })
                    .collect();
                gamma.extend(outs.iter().cloned());
                let after = n + ty.params - ty.results;
                Expr::call(
                    outs,
                    f,
                    args,
                    self.expr(gamma, after, want, depth - 1, in_then),
                )
            }
            Prod::If => {
                let c = gamma[self.rng.gen_range(0..gamma.len())].clone();
                let t = self.expr(gamma.clone(), n, want, depth - 1, true);
                let e = self.expr(gamma, n, want, depth - 1, in_then);
                Expr::if_(c, t, e)
            }
            Prod::Let => {
                let (s, k) = *splits.choose(self.rng).expect("offered only with a split");
                gamma.shuffle(self.rng);
                let mut gamma2 = gamma.split_off(s);
                let rhs = self.expr(gamma, n, k, depth - 1, in_then);
                let outs: Vec<Var> = (0..k).map(|_| self.fresh()).collect();
                gamma2.extend(outs.iter().cloned());
                let body = self.expr(gamma2, n + s - k, want, depth - 1, in_then);
                Expr::tuple_let(outs, rhs, body)
            }
        }
    }
}

/// A random program, well typed by construction: `main` is typeable with
/// budget `budget`, and every function `fi` with the type recorded for it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub program: Program,
    pub budget: usize,
    pub types: Vec<(FunName, SourceFunType)>,
}

/// Generates a program using at most `max_qubits` qubits in any function
/// and in `main`.
pub fn generate_program<R: Rng>(rng: &mut R, cfg: &FuzzConfig, max_qubits: usize) -> Generated {
    let max_qubits = max_qubits.min(cfg.max_qubits);
    let nfuns = rng.gen_range(0..=cfg.max_functions);
    let mut g = Gen {
        rng,
        cfg,
        funs: Vec::new(),
        current: None,
        next_var: 0,
    };
    let mut defs = Vec::new();
    for i in 0..nfuns {
        let name = FunName::from(format!("f{i}"));
        let params = g.rng.gen_range(0..=max_qubits.min(3));
        let budget = g.rng.gen_range(0..=max_qubits - params);
        let results = loop {
            let r = g.rng.gen_range(0..=params + budget);
            if finish_cost(params, r) <= cfg.max_depth {
                break r;
            }
        };
        let ty = SourceFunType::new(params, budget, results);
        g.next_var = 0;
        let ps: Vec<Var> = (0..params).map(|_| g.fresh()).collect();
        g.current = Some((name.clone(), ty));
        let body = g.expr(ps.clone(), budget, results, cfg.max_depth, false);
        g.current = None;
        defs.push(FunDef::new(name.clone(), ps, body));
        g.funs.push((name, ty));
    }
    let budget = g.rng.gen_range(1..=max_qubits.max(1));
    let want = loop {
        let r = g.rng.gen_range(0..=budget);
        if finish_cost(0, r) <= cfg.max_depth {
            break r;
        }
    };
    g.next_var = 0;
    let entry = g.expr(Vec::new(), budget, want, cfg.max_depth, false);
    Generated {
        program: Program::new(defs, entry),
        budget,
        types: g.funs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use qalloc_core::check::source::{check_program, min_budget};
    use qalloc_core::graph::articulation_points;
    use qalloc_core::types::Dialect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn generated_programs_are_well_typed(seed in any::<u64>(), h in any::<bool>()) {
            let cfg = FuzzConfig { hadamard: h, ..FuzzConfig::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gen = generate_program(&mut rng, &cfg, 5);
            let dialect = Dialect { hadamard: h };
            prop_assert!(check_program(&gen.program, gen.budget, dialect).is_ok());
            prop_assert!(min_budget(&gen.program, dialect).unwrap() <= gen.budget);
            prop_assert!(gen.program.entry.depth() <= cfg.max_depth);
            for d in &gen.program.defs {
                prop_assert!(d.body.depth() <= cfg.max_depth);
            }
            prop_assert!(h || !gen.program.entry.uses_hadamard());
        }

        #[test]
        fn random_graphs_are_connected_and_sized(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_connected_graph(&mut rng, n, 0.3);
            prop_assert_eq!(g.node_count(), n);
            prop_assert!(g.is_connected());
            prop_assert!(g.edge_count() + 1 >= n);
            prop_assert!(articulation_points(&g).is_ok());
        }
    }

    #[test]
    fn trees_without_extra_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..10 {
            let g = random_connected_graph(&mut rng, n, 0.0);
            assert_eq!(g.edge_count(), n.saturating_sub(1));
        }
    }

    #[test]
    fn same_seed_same_program() {
        let cfg = FuzzConfig::default();
        let a = generate_program(&mut ChaCha8Rng::seed_from_u64(3), &cfg, 5);
        let b = generate_program(&mut ChaCha8Rng::seed_from_u64(3), &cfg, 5);
        assert_eq!(a.program, b.program);
    }
}
