//! Type-directed qubit allocation.
//!
//! A well-typed source program and a coupling graph go in; a target program
//! whose every two-qubit gate acts on adjacent nodes comes out. Each function
//! runs on one member of the nested subgraph chain. Its parameter list is
//! widened with the qubits it may allocate, so the target function takes and
//! returns one qubit per node of its workspace.
//!
//! Inside one function the allocator keeps every node of the workspace
//! occupied by exactly one target variable. A variable is *live* (it stands
//! for a source variable), *free* (spare `|0⟩` qubits, the budget),
//! or *frozen* (live in an enclosing scope but not visible to the
//! right-hand side of a `let`; frozen variables are threaded through the
//! right-hand side and rebound under their own names). All qubits stay in
//! scope, so swaps may route through any node.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::check::source::ProgramDerivation;
use crate::check::target::{check_program_tgt, TgtDiagnostic};
use crate::graph::{
    assign_subgraphs, construct_subgraphs, subgraph_isomorphism, token_swapping_approx,
    CouplingGraph, GraphError, SubgraphChain, SwapSequence, TokenMap, Workspace,
};
use crate::names::{FreshNames, FunName, Qidx, Span, Var};
use crate::source;
use crate::target::{self, Expr};
use crate::types::{apply_swaps_to_env, Dialect, FunEnv, TargetEnv, TargetFunType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AllocError {
    Graph(GraphError),
    /// The entry needs more qubits than the device has.
    BudgetExceedsDevice {
        budget: usize,
        nodes: usize,
    },
    /// A swap names a node nobody occupies.
    MissingOccupant(Qidx),
    /// The allocator broke one of its own invariants.
    Internal(&'static str),
    /// The output does not pass the target checker.
    InternalPostconditionViolation(Vec<TgtDiagnostic>),
}

impl fmt::Display for AllocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllocError::Graph(e) => write!(f, "{e}"),
            AllocError::BudgetExceedsDevice { budget, nodes } => write!(
                f,
                "DeviceTooSmall: the program needs {budget} qubits but the device has {nodes}"
            ),
            AllocError::MissingOccupant(q) => {
                write!(f, "MissingOccupant: no variable sits at {q}")
            }
            AllocError::Internal(what) => write!(f, "InternalPostconditionViolation: {what}"),
            AllocError::InternalPostconditionViolation(ds) => {
                write!(
                    f,
                    "InternalPostconditionViolation: output rejected by the target checker"
                )?;
                for d in ds {
                    write!(f, "; {d}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for AllocError {}

impl From<GraphError> for AllocError {
    fn from(e: GraphError) -> Self {
        AllocError::Graph(e)
    }
}

/// Why swaps were inserted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SwapSite {
    Cnot,
    Call(FunName),
    Return,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// A source variable is now represented by a target variable.
    Place {
        function: Option<FunName>,
        source: Var,
        target: Var,
        qidx: Qidx,
        span: Span,
    },
    /// One routing step. Emitted for every cnot, call and constrained return,
    /// even when no swap was needed.
    Swaps {
        function: Option<FunName>,
        site: SwapSite,
        swaps: SwapSequence,
        span: Span,
    },
}

#[derive(Clone, Debug)]
pub struct Allocation {
    pub program: target::Program,
    pub chain: SubgraphChain,
    pub workspaces: FunEnv<Workspace>,
    pub trace: Vec<TraceEvent>,
}

impl Allocation {
    /// Routing events of one function (`None` for main), in program order.
    pub fn routing(
        &self,
        function: Option<&FunName>,
    ) -> impl Iterator<Item = (&SwapSite, &SwapSequence)> {
        let function = function.cloned();
        self.trace.iter().filter_map(move |ev| match ev {
            TraceEvent::Swaps {
                function: f,
                site,
                swaps,
                ..
            } if *f == function => Some((site, swaps)),
            _ => None,
        })
    }
}

/// Wraps `e` in one `let (x2, x1) = swap(x1, x2)` per pair of `psi`, where
/// `x1` and `x2` are the variables at the two nodes just before that swap.
/// `e` must be well typed under `apply_swaps_to_env(psi, gamma)`.
pub fn insert_swaps(e: Expr, gamma: &TargetEnv, psi: &[(Qidx, Qidx)]) -> Result<Expr, AllocError> {
    let mut env = gamma.clone();
    let mut pairs = Vec::with_capacity(psi.len());
    for (a, b) in psi {
        let at = |q: &Qidx| {
            env.iter()
                .find(|(_, p)| *p == q)
                .map(|(v, _)| v.clone())
                .ok_or_else(|| AllocError::MissingOccupant(q.clone()))
        };
        let (x1, x2) = (at(a)?, at(b)?);
        env.insert(x1.clone(), b.clone());
        env.insert(x2.clone(), a.clone());
        pairs.push((x1, x2));
    }
    let span = e.span;
    Ok(pairs.into_iter().rev().fold(e, |body, (x1, x2)| {
        Expr::swap((x2.clone(), x1.clone()), (x1, x2), body).with_span(span)
    }))
}

/// Per-scope allocation state. `env` places every target variable in scope;
/// its image is the whole workspace.
#[derive(Clone, Debug)]
struct Ctx {
    live: BTreeMap<Var, Var>,
    frozen: Vec<Var>,
    free: BTreeSet<Var>,
    env: TargetEnv,
}

struct FnAlloc<'a> {
    theta: &'a FunEnv<TargetFunType>,
    space: &'a CouplingGraph,
    dist: Vec<Vec<usize>>,
    function: Option<FunName>,
    fresh: &'a mut FreshNames,
    trace: &'a mut Vec<TraceEvent>,
}

impl FnAlloc<'_> {
    fn distance(&self, a: &Qidx, b: &Qidx) -> usize {
        match (self.space.idx(a), self.space.idx(b)) {
            (Some(i), Some(j)) => self.dist[i][j],
            _ => usize::MAX,
        }
    }

    /// Keeps the source name when no variable in scope uses it.
    fn name_for(&mut self, env: &TargetEnv, src: &Var) -> Var {
        if env.contains_key(src) {
            self.fresh.var()
        } else {
            src.clone()
        }
    }

    fn live(ctx: &Ctx, v: &Var) -> Result<Var, AllocError> {
        ctx.live.get(v).cloned().ok_or(AllocError::Internal(
            "source variable has no target counterpart",
        ))
    }

    fn place(&mut self, source: &Var, target: &Var, qidx: &Qidx, span: Span) {
        self.trace.push(TraceEvent::Place {
            function: self.function.clone(),
            source: source.clone(),
            target: target.clone(),
            qidx: qidx.clone(),
            span,
        });
    }

    fn routed(&mut self, site: SwapSite, swaps: &SwapSequence, span: Span) {
        self.trace.push(TraceEvent::Swaps {
            function: self.function.clone(),
            site,
            swaps: swaps.clone(),
            span,
        });
    }

    /// Free variable closest to `target` (ties by name), excluding `taken`.
    fn nearest_free(&self, ctx: &Ctx, target: &Qidx, taken: &BTreeSet<Var>) -> Option<Var> {
        ctx.free
            .iter()
            .filter(|v| !taken.contains(*v))
            .min_by_key(|v| (self.distance(&ctx.env[*v], target), (*v).clone()))
            .cloned()
    }

    fn exp(
        &mut self,
        e: &source::Expr,
        mut ctx: Ctx,
        expected: Option<&[Qidx]>,
    ) -> Result<(Expr, Vec<Qidx>), AllocError> {
        use source::ExprKind as S;
        let span = e.span;
        match &e.kind {
            S::Return(vs) => {
                let mut ordered = Vec::with_capacity(ctx.env.len());
                for v in vs {
                    ordered.push(Self::live(&ctx, v)?);
                }
                ordered.extend(ctx.frozen.iter().cloned());
                let mut pads: Vec<Var> = ctx.free.iter().cloned().collect();
                match expected {
                    Some(layout) => {
                        if layout.len() != ctx.env.len() {
                            return Err(AllocError::Internal("return layout has the wrong width"));
                        }
                        let map: TokenMap = ordered
                            .iter()
                            .zip(layout)
                            .map(|(t, a)| (ctx.env[t].clone(), a.clone()))
                            .collect();
                        let psi = token_swapping_approx(self.space, &map)?;
                        self.routed(SwapSite::Return, &psi, span);
                        let after = apply_swaps_to_env(&psi, &ctx.env);
                        let slot: BTreeMap<&Qidx, usize> =
                            layout.iter().enumerate().map(|(i, q)| (q, i)).collect();
                        pads.sort_by_key(|p| slot.get(&after[p]).copied().unwrap_or(usize::MAX));
                        ordered.extend(pads);
                        let body = Expr::ret(ordered).with_span(span);
                        Ok((insert_swaps(body, &ctx.env, &psi)?, layout.to_vec()))
                    }
                    None => {
                        pads.sort_by(|a, b| ctx.env[a].cmp(&ctx.env[b]));
                        ordered.extend(pads);
                        let ty = ordered.iter().map(|v| ctx.env[v].clone()).collect();
                        Ok((Expr::ret(ordered).with_span(span), ty))
                    }
                }
            }
            S::InitLet { bound, body } => {
                let anchors: Vec<Qidx> = ctx
                    .env
                    .iter()
                    .filter(|(v, _)| !ctx.free.contains(*v))
                    .map(|(_, q)| q.clone())
                    .collect();
                let pick = ctx
                    .free
                    .iter()
                    .min_by_key(|v| {
                        let q = &ctx.env[*v];
                        let d = anchors.iter().map(|a| self.distance(a, q)).min();
                        (d.unwrap_or(0), (*v).clone())
                    })
                    .cloned()
                    .ok_or(AllocError::Internal("no free qubit for init"))?;
                ctx.free.remove(&pick);
                let q = ctx.env[&pick].clone();
                self.place(bound, &pick, &q, span);
                ctx.live.insert(bound.clone(), pick);
                self.exp(body, ctx, expected)
            }
            S::Discard { var, body } => {
                let t = Self::live(&ctx, var)?;
                ctx.live.remove(var);
                ctx.free.insert(t.clone());
                let (body, ty) = self.exp(body, ctx, expected)?;
                Ok((Expr::init(t, body).with_span(span), ty))
            }
            S::CnotLet { outs, ins, body } => {
                let t1 = Self::live(&ctx, &ins.0)?;
                let t2 = Self::live(&ctx, &ins.1)?;
                let (a1, a2) = (ctx.env[&t1].clone(), ctx.env[&t2].clone());
                let path = self
                    .space
                    .shortest_path(&a1, &a2)
                    .ok_or(AllocError::Internal("workspace is disconnected"))?;
                let psi: SwapSequence = path[..path.len() - 1]
                    .windows(2)
                    .map(|w| (w[0].clone(), w[1].clone()))
                    .collect();
                self.routed(SwapSite::Cnot, &psi, span);
                let before = ctx.env.clone();
                let mut env = apply_swaps_to_env(&psi, &ctx.env);
                let (b1, b2) = (env.remove(&t1).unwrap(), env.remove(&t2).unwrap());
                let o1 = self.name_for(&env, &outs.0);
                env.insert(o1.clone(), b1.clone());
                let o2 = self.name_for(&env, &outs.1);
                env.insert(o2.clone(), b2.clone());
                self.place(&outs.0, &o1, &b1, span);
                self.place(&outs.1, &o2, &b2, span);
                ctx.live.remove(&ins.0);
                ctx.live.remove(&ins.1);
                ctx.live.insert(outs.0.clone(), o1.clone());
                ctx.live.insert(outs.1.clone(), o2.clone());
                ctx.env = env;
                let (body, ty) = self.exp(body, ctx, expected)?;
                let gate = Expr::cnot((o1, o2), (t1, t2), body).with_span(span);
                Ok((insert_swaps(gate, &before, &psi)?, ty))
            }
            S::HLet { out, input, body } => {
                let t = Self::live(&ctx, input)?;
                let q = ctx.env.remove(&t).unwrap();
                let o = self.name_for(&ctx.env, out);
                ctx.env.insert(o.clone(), q.clone());
                self.place(out, &o, &q, span);
                ctx.live.remove(input);
                ctx.live.insert(out.clone(), o.clone());
                let (body, ty) = self.exp(body, ctx, expected)?;
                Ok((Expr::h(o, t, body).with_span(span), ty))
            }
            S::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                let sig = self.theta.get(fname).ok_or(AllocError::Internal(
                    "call to a function without a target type",
                ))?;
                let pattern = CouplingGraph::new(
                    sig.quantified.iter().cloned(),
                    sig.constraints.iter().map(|(a, b)| (a.clone(), b.clone())),
                )?;
                let phi = subgraph_isomorphism(self.space, &pattern)?;
                let slots: Vec<Qidx> = sig.params.iter().map(|a| phi[a].clone()).collect();
                let results: Vec<Qidx> = sig.results.iter().map(|a| phi[a].clone()).collect();
                if slots.len() < args.len() || results.len() < outs.len() {
                    return Err(AllocError::Internal(
                        "callee signature is narrower than the call",
                    ));
                }

                let mut ys = Vec::with_capacity(slots.len());
                for a in args {
                    ys.push(Self::live(&ctx, a)?);
                }
                let mut taken = BTreeSet::new();
                for slot in &slots[args.len()..] {
                    let pad = self
                        .nearest_free(&ctx, slot, &taken)
                        .ok_or(AllocError::Internal("not enough free qubits to pad a call"))?;
                    taken.insert(pad.clone());
                    ys.push(pad);
                }
                let map: TokenMap = ys
                    .iter()
                    .zip(&slots)
                    .map(|(y, s)| (ctx.env[y].clone(), s.clone()))
                    .collect();
                let psi = token_swapping_approx(self.space, &map)?;
                self.routed(SwapSite::Call(fname.clone()), &psi, span);

                let before = ctx.env.clone();
                let mut env = apply_swaps_to_env(&psi, &ctx.env);
                for y in &ys {
                    env.remove(y);
                }
                for a in args {
                    ctx.live.remove(a);
                }
                for pad in &taken {
                    ctx.free.remove(pad);
                }
                let mut xs = Vec::with_capacity(results.len());
                for (i, q) in results.iter().enumerate() {
                    let x = match outs.get(i) {
                        Some(src) => {
                            let x = self.name_for(&env, src);
                            self.place(src, &x, q, span);
                            ctx.live.insert(src.clone(), x.clone());
                            x
                        }
                        None => {
                            let x = self.fresh.var();
                            ctx.free.insert(x.clone());
                            x
                        }
                    };
                    env.insert(x.clone(), q.clone());
                    xs.push(x);
                }
                ctx.env = env;
                let (body, ty) = self.exp(body, ctx, expected)?;
                let call = Expr::call(xs, fname.clone(), ys, body).with_span(span);
                Ok((insert_swaps(call, &before, &psi)?, ty))
            }
            S::TupleLet { outs, rhs, body } => {
                let fv = rhs.free_vars();
                let mut inner = ctx.clone();
                inner.live.retain(|v, _| fv.contains(v));
                let set_aside: Vec<(Var, Var)> = ctx
                    .live
                    .iter()
                    .filter(|(v, _)| !fv.contains(*v))
                    .map(|(v, t)| (v.clone(), t.clone()))
                    .collect();
                inner
                    .frozen
                    .extend(set_aside.iter().map(|(_, t)| t.clone()));
                let frozen = inner.frozen.clone();
                let (rhs, ty) = self.exp(rhs, inner, None)?;

                let (n, j) = (outs.len(), frozen.len());
                if ty.len() < n + j {
                    return Err(AllocError::Internal(
                        "let right-hand side returned too few qubits",
                    ));
                }
                let mut env = TargetEnv::new();
                let mut binders = vec![Var::from(""); n];
                for (f, q) in frozen.iter().zip(&ty[n..n + j]) {
                    env.insert(f.clone(), q.clone());
                }
                let mut free = BTreeSet::new();
                let mut pads = Vec::new();
                for q in &ty[n + j..] {
                    let p = self.fresh.var();
                    env.insert(p.clone(), q.clone());
                    free.insert(p.clone());
                    pads.push(p);
                }
                let mut live: BTreeMap<Var, Var> = set_aside.into_iter().collect();
                for (i, (src, q)) in outs.iter().zip(&ty[..n]).enumerate() {
                    let x = self.name_for(&env, src);
                    env.insert(x.clone(), q.clone());
                    self.place(src, &x, q, span);
                    live.insert(src.clone(), x.clone());
                    binders[i] = x;
                }
                binders.extend(frozen);
                binders.extend(pads);
                let after = Ctx {
                    live,
                    frozen: ctx.frozen,
                    free,
                    env,
                };
                let (body, ty) = self.exp(body, after, expected)?;
                Ok((Expr::tuple_let(binders, rhs, body).with_span(span), ty))
            }
            S::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = Self::live(&ctx, cond)?;
                let (e1, t1) = self.exp(then_branch, ctx.clone(), expected)?;
                // Without a prescribed layout the else-branch is routed to
                // the layout the then-branch ended with.
                let (e2, t2) = self.exp(else_branch, ctx, Some(expected.unwrap_or(&t1)))?;
                if t1 != t2 {
                    return Err(AllocError::Internal("branches end in different layouts"));
                }
                Ok((Expr::if_(c, e1, e2).with_span(span), t1))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn alloc_body(
    theta: &FunEnv<TargetFunType>,
    space: &CouplingGraph,
    function: Option<FunName>,
    fresh: &mut FreshNames,
    trace: &mut Vec<TraceEvent>,
    e: &source::Expr,
    ctx: Ctx,
    expected: Option<&[Qidx]>,
) -> Result<Expr, AllocError> {
    let mut fa = FnAlloc {
        theta,
        space,
        dist: space.all_distances(),
        function,
        fresh,
        trace,
    };
    fa.exp(e, ctx, expected).map(|(e, _)| e)
}

/// Allocates every definition in order. Function `f : τ1..τn --N--> T` on
/// workspace `Gk` (`k = n + N`) becomes
/// `∀ V(Gk). E(Gk) ⇒ q(v1)..q(vk) → q(v1)..q(vk)`: the original parameters
/// sit on the first `n` nodes, fresh spare parameters on the rest. A
/// function needing no qubit at all gets the empty workspace.
pub fn qubit_alloc_func(
    theta: &FunEnv<source::FunDef>,
    workspaces: &FunEnv<Workspace>,
    chain: &SubgraphChain,
    fresh: &mut FreshNames,
    trace: &mut Vec<TraceEvent>,
) -> Result<(FunEnv<TargetFunType>, Vec<target::FunDef>), AllocError> {
    let mut sigs = FunEnv::new();
    let mut defs = Vec::new();
    let empty = CouplingGraph::new(Vec::<Qidx>::new(), Vec::<(Qidx, Qidx)>::new())?;
    for (name, def) in theta.iter() {
        let ws = workspaces
            .get(name)
            .ok_or(AllocError::Internal("function without a workspace"))?;
        let space = if ws.clamped {
            &empty
        } else {
            chain
                .get(ws.size)
                .ok_or(AllocError::Internal("workspace outside the chain"))?
        };
        let nodes: Vec<Qidx> = space.nodes().to_vec();
        if def.params.len() > nodes.len() {
            return Err(AllocError::Internal(
                "workspace smaller than the parameter list",
            ));
        }
        let mut params = def.params.clone();
        let mut env = TargetEnv::new();
        let mut free = BTreeSet::new();
        for (i, q) in nodes.iter().enumerate() {
            let x = match def.params.get(i) {
                Some(x) => x.clone(),
                None => {
                    let y = fresh.var();
                    params.push(y.clone());
                    free.insert(y.clone());
                    y
                }
            };
            env.insert(x, q.clone());
        }
        let sig = TargetFunType {
            quantified: nodes.clone(),
            constraints: space.edges().clone(),
            params: nodes.clone(),
            results: nodes.clone(),
        };
        sigs.insert(name.clone(), sig.clone());
        let ctx = Ctx {
            live: def.params.iter().map(|x| (x.clone(), x.clone())).collect(),
            frozen: Vec::new(),
            free,
            env,
        };
        let body = alloc_body(
            &sigs,
            space,
            Some(name.clone()),
            fresh,
            trace,
            &def.body,
            ctx,
            Some(&nodes),
        )?;
        defs.push(target::FunDef {
            name: name.clone(),
            sig,
            params,
            body,
            span: def.span,
        });
    }
    Ok((sigs, defs))
}

/// Allocates `p` on `g`. `derivation` is the result of checking `p` and
/// supplies the function types and the entry budget. The output is checked
/// with the target checker before it is returned.
pub fn qubit_alloc(
    p: &source::Program,
    derivation: &ProgramDerivation,
    g: &CouplingGraph,
    dialect: Dialect,
) -> Result<Allocation, AllocError> {
    if derivation.budget > g.node_count() {
        return Err(AllocError::BudgetExceedsDevice {
            budget: derivation.budget,
            nodes: g.node_count(),
        });
    }
    let chain = construct_subgraphs(g)?;
    let workspaces = assign_subgraphs(&derivation.theta, &chain)?;
    let defs: FunEnv<source::FunDef> = p.defs.iter().map(|d| (d.name.clone(), d.clone())).collect();

    let mut fresh = FreshNames::new();
    let mut trace = Vec::new();
    let (sigs, tdefs) = qubit_alloc_func(&defs, &workspaces, &chain, &mut fresh, &mut trace)?;

    let mut preamble = Vec::with_capacity(g.node_count());
    let mut env = TargetEnv::new();
    for q in g.nodes() {
        let v = fresh.var();
        env.insert(v.clone(), q.clone());
        preamble.push((v, q.clone()));
    }
    let ctx = Ctx {
        live: BTreeMap::new(),
        frozen: Vec::new(),
        free: env.keys().cloned().collect(),
        env,
    };
    let entry = alloc_body(&sigs, g, None, &mut fresh, &mut trace, &p.entry, ctx, None)?;
    let program = target::Program {
        defs: tdefs,
        preamble,
        entry,
    };
    check_program_tgt(&program, g, dialect).map_err(AllocError::InternalPostconditionViolation)?;
    Ok(Allocation {
        program,
        chain,
        workspaces,
        trace,
    })
}
