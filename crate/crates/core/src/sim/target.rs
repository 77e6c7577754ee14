//! Small-step semantics of the target language. Every node of the coupling
//! graph is one wire for the whole run.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{
    node_wire, wire_node, DensityState, Frame, Machine, RuntimeTypeError, SimError, Successors,
};
use crate::check::target::check_expr_tgt;
use crate::graph::CouplingGraph;
use crate::names::{Qidx, Span, Var};
use crate::subst::apply_var_subst;
use crate::target::{Expr, ExprKind, Program};
use crate::types::{Dialect, FunEnv, TargetEnv, TargetFunType, VarSubst};

/// `⟨ρ, E[e]⟩`, with the evaluation contexts innermost last.
#[derive(Clone, Debug)]
pub struct TgtConfig {
    pub state: DensityState,
    pub expr: Expr,
    pub ctx: Vec<Frame<Expr>>,
}

impl TgtConfig {
    /// `main` over one `|0⟩` wire per node, with the preamble variables
    /// replaced by their wires.
    pub fn initial(p: &Program, g: &CouplingGraph) -> Result<Self, SimError> {
        let labels: Vec<Var> = g.nodes().iter().map(node_wire).collect();
        let mut seen = BTreeSet::new();
        for (_, q) in &p.preamble {
            if !g.contains_node(q) || !seen.insert(q) {
                return Err(SimError::StuckIllFormed(
                    "preamble does not place variables on distinct nodes",
                ));
            }
        }
        let expr = rename(
            p.preamble.iter().map(|(x, q)| (x.clone(), node_wire(q))),
            &p.entry,
        )?;
        Ok(TgtConfig {
            state: DensityState::zero(labels)?,
            expr,
            ctx: Vec::new(),
        })
    }

    /// The whole expression `E[e]`.
    pub fn term(&self) -> Expr {
        self.ctx.iter().rev().fold(self.expr.clone(), |e, f| {
            Expr::at(
                ExprKind::TupleLet {
                    outs: f.outs.clone(),
                    rhs: Box::new(e),
                    body: Box::new(f.body.clone()),
                },
                f.span,
            )
        })
    }
}

fn rename<I>(pairs: I, e: &Expr) -> Result<Expr, SimError>
where
    I: IntoIterator<Item = (Var, Var)>,
{
    let s: VarSubst = pairs.into_iter().collect();
    apply_var_subst(&s, e).map_err(|_| SimError::StuckIllFormed("variable capture"))
}

fn adjacent(g: &CouplingGraph, a: &Var, b: &Var, span: Span) -> Result<(), SimError> {
    let (qa, qb) = match (wire_node(a), wire_node(b)) {
        (Some(qa), Some(qb)) => (qa, qb),
        _ => {
            return Err(SimError::StuckIllFormed(
                "gate on a variable that is not a wire",
            ))
        }
    };
    if g.has_edge(&qa, &qb) {
        Ok(())
    } else {
        Err(SimError::ConnectivityStuck { a: qa, b: qb, span })
    }
}

enum Reduced {
    Done(Expr),
    Measure { wire: Var, zero: Expr, one: Expr },
}

fn reduce(
    e: Expr,
    ctx: &mut Vec<Frame<Expr>>,
    st: &mut DensityState,
    p: &Program,
    g: &CouplingGraph,
) -> Result<Reduced, SimError> {
    let done = |e| Ok(Reduced::Done(e));
    match e.kind {
        ExprKind::Return(vs) => {
            let frame = ctx
                .pop()
                .ok_or(SimError::StuckIllFormed("a value does not step"))?;
            if vs.len() != frame.outs.len() {
                return Err(SimError::StuckIllFormed("tuple arity mismatch"));
            }
            done(rename(frame.outs.into_iter().zip(vs), &frame.body)?)
        }
        ExprKind::Init { var, body } => {
            st.reset(&var)?;
            done(*body)
        }
        ExprKind::SwapLet { outs, ins, body } => {
            adjacent(g, &ins.0, &ins.1, e.span)?;
            st.swap(&ins.0, &ins.1)?;
            done(rename([(outs.0, ins.0), (outs.1, ins.1)], &body)?)
        }
        ExprKind::CnotLet { outs, ins, body } => {
            adjacent(g, &ins.0, &ins.1, e.span)?;
            st.cnot(&ins.0, &ins.1)?;
            done(rename([(outs.0, ins.0), (outs.1, ins.1)], &body)?)
        }
        ExprKind::HLet { out, input, body } => {
            st.hadamard(&input)?;
            done(rename([(out, input)], &body)?)
        }
        ExprKind::CallLet {
            outs,
            fname,
            args,
            body,
        } => {
            let def = p
                .def(&fname)
                .ok_or(SimError::StuckIllFormed("call to an unknown function"))?;
            if def.params.len() != args.len() {
                return Err(SimError::StuckIllFormed("wrong number of arguments"));
            }
            let inlined = rename(def.params.iter().cloned().zip(args), &def.body)?;
            ctx.push(Frame {
                outs,
                body: *body,
                span: e.span,
            });
            done(inlined)
        }
        ExprKind::TupleLet { .. } => Err(SimError::StuckIllFormed("context not decomposed")),
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => Ok(Reduced::Measure {
            wire: cond,
            zero: *else_branch,
            one: *then_branch,
        }),
    }
}

/// One step of `cfg`; gates on non-adjacent nodes are stuck.
pub fn step_tgt(
    cfg: TgtConfig,
    p: &Program,
    g: &CouplingGraph,
) -> Result<Successors<TgtConfig>, SimError> {
    let TgtConfig {
        mut state,
        mut expr,
        mut ctx,
    } = cfg;
    // Moving into an evaluation context is not a step.
    while let ExprKind::TupleLet { outs, rhs, body } = expr.kind {
        ctx.push(Frame {
            outs,
            body: *body,
            span: expr.span,
        });
        expr = *rhs;
    }
    Ok(match reduce(expr, &mut ctx, &mut state, p, g)? {
        Reduced::Done(expr) => Successors::One(TgtConfig { state, expr, ctx }),
        Reduced::Measure { wire, zero, one } => {
            let mut s0 = state.clone();
            s0.project(&wire, false)?;
            state.project(&wire, true)?;
            Successors::Measure {
                zero: TgtConfig {
                    state: s0,
                    expr: zero,
                    ctx: ctx.clone(),
                },
                one: TgtConfig {
                    state,
                    expr: one,
                    ctx,
                },
            }
        }
    })
}

/// The target interpreter over one program and device.
pub struct TargetMachine<'a> {
    pub program: &'a Program,
    pub graph: &'a CouplingGraph,
}

impl Machine for TargetMachine<'_> {
    type Config = TgtConfig;

    fn state<'c>(&self, cfg: &'c TgtConfig) -> &'c DensityState {
        &cfg.state
    }

    fn value(&self, cfg: &TgtConfig) -> Option<Vec<Var>> {
        match &cfg.expr.kind {
            ExprKind::Return(vs) if cfg.ctx.is_empty() => Some(vs.clone()),
            _ => None,
        }
    }

    fn step(&self, cfg: TgtConfig) -> Result<Successors<TgtConfig>, SimError> {
        step_tgt(cfg, self.program, self.graph)
    }
}

/// The runtime typing of a target configuration: every free variable is a
/// wire, typed by its node, and `Θ | E(G) | Γ ⊢ e` holds.
pub fn check_runtime_tgt(
    theta: &FunEnv<TargetFunType>,
    g: &CouplingGraph,
    cfg: &TgtConfig,
    dialect: Dialect,
) -> Result<(), RuntimeTypeError> {
    let term = cfg.term();
    let mut gamma = TargetEnv::new();
    for v in term.free_vars() {
        match wire_node(&v) {
            Some(q) if cfg.state.labels().contains(&v) => {
                gamma.insert(v, q);
            }
            _ => return Err(RuntimeTypeError::UnknownWire(v)),
        }
    }
    let nodes: BTreeSet<Qidx> = g.nodes().iter().cloned().collect();
    check_expr_tgt(theta, g.edges(), &nodes, &gamma, &term, dialect)
        .map(|_| ())
        .map_err(RuntimeTypeError::Target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{path3, qx2};
    use crate::sim::run_to_values;
    use alloc::vec;

    fn program(preamble: &[(&str, &str)], entry: Expr) -> Program {
        Program {
            defs: vec![],
            preamble: preamble
                .iter()
                .map(|(v, q)| (Var::from(*v), Qidx::from(*q)))
                .collect(),
            entry,
        }
    }

    #[test]
    fn missing_edge_is_stuck() {
        let p = program(
            &[("x", "q1"), ("y", "q4")],
            Expr::cnot(("a", "b"), ("x", "y"), Expr::ret(["a", "b"])),
        );
        let g = qx2();
        let cfg = TgtConfig::initial(&p, &g).unwrap();
        let err = run_to_values(
            &TargetMachine {
                program: &p,
                graph: &g,
            },
            cfg,
            100,
        )
        .unwrap_err();
        assert!(matches!(err, SimError::ConnectivityStuck { .. }));
    }

    #[test]
    fn swap_moves_state_and_variable() {
        // v takes over the wire of x and u the wire of y.
        let p = program(
            &[("x", "a"), ("y", "b"), ("z", "c")],
            Expr::swap(
                ("v", "u"),
                ("x", "y"),
                Expr::cnot(("p", "r"), ("u", "z"), Expr::ret(["v", "p", "r"])),
            ),
        );
        let g = path3();
        let cfg = TgtConfig::initial(&p, &g).unwrap();
        let traces = run_to_values(
            &TargetMachine {
                program: &p,
                graph: &g,
            },
            cfg,
            100,
        )
        .unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(
            traces[0].values,
            vec![Var::from("$a"), Var::from("$b"), Var::from("$c")]
        );
    }

    #[test]
    fn init_resets() {
        let p = program(
            &[("x", "a"), ("y", "b")],
            Expr::h("z", "x", Expr::init("z", Expr::ret(["z", "y"]))),
        );
        let g = path3();
        let cfg = TgtConfig::initial(&p, &g).unwrap();
        let traces = run_to_values(
            &TargetMachine {
                program: &p,
                graph: &g,
            },
            cfg,
            100,
        )
        .unwrap();
        assert!((traces[0].state.get(0, 0).re - 1.0).abs() < 1e-12);
    }
}
