//! Small-step semantics of the source language.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{wire, DensityState, Frame, Machine, RuntimeTypeError, SimError, Successors};
use crate::check::source::{check_expr, SourceEnv};
use crate::names::Var;
use crate::source::{Expr, ExprKind, Program};
use crate::subst::apply_var_subst;
use crate::types::{Dialect, FunEnv, SourceFunType, VarSubst};

/// `⟨X, ρ, E[e]⟩`: free wires, the state, the expression in focus and the
/// evaluation contexts around it, innermost last.
#[derive(Clone, Debug)]
pub struct SrcConfig {
    pub free: BTreeSet<Var>,
    pub state: DensityState,
    pub expr: Expr,
    pub ctx: Vec<Frame<Expr>>,
}

impl SrcConfig {
    /// `main` with `wires` free qubits `$w0, $w1, …` in `|0…0⟩`.
    pub fn initial(p: &Program, wires: usize) -> Result<Self, SimError> {
        let labels: Vec<Var> = (0..wires).map(wire).collect();
        Ok(SrcConfig {
            free: labels.iter().cloned().collect(),
            state: DensityState::zero(labels)?,
            expr: p.entry.clone(),
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

enum Reduced {
    Done(Expr),
    Measure { wire: Var, zero: Expr, one: Expr },
}

fn rename<I>(pairs: I, e: &Expr) -> Result<Expr, SimError>
where
    I: IntoIterator<Item = (Var, Var)>,
{
    let s: VarSubst = pairs.into_iter().collect();
    apply_var_subst(&s, e).map_err(|_| SimError::StuckIllFormed("variable capture"))
}

fn reduce(
    e: Expr,
    ctx: &mut Vec<Frame<Expr>>,
    st: &mut DensityState,
    free: &mut BTreeSet<Var>,
    p: &Program,
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
        ExprKind::InitLet { bound, body } => {
            let x = free
                .pop_first()
                .ok_or(SimError::StuckNoFreeQubit { span: e.span })?;
            done(rename([(bound, x)], &body)?)
        }
        ExprKind::Discard { var, body } => {
            st.reset(&var)?;
            if !free.insert(var) {
                return Err(SimError::StuckIllFormed("discarding a free qubit"));
            }
            done(*body)
        }
        ExprKind::CnotLet { outs, ins, body } => {
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

/// One step of `cfg`. `init` takes the smallest free wire.
pub fn step_src(cfg: SrcConfig, p: &Program) -> Result<Successors<SrcConfig>, SimError> {
    let SrcConfig {
        mut free,
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
    Ok(match reduce(expr, &mut ctx, &mut state, &mut free, p)? {
        Reduced::Done(expr) => Successors::One(SrcConfig {
            free,
            state,
            expr,
            ctx,
        }),
        Reduced::Measure { wire, zero, one } => {
            let mut s0 = state.clone();
            s0.project(&wire, false)?;
            state.project(&wire, true)?;
            Successors::Measure {
                zero: SrcConfig {
                    free: free.clone(),
                    state: s0,
                    expr: zero,
                    ctx: ctx.clone(),
                },
                one: SrcConfig {
                    free,
                    state,
                    expr: one,
                    ctx,
                },
            }
        }
    })
}

/// The source interpreter over one program.
pub struct SourceMachine<'a> {
    pub program: &'a Program,
}

impl Machine for SourceMachine<'_> {
    type Config = SrcConfig;

    fn state<'c>(&self, cfg: &'c SrcConfig) -> &'c DensityState {
        &cfg.state
    }

    fn value(&self, cfg: &SrcConfig) -> Option<Vec<Var>> {
        match &cfg.expr.kind {
            ExprKind::Return(vs) if cfg.ctx.is_empty() => Some(vs.clone()),
            _ => None,
        }
    }

    fn step(&self, cfg: SrcConfig) -> Result<Successors<SrcConfig>, SimError> {
        step_src(cfg, self.program)
    }
}

/// The runtime typing of a configuration: with `Γ = FV(e)` and `N = |X|`,
/// `Γ` and `X` are disjoint wires of `ρ` and `Θ | N | Γ ⊢ e` holds.
/// Returns `|X| + |Γ|`, which every step preserves.
pub fn check_runtime_src(
    theta: &FunEnv<SourceFunType>,
    cfg: &SrcConfig,
    dialect: Dialect,
) -> Result<usize, RuntimeTypeError> {
    let term = cfg.term();
    let gamma: SourceEnv = term.free_vars();
    for v in gamma.iter().chain(&cfg.free) {
        if !cfg.state.labels().contains(v) {
            return Err(RuntimeTypeError::UnknownWire(v.clone()));
        }
    }
    if let Some(v) = gamma.intersection(&cfg.free).next() {
        return Err(RuntimeTypeError::Overlap(v.clone()));
    }
    check_expr(theta, cfg.free.len(), &gamma, &term, dialect).map_err(RuntimeTypeError::Source)?;
    Ok(cfg.free.len() + gamma.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::source::check_fundefs;
    use crate::sim::run_to_values;
    use crate::source::FunDef;
    use alloc::vec;

    fn run(p: &Program, wires: usize) -> Result<Vec<super::super::BranchTrace>, SimError> {
        let cfg = SrcConfig::initial(p, wires).unwrap();
        run_to_values(&SourceMachine { program: p }, cfg, 1000)
    }

    #[test]
    fn init_consumes_a_free_wire() {
        let p = Program::new(vec![], Expr::init("x", Expr::ret(["x"])));
        let cfg = SrcConfig::initial(&p, 1).unwrap();
        let Successors::One(next) = step_src(cfg, &p).unwrap() else {
            panic!("init does not branch");
        };
        assert!(next.free.is_empty());
        assert_eq!(next.expr, Expr::ret([wire(0)]));
    }

    #[test]
    fn init_without_free_wire_is_stuck() {
        let p = Program::new(vec![], Expr::init("x", Expr::ret(["x"])));
        assert!(matches!(run(&p, 0), Err(SimError::StuckNoFreeQubit { .. })));
    }

    #[test]
    fn measurement_splits_evenly() {
        let p = Program::new(
            vec![],
            Expr::init(
                "x",
                Expr::h("y", "x", Expr::if_("y", Expr::ret(["y"]), Expr::ret(["y"]))),
            ),
        );
        let traces = run(&p, 1).unwrap();
        assert_eq!(traces.len(), 2);
        let total: f64 = traces.iter().map(|t| t.weight()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((traces[0].weight() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_branches_are_dropped() {
        let p = Program::new(
            vec![],
            Expr::init("x", Expr::if_("x", Expr::ret(["x"]), Expr::ret(["x"]))),
        );
        let traces = run(&p, 1).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].path, vec![false]);
    }

    #[test]
    fn diverging_recursion_runs_out_of_fuel() {
        let f = FunDef::new(
            "loop",
            ["x"],
            Expr::call(["y"], "loop", ["x"], Expr::ret(["y"])),
        );
        let p = Program::new(
            vec![f],
            Expr::init("a", Expr::call(["b"], "loop", ["a"], Expr::ret(["b"]))),
        );
        assert!(matches!(run(&p, 1), Err(SimError::FuelExhausted { .. })));
    }

    #[test]
    fn discard_resets_and_frees() {
        let p = Program::new(
            vec![],
            Expr::init(
                "x",
                Expr::init(
                    "y",
                    Expr::h(
                        "z",
                        "x",
                        Expr::cnot(("a", "b"), ("z", "y"), Expr::discard("a", Expr::ret(["b"]))),
                    ),
                ),
            ),
        );
        let traces = run(&p, 2).unwrap();
        assert_eq!(traces.len(), 1);
        let s = &traces[0].state;
        // $w0 reset, $w1 maximally mixed.
        assert!((s.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((s.get(1, 1).re - 0.5).abs() < 1e-12);
        assert!(s.get(0, 1).norm_sqr() < 1e-24);
    }

    #[test]
    fn runtime_typing_is_conserved() {
        let f = FunDef::new(
            "f",
            ["x"],
            Expr::init(
                "t",
                Expr::cnot(("a", "b"), ("x", "t"), Expr::discard("b", Expr::ret(["a"]))),
            ),
        );
        let p = Program::new(
            vec![f],
            Expr::init(
                "u",
                Expr::tuple_let(
                    ["v"],
                    Expr::call(["w"], "f", ["u"], Expr::ret(["w"])),
                    Expr::if_(
                        "v",
                        Expr::ret(["v"]),
                        Expr::discard("v", Expr::init("z", Expr::ret(["z"]))),
                    ),
                ),
            ),
        );
        let (theta, _) = check_fundefs(&p.defs, Dialect::CORE).unwrap();
        let mut cfg = SrcConfig::initial(&p, 2).unwrap();
        let m = SourceMachine { program: &p };
        let measure = check_runtime_src(&theta, &cfg, Dialect::CORE).unwrap();
        while m.value(&cfg).is_none() {
            cfg = match m.step(cfg).unwrap() {
                Successors::One(c) => c,
                Successors::Measure { zero, .. } => zero,
            };
            assert_eq!(check_runtime_src(&theta, &cfg, Dialect::CORE), Ok(measure));
        }
    }
}
