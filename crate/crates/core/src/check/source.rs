//! The linear type system of the source language.
//!
//! Judgments have the form `Θ | N | Γ ⊢ e : T`: under function environment
//! `Θ`, with at most `N` qubits available for allocation, the linear context
//! `Γ` is consumed exactly by `e`, which yields a tuple of `|T|` qubits.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{write_set, Indent};
use crate::names::{FunName, Span, Var};
use crate::source::{Expr, ExprKind, FunDef, Program};
use crate::types::{Dialect, FunEnv, QbitTuple, SourceFunType};

pub type SourceEnv = BTreeSet<Var>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SrcErrorKind {
    /// Variables still in the context at a return.
    UnusedVariable(Vec<Var>),
    UnknownVariable(Var),
    /// Shadowing of a live variable, or the same variable used twice.
    DuplicateVariable(Var),
    BudgetExceeded {
        needed: usize,
        available: usize,
    },
    ArityMismatch {
        expected: usize,
        found: usize,
    },
    BranchMismatch {
        then_arity: usize,
        else_arity: usize,
    },
    UnknownFunction(FunName),
    DuplicateFunction(FunName),
    SignatureInferenceFailure(FunName),
    /// A gate outside the selected dialect.
    DialectViolation(&'static str),
}

impl fmt::Display for SrcErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrcErrorKind::UnusedVariable(vs) => {
                f.write_str("UnusedVariable: linear variables not returned: ")?;
                write_set(f, vs)
            }
            SrcErrorKind::UnknownVariable(v) => write!(f, "UnknownVariable: `{v}` is not in scope"),
            SrcErrorKind::DuplicateVariable(v) => {
                write!(f, "DuplicateVariable: `{v}` is already bound or used twice")
            }
            SrcErrorKind::BudgetExceeded { needed, available } => write!(
                f,
                "BudgetExceeded: needs {needed} free qubit(s), only {available} available"
            ),
            SrcErrorKind::ArityMismatch { expected, found } => {
                write!(f, "ArityMismatch: expected {expected}, found {found}")
            }
            SrcErrorKind::BranchMismatch {
                then_arity,
                else_arity,
            } => write!(
                f,
                "BranchMismatch: then-branch returns {then_arity} qubit(s), else-branch {else_arity}"
            ),
            SrcErrorKind::UnknownFunction(g) => {
                write!(f, "UnknownFunction: `{g}` is not defined before this point")
            }
            SrcErrorKind::DuplicateFunction(g) => {
                write!(f, "DuplicateFunction: `{g}` is defined twice")
            }
            SrcErrorKind::SignatureInferenceFailure(g) => {
                write!(f, "SignatureInferenceFailure: no qubit budget makes `{g}` well typed")
            }
            SrcErrorKind::DialectViolation(what) => {
                write!(f, "DialectViolation: `{what}` is not enabled")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrcTypeError {
    pub kind: SrcErrorKind,
    pub span: Span,
    /// Enclosing function; `None` for the entry expression.
    pub function: Option<FunName>,
}

impl fmt::Display for SrcTypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.function {
            Some(g) => write!(f, "in `{g}`: {}", self.kind),
            None => write!(f, "in main: {}", self.kind),
        }
    }
}

impl core::error::Error for SrcTypeError {}

fn err(kind: SrcErrorKind, span: Span) -> SrcTypeError {
    SrcTypeError {
        kind,
        span,
        function: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrcRule {
    Return,
    Init,
    Discard,
    Cnot,
    Call,
    Let,
    If,
    H,
}

impl SrcRule {
    pub fn name(self) -> &'static str {
        match self {
            SrcRule::Return => "T-Return",
            SrcRule::Init => "T-Init",
            SrcRule::Discard => "T-Discard",
            SrcRule::Cnot => "T-Cnot",
            SrcRule::Call => "T-Call",
            SrcRule::Let => "T-Let",
            SrcRule::If => "T-If",
            SrcRule::H => "T-H",
        }
    }
}

/// One node of a derivation: the rule used, the conclusion's `N` and `Γ`,
/// a one-line rendering of the subject, and the result arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrcDerivation {
    pub rule: SrcRule,
    pub budget: usize,
    pub env: Vec<Var>,
    pub subject: String,
    pub arity: usize,
    pub span: Span,
    pub premises: Vec<SrcDerivation>,
}

impl SrcDerivation {
    /// Budgets down the leftmost spine of premises, root first.
    pub fn budget_spine(&self) -> Vec<usize> {
        let mut out = vec![self.budget];
        let mut node = self;
        while let Some(p) = node.premises.first() {
            out.push(p.budget);
            node = p;
        }
        out
    }

    pub fn nodes(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(SrcDerivation::nodes)
            .sum::<usize>()
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        write!(
            f,
            "{}{:<10} {} | ",
            Indent(depth),
            self.rule.name(),
            self.budget
        )?;
        write_set(f, &self.env)?;
        writeln!(f, " |- {} : {}", self.subject, QbitTuple(self.arity))?;
        for p in &self.premises {
            p.write_at(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for SrcDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// Derivation of a whole program at a given budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramDerivation {
    pub theta: FunEnv<SourceFunType>,
    /// One derivation per function body, in declaration order.
    pub defs: Vec<(FunName, SrcDerivation)>,
    pub entry: SrcDerivation,
    pub budget: usize,
}

impl fmt::Display for ProgramDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, d) in &self.defs {
            let ty = self.theta.get(name).expect("every checked def has a type");
            writeln!(f, "fun {name} : {ty}")?;
            d.write_at(f, 1)?;
        }
        writeln!(f, "main at N = {}", self.budget)?;
        self.entry.write_at(f, 1)
    }
}

struct Checker<'a> {
    theta: &'a FunEnv<SourceFunType>,
    dialect: Dialect,
}

fn distinct(vars: &[Var], span: Span) -> Result<(), SrcTypeError> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v) {
            return Err(err(SrcErrorKind::DuplicateVariable(v.clone()), span));
        }
    }
    Ok(())
}

fn consume(gamma: &mut SourceEnv, v: &Var, span: Span) -> Result<(), SrcTypeError> {
    if gamma.remove(v) {
        Ok(())
    } else {
        Err(err(SrcErrorKind::UnknownVariable(v.clone()), span))
    }
}

fn bind(gamma: &mut SourceEnv, v: &Var, span: Span) -> Result<(), SrcTypeError> {
    if gamma.insert(v.clone()) {
        Ok(())
    } else {
        Err(err(SrcErrorKind::DuplicateVariable(v.clone()), span))
    }
}

impl Checker<'_> {
    fn check(
        &self,
        n: usize,
        gamma: &SourceEnv,
        e: &Expr,
    ) -> Result<(usize, SrcDerivation), SrcTypeError> {
        let span = e.span;
        let node = |rule, arity, premises| SrcDerivation {
            rule,
            budget: n,
            env: gamma.iter().cloned().collect(),
            subject: format!("{}", e.head()),
            arity,
            span,
            premises,
        };
        match &e.kind {
            ExprKind::Return(vs) => {
                distinct(vs, span)?;
                for v in vs {
                    if !gamma.contains(v) {
                        return Err(err(SrcErrorKind::UnknownVariable(v.clone()), span));
                    }
                }
                let returned: BTreeSet<&Var> = vs.iter().collect();
                let unused: Vec<Var> = gamma
                    .iter()
                    .filter(|v| !returned.contains(v))
                    .cloned()
                    .collect();
                if !unused.is_empty() {
                    return Err(err(SrcErrorKind::UnusedVariable(unused), span));
                }
                Ok((vs.len(), node(SrcRule::Return, vs.len(), vec![])))
            }
            ExprKind::InitLet { bound, body } => {
                if n < 1 {
                    return Err(err(
                        SrcErrorKind::BudgetExceeded {
                            needed: 1,
                            available: n,
                        },
                        span,
                    ));
                }
                let mut inner = gamma.clone();
                bind(&mut inner, bound, span)?;
                let (t, d) = self.check(n - 1, &inner, body)?;
                Ok((t, node(SrcRule::Init, t, vec![d])))
            }
            ExprKind::Discard { var, body } => {
                let mut inner = gamma.clone();
                consume(&mut inner, var, span)?;
                let (t, d) = self.check(n + 1, &inner, body)?;
                Ok((t, node(SrcRule::Discard, t, vec![d])))
            }
            ExprKind::CnotLet { outs, ins, body } => {
                if ins.0 == ins.1 {
                    return Err(err(SrcErrorKind::DuplicateVariable(ins.0.clone()), span));
                }
                if outs.0 == outs.1 {
                    return Err(err(SrcErrorKind::DuplicateVariable(outs.0.clone()), span));
                }
                let mut inner = gamma.clone();
                consume(&mut inner, &ins.0, span)?;
                consume(&mut inner, &ins.1, span)?;
                bind(&mut inner, &outs.0, span)?;
                bind(&mut inner, &outs.1, span)?;
                let (t, d) = self.check(n, &inner, body)?;
                Ok((t, node(SrcRule::Cnot, t, vec![d])))
            }
            ExprKind::HLet { out, input, body } => {
                if !self.dialect.hadamard {
                    return Err(err(SrcErrorKind::DialectViolation("h"), span));
                }
                let mut inner = gamma.clone();
                consume(&mut inner, input, span)?;
                bind(&mut inner, out, span)?;
                let (t, d) = self.check(n, &inner, body)?;
                Ok((t, node(SrcRule::H, t, vec![d])))
            }
            ExprKind::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                let ty = self
                    .theta
                    .get(fname)
                    .ok_or_else(|| err(SrcErrorKind::UnknownFunction(fname.clone()), span))?;
                if args.len() != ty.params {
                    return Err(err(
                        SrcErrorKind::ArityMismatch {
                            expected: ty.params,
                            found: args.len(),
                        },
                        span,
                    ));
                }
                if outs.len() != ty.results {
                    return Err(err(
                        SrcErrorKind::ArityMismatch {
                            expected: ty.results,
                            found: outs.len(),
                        },
                        span,
                    ));
                }
                distinct(args, span)?;
                distinct(outs, span)?;
                let mut inner = gamma.clone();
                for a in args {
                    consume(&mut inner, a, span)?;
                }
                if n < ty.budget {
                    return Err(err(
                        SrcErrorKind::BudgetExceeded {
                            needed: ty.budget,
                            available: n,
                        },
                        span,
                    ));
                }
                let after = (n + args.len()).checked_sub(outs.len()).ok_or_else(|| {
                    err(
                        SrcErrorKind::BudgetExceeded {
                            needed: outs.len() - args.len(),
                            available: n,
                        },
                        span,
                    )
                })?;
                for o in outs {
                    bind(&mut inner, o, span)?;
                }
                let (t, d) = self.check(after, &inner, body)?;
                Ok((t, node(SrcRule::Call, t, vec![d])))
            }
            ExprKind::TupleLet { outs, rhs, body } => {
                distinct(outs, span)?;
                let fv = rhs.free_vars();
                let gamma1: SourceEnv = gamma.intersection(&fv).cloned().collect();
                let mut gamma2: SourceEnv = gamma.difference(&fv).cloned().collect();
                let (k, d1) = self.check(n, &gamma1, rhs)?;
                if k != outs.len() {
                    return Err(err(
                        SrcErrorKind::ArityMismatch {
                            expected: outs.len(),
                            found: k,
                        },
                        span,
                    ));
                }
                let after = (n + gamma1.len()).checked_sub(k).ok_or_else(|| {
                    err(
                        SrcErrorKind::BudgetExceeded {
                            needed: k - gamma1.len(),
                            available: n,
                        },
                        span,
                    )
                })?;
                for o in outs {
                    bind(&mut gamma2, o, span)?;
                }
                let (t, d2) = self.check(after, &gamma2, body)?;
                Ok((t, node(SrcRule::Let, t, vec![d1, d2])))
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if !gamma.contains(cond) {
                    return Err(err(SrcErrorKind::UnknownVariable(cond.clone()), span));
                }
                let (t1, d1) = self.check(n, gamma, then_branch)?;
                let (t2, d2) = self.check(n, gamma, else_branch)?;
                if t1 != t2 {
                    return Err(err(
                        SrcErrorKind::BranchMismatch {
                            then_arity: t1,
                            else_arity: t2,
                        },
                        span,
                    ));
                }
                Ok((t1, node(SrcRule::If, t1, vec![d1, d2])))
            }
        }
    }
}

/// `Θ | N | Γ ⊢ e : T`, returning `|T|` and the derivation.
pub fn check_expr(
    theta: &FunEnv<SourceFunType>,
    n: usize,
    gamma: &SourceEnv,
    e: &Expr,
    dialect: Dialect,
) -> Result<(usize, SrcDerivation), SrcTypeError> {
    Checker { theta, dialect }.check(n, gamma, e)
}

/// A budget large enough for `e` if any budget is: every unit of budget is
/// spent either by an `init` or by a call, which needs the callee's budget
/// plus room for any surplus results.
fn budget_bound(e: &Expr, theta: &FunEnv<SourceFunType>, own: Option<&FunName>) -> usize {
    let mut bound = e.count_inits();
    e.for_each_call(&mut |g, args, outs| {
        let surplus = outs.saturating_sub(args);
        let callee = if Some(g) == own {
            0
        } else {
            theta.get(g).map_or(0, |t| t.budget)
        };
        bound += surplus + callee;
    });
    bound
}

/// Smallest `N` in `0..=hi` for which `ok` holds, assuming `ok` is monotone.
/// `Err` carries the failure at `hi`.
fn least_budget<T>(
    hi: usize,
    mut ok: impl FnMut(usize) -> Result<T, SrcTypeError>,
) -> Result<(usize, T), SrcTypeError> {
    let mut best = (hi, ok(hi)?);
    let (mut lo, mut hi) = (0, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match ok(mid) {
            Ok(t) => {
                best = (mid, t);
                hi = mid;
            }
            Err(_) => lo = mid + 1,
        }
    }
    Ok(best)
}

fn in_function(name: &FunName) -> impl Fn(SrcTypeError) -> SrcTypeError + '_ {
    move |mut e| {
        e.function = Some(name.clone());
        e
    }
}

/// Checks one definition under `theta`, inferring the least budget that
/// makes its body well typed. Self-recursive calls see the candidate budget.
pub fn check_fundef(
    theta: &FunEnv<SourceFunType>,
    def: &FunDef,
    dialect: Dialect,
) -> Result<(SourceFunType, SrcDerivation), SrcTypeError> {
    let wrap = in_function(&def.name);
    let mut gamma = SourceEnv::new();
    for p in &def.params {
        bind(&mut gamma, p, def.span).map_err(&wrap)?;
    }
    let results = def.body.tail_arity();
    let hi = budget_bound(&def.body, theta, Some(&def.name));
    let attempt = |n: usize| {
        let ty = SourceFunType::new(def.params.len(), n, results);
        let mut extended = theta.clone();
        extended.insert(def.name.clone(), ty);
        let (t, d) = check_expr(&extended, n, &gamma, &def.body, dialect)?;
        if t != results {
            return Err(err(
                SrcErrorKind::ArityMismatch {
                    expected: results,
                    found: t,
                },
                def.body.span,
            ));
        }
        Ok((ty, d))
    };
    match least_budget(hi, attempt) {
        Ok((_, found)) => Ok(found),
        Err(e) if matches!(e.kind, SrcErrorKind::BudgetExceeded { .. }) => Err(err(
            SrcErrorKind::SignatureInferenceFailure(def.name.clone()),
            def.span,
        ))
        .map_err(&wrap),
        Err(e) => Err(wrap(e)),
    }
}

pub type FunDerivations = Vec<(FunName, SrcDerivation)>;

/// Builds `Θ` left to right. Each body may call earlier functions and
/// itself.
pub fn check_fundefs(
    defs: &[FunDef],
    dialect: Dialect,
) -> Result<(FunEnv<SourceFunType>, FunDerivations), SrcTypeError> {
    let mut theta = FunEnv::new();
    let mut derivations = Vec::new();
    for def in defs {
        if theta.contains(&def.name) {
            return Err(SrcTypeError {
                kind: SrcErrorKind::DuplicateFunction(def.name.clone()),
                span: def.span,
                function: Some(def.name.clone()),
            });
        }
        let (ty, d) = check_fundef(&theta, def, dialect)?;
        theta.insert(def.name.clone(), ty);
        derivations.push((def.name.clone(), d));
    }
    Ok((theta, derivations))
}

/// `N ⊢ ⟨D, e⟩`: the definitions, then the entry under `∅` and budget `n`.
pub fn check_program(
    p: &Program,
    n: usize,
    dialect: Dialect,
) -> Result<ProgramDerivation, SrcTypeError> {
    let (theta, defs) = check_fundefs(&p.defs, dialect)?;
    let (_, entry) = check_expr(&theta, n, &SourceEnv::new(), &p.entry, dialect)?;
    Ok(ProgramDerivation {
        theta,
        defs,
        entry,
        budget: n,
    })
}

/// The least `N` at which the program type-checks.
pub fn min_budget(p: &Program, dialect: Dialect) -> Result<usize, SrcTypeError> {
    let (theta, _) = check_fundefs(&p.defs, dialect)?;
    let hi = budget_bound(&p.entry, &theta, None);
    let gamma = SourceEnv::new();
    least_budget(hi, |n| check_expr(&theta, n, &gamma, &p.entry, dialect)).map(|(n, _)| n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::Expr;

    fn env(vs: &[&str]) -> SourceEnv {
        vs.iter().map(|v| Var::from(*v)).collect()
    }

    fn check(n: usize, gamma: &[&str], e: &Expr) -> Result<usize, SrcErrorKind> {
        check_expr(&FunEnv::new(), n, &env(gamma), e, Dialect::CORE)
            .map(|(t, _)| t)
            .map_err(|e| e.kind)
    }

    fn two_qubit() -> Expr {
        Expr::init(
            "x",
            Expr::init(
                "y",
                Expr::cnot(("a", "b"), ("x", "y"), Expr::discard("a", Expr::ret(["b"]))),
            ),
        )
    }

    #[test]
    fn single_init() {
        let e = Expr::init("x", Expr::ret(["x"]));
        assert_eq!(check(1, &[], &e), Ok(1));
        assert_eq!(
            check(0, &[], &e),
            Err(SrcErrorKind::BudgetExceeded {
                needed: 1,
                available: 0
            })
        );
    }

    #[test]
    fn budget_spine() {
        let (t, d) = check_expr(
            &FunEnv::new(),
            2,
            &SourceEnv::new(),
            &two_qubit(),
            Dialect::CORE,
        )
        .unwrap();
        assert_eq!(t, 1);
        assert_eq!(d.budget_spine(), vec![2, 1, 0, 0, 1]);
    }

    #[test]
    fn if_with_identical_branches() {
        let e = Expr::if_("x", Expr::ret(["x"]), Expr::ret(["x"]));
        assert_eq!(check(0, &["x"], &e), Ok(1));
    }

    #[test]
    fn linearity_errors() {
        assert_eq!(
            check(0, &["x", "y"], &Expr::ret(["x"])),
            Err(SrcErrorKind::UnusedVariable(vec![Var::from("y")]))
        );
        assert_eq!(
            check(0, &["x"], &Expr::ret(["x", "x"])),
            Err(SrcErrorKind::DuplicateVariable(Var::from("x")))
        );
        assert_eq!(
            check(1, &["x"], &Expr::init("x", Expr::ret(["x"]))),
            Err(SrcErrorKind::DuplicateVariable(Var::from("x")))
        );
        assert_eq!(
            check(0, &[], &Expr::discard("z", Expr::ret(Vec::<Var>::new()))),
            Err(SrcErrorKind::UnknownVariable(Var::from("z")))
        );
        assert_eq!(
            check(
                0,
                &["x"],
                &Expr::if_(
                    "x",
                    Expr::ret(["x"]),
                    Expr::discard("x", Expr::ret(Vec::<Var>::new()))
                )
            ),
            Err(SrcErrorKind::BranchMismatch {
                then_arity: 1,
                else_arity: 0
            })
        );
    }

    #[test]
    fn consumed_names_may_be_rebound() {
        let e = Expr::cnot(
            ("x", "y"),
            ("x", "y"),
            Expr::discard("x", Expr::init("x", Expr::ret(["x", "y"]))),
        );
        assert_eq!(check(0, &["x", "y"], &e), Ok(2));
    }

    #[test]
    fn hadamard_is_gated() {
        let e = Expr::h("y", "x", Expr::ret(["y"]));
        assert_eq!(
            check(0, &["x"], &e),
            Err(SrcErrorKind::DialectViolation("h"))
        );
        let ok = check_expr(&FunEnv::new(), 0, &env(&["x"]), &e, Dialect::WITH_H);
        assert_eq!(ok.map(|r| r.0), Ok(1));
    }

    #[test]
    fn tuple_let_splits_context() {
        let e = Expr::tuple_let(
            ["a", "b"],
            Expr::init("z", Expr::ret(["x", "z"])),
            Expr::cnot(("c", "d"), ("a", "b"), Expr::ret(["c", "d", "y"])),
        );
        assert_eq!(check(1, &["x", "y"], &e), Ok(3));
        assert!(check(0, &["x", "y"], &e).is_err());
    }

    #[test]
    fn fundef_inference() {
        assert!(check_fundefs(&[], Dialect::CORE).unwrap().0.is_empty());
        let id = FunDef::new("id", ["x"], Expr::ret(["x"]));
        let mk = FunDef::new("mk", Vec::<Var>::new(), Expr::init("x", Expr::ret(["x"])));
        let (theta, _) = check_fundefs(&[id, mk], Dialect::CORE).unwrap();
        assert_eq!(
            theta.get(&FunName::from("id")),
            Some(&SourceFunType::new(1, 0, 1))
        );
        assert_eq!(
            theta.get(&FunName::from("mk")),
            Some(&SourceFunType::new(0, 1, 1))
        );
    }

    #[test]
    fn callee_budget_is_required() {
        let mk = FunDef::new("mk", Vec::<Var>::new(), Expr::init("x", Expr::ret(["x"])));
        let p = Program::new(
            vec![mk],
            Expr::call(
                ["a"],
                "mk",
                Vec::<Var>::new(),
                Expr::discard("a", Expr::ret(Vec::<Var>::new())),
            ),
        );
        assert!(check_program(&p, 1, Dialect::CORE).is_ok());
        assert!(matches!(
            check_program(&p, 0, Dialect::CORE).unwrap_err().kind,
            SrcErrorKind::BudgetExceeded { .. }
        ));
        assert_eq!(min_budget(&p, Dialect::CORE), Ok(1));
    }

    #[test]
    fn program_level() {
        let trivial = Program::new(vec![], Expr::ret(Vec::<Var>::new()));
        assert!(check_program(&trivial, 0, Dialect::CORE).is_ok());
        let p = Program::new(vec![], two_qubit());
        assert!(check_program(&p, 2, Dialect::CORE).is_ok());
        assert!(check_program(&p, 1, Dialect::CORE).is_err());
        assert_eq!(min_budget(&p, Dialect::CORE), Ok(2));
    }

    #[test]
    fn simple_recursion() {
        let f = FunDef::new(
            "loop",
            ["x"],
            Expr::call(["y"], "loop", ["x"], Expr::ret(["y"])),
        );
        let (theta, _) = check_fundefs(&[f], Dialect::CORE).unwrap();
        assert_eq!(
            theta.get(&FunName::from("loop")),
            Some(&SourceFunType::new(1, 0, 1))
        );
    }

    #[test]
    fn recursion_that_allocates() {
        let f = FunDef::new(
            "grow",
            ["x"],
            Expr::if_(
                "x",
                Expr::ret(["x"]),
                Expr::init(
                    "z",
                    Expr::discard("z", Expr::call(["y"], "grow", ["x"], Expr::ret(["y"]))),
                ),
            ),
        );
        let (theta, _) = check_fundefs(&[f], Dialect::CORE).unwrap();
        assert_eq!(theta.get(&FunName::from("grow")).unwrap().budget, 1);
    }

    #[test]
    fn forward_calls_are_rejected() {
        let f = FunDef::new("f", ["x"], Expr::call(["y"], "g", ["x"], Expr::ret(["y"])));
        let g = FunDef::new("g", ["x"], Expr::ret(["x"]));
        let e = check_fundefs(&[f, g], Dialect::CORE).unwrap_err();
        assert_eq!(e.kind, SrcErrorKind::UnknownFunction(FunName::from("g")));
        assert_eq!(e.function, Some(FunName::from("f")));
    }

    #[test]
    fn derivation_dump_mentions_rules() {
        let d = check_program(&Program::new(vec![], two_qubit()), 2, Dialect::CORE).unwrap();
        let text = format!("{d}");
        assert!(text.contains("T-Init"));
        assert!(text.contains("T-Return"));
    }
}
