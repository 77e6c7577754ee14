//! The qualified type system of the target language.
//!
//! Judgments have the form `Θ | Φ | Γ ⊢ e : T` where every variable has a
//! type `q(α)` naming the physical (or, inside a function, quantified)
//! position of the qubit and `Φ` lists the adjacent position pairs. Two-qubit
//! gates are only accepted on adjacent positions.
//!
//! Connectivity problems do not stop the checker: they are collected and the
//! check continues as if the premise held, so one run reports every
//! offending gate. Structural errors (linearity, unknown names, bad
//! instantiation) end the check of the enclosing function.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{write_set, Indent};
use crate::graph::CouplingGraph;
use crate::names::{FunName, Qidx, Span, Var};
use crate::target::{Expr, ExprKind, Program};
use crate::types::{
    ConstraintSet, Dialect, FunEnv, QidxSubst, SignatureError, TargetEnv, TargetFunType,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TgtErrorKind {
    /// A `cnot` or `swap` on positions that are not adjacent in `Φ`.
    ConnectivityViolation {
        gate: &'static str,
        a: Qidx,
        b: Qidx,
        /// Shortest path between the two positions, when one exists.
        hint: Option<Vec<Qidx>>,
    },
    ConstraintUnsatisfied {
        fun: FunName,
        missing: Vec<(Qidx, Qidx)>,
    },
    InstantiationConflict {
        quantified: Qidx,
        first: Qidx,
        second: Qidx,
    },
    NonInjectiveInstantiation {
        image: Qidx,
    },
    UnusedVariable(Vec<Var>),
    UnknownVariable(Var),
    DuplicateVariable(Var),
    ArityMismatch {
        expected: usize,
        found: usize,
    },
    BranchMismatch {
        then_type: Vec<Qidx>,
        else_type: Vec<Qidx>,
    },
    ReturnTypeMismatch {
        expected: Vec<Qidx>,
        found: Vec<Qidx>,
    },
    UnknownFunction(FunName),
    DuplicateFunction(FunName),
    MalformedSignature(SignatureError),
    /// Two distinct variables at one position.
    IllFormedEnv {
        var: Var,
        other: Var,
        qidx: Qidx,
    },
    /// A position outside the ambient node set.
    UnknownQidx(Qidx),
    DialectViolation(&'static str),
}

fn write_qidxs(f: &mut fmt::Formatter<'_>, qs: &[Qidx]) -> fmt::Result {
    f.write_str("(")?;
    for (i, q) in qs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "q({q})")?;
    }
    f.write_str(")")
}

impl fmt::Display for TgtErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TgtErrorKind as K;
        match self {
            K::ConnectivityViolation { gate, a, b, hint } => {
                write!(
                    f,
                    "ConnectivityViolation: {gate} on {a}~{b}, which is not an edge"
                )?;
                if let Some(path) = hint {
                    f.write_str(" (nearest route: ")?;
                    for (i, q) in path.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" - ")?;
                        }
                        write!(f, "{q}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            K::ConstraintUnsatisfied { fun, missing } => {
                write!(f, "ConstraintUnsatisfied: call to `{fun}` needs ")?;
                for (i, (a, b)) in missing.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}~{b}")?;
                }
                Ok(())
            }
            K::InstantiationConflict {
                quantified,
                first,
                second,
            } => write!(
                f,
                "InstantiationConflict: `{quantified}` matched to both {first} and {second}"
            ),
            K::NonInjectiveInstantiation { image } => write!(
                f,
                "NonInjectiveInstantiation: two quantified qidxs both map to {image}"
            ),
            K::UnusedVariable(vs) => {
                f.write_str("UnusedVariable: linear variables not returned: ")?;
                write_set(f, vs)
            }
            K::UnknownVariable(v) => write!(f, "UnknownVariable: `{v}` is not in scope"),
            K::DuplicateVariable(v) => {
                write!(f, "DuplicateVariable: `{v}` is already bound or used twice")
            }
            K::ArityMismatch { expected, found } => {
                write!(f, "ArityMismatch: expected {expected}, found {found}")
            }
            K::BranchMismatch {
                then_type,
                else_type,
            } => {
                f.write_str("BranchMismatch: then-branch returns ")?;
                write_qidxs(f, then_type)?;
                f.write_str(", else-branch ")?;
                write_qidxs(f, else_type)
            }
            K::ReturnTypeMismatch { expected, found } => {
                f.write_str("ReturnTypeMismatch: signature says ")?;
                write_qidxs(f, expected)?;
                f.write_str(", body returns ")?;
                write_qidxs(f, found)
            }
            K::UnknownFunction(g) => {
                write!(f, "UnknownFunction: `{g}` is not defined before this point")
            }
            K::DuplicateFunction(g) => write!(f, "DuplicateFunction: `{g}` is defined twice"),
            K::MalformedSignature(e) => write!(f, "MalformedSignature: {e}"),
            K::IllFormedEnv { var, other, qidx } => {
                write!(f, "IllFormedEnv: `{var}` and `{other}` are both at {qidx}")
            }
            K::UnknownQidx(q) => write!(f, "UnknownQidx: {q} is not a known position"),
            K::DialectViolation(what) => write!(f, "DialectViolation: `{what}` is not enabled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TgtDiagnostic {
    pub kind: TgtErrorKind,
    pub span: Span,
    pub function: Option<FunName>,
}

impl TgtDiagnostic {
    pub fn is_connectivity(&self) -> bool {
        matches!(
            self.kind,
            TgtErrorKind::ConnectivityViolation { .. } | TgtErrorKind::ConstraintUnsatisfied { .. }
        )
    }
}

impl fmt::Display for TgtDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.function {
            Some(g) => write!(f, "in `{g}`: {}", self.kind),
            None => write!(f, "in main: {}", self.kind),
        }
    }
}

impl core::error::Error for TgtDiagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgtRule {
    Return,
    Init,
    Swap,
    Cnot,
    Call,
    Let,
    If,
    H,
}

impl TgtRule {
    pub fn name(self) -> &'static str {
        match self {
            TgtRule::Return => "T-Return",
            TgtRule::Init => "T-Init",
            TgtRule::Swap => "T-Swap",
            TgtRule::Cnot => "T-Cnot",
            TgtRule::Call => "T-Call",
            TgtRule::Let => "T-Let",
            TgtRule::If => "T-If",
            TgtRule::H => "T-H",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TgtDerivation {
    pub rule: TgtRule,
    pub env: Vec<(Var, Qidx)>,
    pub subject: String,
    pub result: Vec<Qidx>,
    pub span: Span,
    pub premises: Vec<TgtDerivation>,
}

impl TgtDerivation {
    fn write_at(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        write!(f, "{}{:<10} {{", Indent(depth), self.rule.name())?;
        for (i, (v, q)) in self.env.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: q({q})")?;
        }
        write!(f, "}} |- {} : ", self.subject)?;
        write_qidxs(f, &self.result)?;
        writeln!(f)?;
        for p in &self.premises {
            p.write_at(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for TgtDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TgtProgramDerivation {
    pub theta: FunEnv<TargetFunType>,
    pub defs: Vec<(FunName, TgtDerivation)>,
    pub entry: TgtDerivation,
}

impl fmt::Display for TgtProgramDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, d) in &self.defs {
            let ty = self.theta.get(name).expect("every checked def has a type");
            writeln!(f, "fun {name} : {ty}")?;
            d.write_at(f, 1)?;
        }
        writeln!(f, "main")?;
        self.entry.write_at(f, 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstantiationError {
    Arity {
        expected: usize,
        found: usize,
    },
    Conflict {
        quantified: Qidx,
        first: Qidx,
        second: Qidx,
    },
    NonInjective {
        image: Qidx,
    },
}

/// First-order matching of the parameter qidxs of `ftype` against the
/// argument qidxs. Returns `σ_α` and the instantiated result qidxs. Whether
/// `σ_α Φ' ⊆ Φ` holds is left to the caller.
pub fn instantiate_call(
    ftype: &TargetFunType,
    args: &[Qidx],
) -> Result<(QidxSubst, Vec<Qidx>), InstantiationError> {
    if ftype.params.len() != args.len() {
        return Err(InstantiationError::Arity {
            expected: ftype.params.len(),
            found: args.len(),
        });
    }
    let mut sigma = QidxSubst::new();
    for (alpha, arg) in ftype.params.iter().zip(args) {
        match sigma.get(alpha) {
            Some(prev) if prev != arg => {
                return Err(InstantiationError::Conflict {
                    quantified: alpha.clone(),
                    first: prev.clone(),
                    second: arg.clone(),
                })
            }
            _ => {
                sigma.insert(alpha.clone(), arg.clone());
            }
        }
    }
    let mut images = BTreeSet::new();
    for image in sigma.values() {
        if !images.insert(image) {
            return Err(InstantiationError::NonInjective {
                image: image.clone(),
            });
        }
    }
    let results = ftype
        .results
        .iter()
        .map(|r| sigma.get(r).cloned().unwrap_or_else(|| r.clone()))
        .collect();
    Ok((sigma, results))
}

/// Pairs of `σ Φ'` missing from `phi`.
pub fn unsatisfied_constraints(
    ftype: &TargetFunType,
    sigma: &QidxSubst,
    phi: &ConstraintSet,
) -> Vec<(Qidx, Qidx)> {
    let image = |q: &Qidx| sigma.get(q).cloned().unwrap_or_else(|| q.clone());
    ftype
        .constraints
        .iter()
        .map(|(a, b)| (image(a), image(b)))
        .filter(|(a, b)| !phi.contains(a, b))
        .collect()
}

/// Marker for an error that ends the current function.
struct Fatal;

struct Checker<'a> {
    theta: &'a FunEnv<TargetFunType>,
    phi: &'a ConstraintSet,
    nodes: &'a BTreeSet<Qidx>,
    /// For routing hints; built from `nodes` and `phi`.
    layout: CouplingGraph,
    dialect: Dialect,
    function: Option<FunName>,
    diags: Vec<TgtDiagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, kind: TgtErrorKind, span: Span) {
        self.diags.push(TgtDiagnostic {
            kind,
            span,
            function: self.function.clone(),
        });
    }

    fn fail<T>(&mut self, kind: TgtErrorKind, span: Span) -> Result<T, Fatal> {
        self.report(kind, span);
        Err(Fatal)
    }

    fn lookup(&mut self, gamma: &TargetEnv, v: &Var, span: Span) -> Result<Qidx, Fatal> {
        match gamma.get(v) {
            Some(q) => Ok(q.clone()),
            None => self.fail(TgtErrorKind::UnknownVariable(v.clone()), span),
        }
    }

    fn distinct(&mut self, vars: &[&Var], span: Span) -> Result<(), Fatal> {
        let mut seen = BTreeSet::new();
        for v in vars {
            if !seen.insert(*v) {
                return self.fail(TgtErrorKind::DuplicateVariable((*v).clone()), span);
            }
        }
        Ok(())
    }

    /// Extends `gamma`, keeping it well formed.
    fn bind(&mut self, gamma: &mut TargetEnv, v: &Var, q: Qidx, span: Span) -> Result<(), Fatal> {
        if gamma.contains_key(v) {
            return self.fail(TgtErrorKind::DuplicateVariable(v.clone()), span);
        }
        if !self.nodes.contains(&q) {
            return self.fail(TgtErrorKind::UnknownQidx(q), span);
        }
        if let Some((other, _)) = gamma.iter().find(|(_, p)| **p == q) {
            let other = other.clone();
            return self.fail(
                TgtErrorKind::IllFormedEnv {
                    var: v.clone(),
                    other,
                    qidx: q,
                },
                span,
            );
        }
        gamma.insert(v.clone(), q);
        Ok(())
    }

    fn check(&mut self, gamma: &TargetEnv, e: &Expr) -> Result<(Vec<Qidx>, TgtDerivation), Fatal> {
        let span = e.span;
        let node = |rule, result: &Vec<Qidx>, premises| TgtDerivation {
            rule,
            env: gamma.iter().map(|(v, q)| (v.clone(), q.clone())).collect(),
            subject: format!("{}", e.head()),
            result: result.clone(),
            span,
            premises,
        };
        match &e.kind {
            ExprKind::Return(vs) => {
                let refs: Vec<&Var> = vs.iter().collect();
                self.distinct(&refs, span)?;
                let mut ty = Vec::with_capacity(vs.len());
                for v in vs {
                    ty.push(self.lookup(gamma, v, span)?);
                }
                let returned: BTreeSet<&Var> = vs.iter().collect();
                let unused: Vec<Var> = gamma
                    .keys()
                    .filter(|v| !returned.contains(v))
                    .cloned()
                    .collect();
                if !unused.is_empty() {
                    return self.fail(TgtErrorKind::UnusedVariable(unused), span);
                }
                let d = node(TgtRule::Return, &ty, vec![]);
                Ok((ty, d))
            }
            ExprKind::Init { var, body } => {
                self.lookup(gamma, var, span)?;
                let (t, d) = self.check(gamma, body)?;
                let d = node(TgtRule::Init, &t, vec![d]);
                Ok((t, d))
            }
            ExprKind::SwapLet { outs, ins, body } | ExprKind::CnotLet { outs, ins, body } => {
                let (gate, rule) = match &e.kind {
                    ExprKind::SwapLet { .. } => ("swap", TgtRule::Swap),
                    _ => ("cnot", TgtRule::Cnot),
                };
                self.distinct(&[&ins.0, &ins.1], span)?;
                self.distinct(&[&outs.0, &outs.1], span)?;
                let a1 = self.lookup(gamma, &ins.0, span)?;
                let a2 = self.lookup(gamma, &ins.1, span)?;
                if !self.phi.contains(&a1, &a2) {
                    let hint = self.layout.shortest_path(&a1, &a2);
                    self.report(
                        TgtErrorKind::ConnectivityViolation {
                            gate,
                            a: a1.clone(),
                            b: a2.clone(),
                            hint,
                        },
                        span,
                    );
                }
                let mut inner = gamma.clone();
                inner.remove(&ins.0);
                inner.remove(&ins.1);
                self.bind(&mut inner, &outs.0, a1, span)?;
                self.bind(&mut inner, &outs.1, a2, span)?;
                let (t, d) = self.check(&inner, body)?;
                let d = node(rule, &t, vec![d]);
                Ok((t, d))
            }
            ExprKind::HLet { out, input, body } => {
                if !self.dialect.hadamard {
                    return self.fail(TgtErrorKind::DialectViolation("h"), span);
                }
                let a = self.lookup(gamma, input, span)?;
                let mut inner = gamma.clone();
                inner.remove(input);
                self.bind(&mut inner, out, a, span)?;
                let (t, d) = self.check(&inner, body)?;
                let d = node(TgtRule::H, &t, vec![d]);
                Ok((t, d))
            }
            ExprKind::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                let Some(ftype) = self.theta.get(fname) else {
                    return self.fail(TgtErrorKind::UnknownFunction(fname.clone()), span);
                };
                let refs: Vec<&Var> = args.iter().collect();
                self.distinct(&refs, span)?;
                let refs: Vec<&Var> = outs.iter().collect();
                self.distinct(&refs, span)?;
                let mut arg_types = Vec::with_capacity(args.len());
                for a in args {
                    arg_types.push(self.lookup(gamma, a, span)?);
                }
                let (sigma, results) = match instantiate_call(ftype, &arg_types) {
                    Ok(r) => r,
                    Err(InstantiationError::Arity { expected, found }) => {
                        return self.fail(TgtErrorKind::ArityMismatch { expected, found }, span)
                    }
                    Err(InstantiationError::Conflict {
                        quantified,
                        first,
                        second,
                    }) => {
                        return self.fail(
                            TgtErrorKind::InstantiationConflict {
                                quantified,
                                first,
                                second,
                            },
                            span,
                        )
                    }
                    Err(InstantiationError::NonInjective { image }) => {
                        return self.fail(TgtErrorKind::NonInjectiveInstantiation { image }, span)
                    }
                };
                let missing = unsatisfied_constraints(ftype, &sigma, self.phi);
                if !missing.is_empty() {
                    self.report(
                        TgtErrorKind::ConstraintUnsatisfied {
                            fun: fname.clone(),
                            missing,
                        },
                        span,
                    );
                }
                if outs.len() != results.len() {
                    return self.fail(
                        TgtErrorKind::ArityMismatch {
                            expected: results.len(),
                            found: outs.len(),
                        },
                        span,
                    );
                }
                let mut inner = gamma.clone();
                for a in args {
                    inner.remove(a);
                }
                for (o, q) in outs.iter().zip(results) {
                    self.bind(&mut inner, o, q, span)?;
                }
                let (t, d) = self.check(&inner, body)?;
                let d = node(TgtRule::Call, &t, vec![d]);
                Ok((t, d))
            }
            ExprKind::TupleLet { outs, rhs, body } => {
                let refs: Vec<&Var> = outs.iter().collect();
                self.distinct(&refs, span)?;
                let fv = rhs.free_vars();
                let gamma1: TargetEnv = gamma
                    .iter()
                    .filter(|(v, _)| fv.contains(*v))
                    .map(|(v, q)| (v.clone(), q.clone()))
                    .collect();
                let mut gamma2: TargetEnv = gamma
                    .iter()
                    .filter(|(v, _)| !fv.contains(*v))
                    .map(|(v, q)| (v.clone(), q.clone()))
                    .collect();
                let (t1, d1) = self.check(&gamma1, rhs)?;
                if t1.len() != outs.len() {
                    return self.fail(
                        TgtErrorKind::ArityMismatch {
                            expected: outs.len(),
                            found: t1.len(),
                        },
                        span,
                    );
                }
                for (o, q) in outs.iter().zip(t1) {
                    self.bind(&mut gamma2, o, q, span)?;
                }
                let (t, d2) = self.check(&gamma2, body)?;
                let d = node(TgtRule::Let, &t, vec![d1, d2]);
                Ok((t, d))
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.lookup(gamma, cond, span)?;
                let (t1, d1) = self.check(gamma, then_branch)?;
                let (t2, d2) = self.check(gamma, else_branch)?;
                if t1 != t2 {
                    self.report(
                        TgtErrorKind::BranchMismatch {
                            then_type: t1.clone(),
                            else_type: t2,
                        },
                        span,
                    );
                }
                let d = node(TgtRule::If, &t1, vec![d1, d2]);
                Ok((t1, d))
            }
        }
    }
}

/// `Θ | Φ | Γ ⊢ e : T`. `nodes` is the set of positions `Γ` may mention.
/// On failure every diagnostic found is returned.
pub fn check_expr_tgt(
    theta: &FunEnv<TargetFunType>,
    phi: &ConstraintSet,
    nodes: &BTreeSet<Qidx>,
    gamma: &TargetEnv,
    e: &Expr,
    dialect: Dialect,
) -> Result<(Vec<Qidx>, TgtDerivation), Vec<TgtDiagnostic>> {
    let mut checker = Checker {
        theta,
        phi,
        nodes,
        layout: CouplingGraph::from_constraints(nodes, phi),
        dialect,
        function: None,
        diags: Vec::new(),
    };
    let result = checker.check(gamma, e);
    match result {
        Ok(r) if checker.diags.is_empty() => Ok(r),
        _ => Err(checker.diags),
    }
}

/// Checks every definition, then `main` against the device: `Φ = E(G)` and
/// `Γ` is the `qubits:` preamble, whose positions must be distinct nodes.
pub fn check_program_tgt(
    p: &Program,
    g: &CouplingGraph,
    dialect: Dialect,
) -> Result<TgtProgramDerivation, Vec<TgtDiagnostic>> {
    let mut diags = Vec::new();
    let mut theta: FunEnv<TargetFunType> = FunEnv::new();
    let mut defs = Vec::new();
    let mut seen = BTreeSet::new();
    for def in &p.defs {
        let at = |kind| TgtDiagnostic {
            kind,
            span: def.span,
            function: Some(def.name.clone()),
        };
        if !seen.insert(def.name.clone()) {
            diags.push(at(TgtErrorKind::DuplicateFunction(def.name.clone())));
            continue;
        }
        if let Err(e) = def.sig.validate() {
            diags.push(at(TgtErrorKind::MalformedSignature(e)));
            continue;
        }
        theta.insert(def.name.clone(), def.sig.clone());
        if def.params.len() != def.sig.params.len() {
            diags.push(at(TgtErrorKind::ArityMismatch {
                expected: def.sig.params.len(),
                found: def.params.len(),
            }));
            continue;
        }
        let mut gamma = TargetEnv::new();
        let mut dup = None;
        for (x, a) in def.params.iter().zip(&def.sig.params) {
            if gamma.insert(x.clone(), a.clone()).is_some() {
                dup = Some(x.clone());
            }
        }
        if let Some(x) = dup {
            diags.push(at(TgtErrorKind::DuplicateVariable(x)));
            continue;
        }
        let nodes: BTreeSet<Qidx> = def.sig.quantified.iter().cloned().collect();
        let mut checker = Checker {
            theta: &theta,
            phi: &def.sig.constraints,
            nodes: &nodes,
            layout: CouplingGraph::from_constraints(&nodes, &def.sig.constraints),
            dialect,
            function: Some(def.name.clone()),
            diags: Vec::new(),
        };
        if let Ok((t, d)) = checker.check(&gamma, &def.body) {
            if t != def.sig.results {
                checker.report(
                    TgtErrorKind::ReturnTypeMismatch {
                        expected: def.sig.results.clone(),
                        found: t,
                    },
                    def.body.span,
                );
            }
            defs.push((def.name.clone(), d));
        }
        diags.append(&mut checker.diags);
    }

    let nodes: BTreeSet<Qidx> = g.nodes().iter().cloned().collect();
    let mut checker = Checker {
        theta: &theta,
        phi: g.edges(),
        nodes: &nodes,
        layout: g.clone(),
        dialect,
        function: None,
        diags: Vec::new(),
    };
    let mut gamma = TargetEnv::new();
    let mut preamble_ok = true;
    for (x, q) in &p.preamble {
        if checker
            .bind(&mut gamma, x, q.clone(), p.entry.span)
            .is_err()
        {
            preamble_ok = false;
        }
    }
    let entry = if preamble_ok {
        checker.check(&gamma, &p.entry).ok().map(|(_, d)| d)
    } else {
        None
    };
    diags.append(&mut checker.diags);
    match entry {
        Some(entry) if diags.is_empty() => Ok(TgtProgramDerivation { theta, defs, entry }),
        _ => Err(diags),
    }
}

/// The preamble as a map, for callers that already know it is well formed.
pub fn preamble_env(p: &Program) -> TargetEnv {
    p.preamble.iter().cloned().collect::<BTreeMap<_, _>>()
}
