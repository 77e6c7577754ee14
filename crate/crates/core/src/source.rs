//! Abstract syntax of the source language.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::names::{FunName, Span, Var};

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Spans are bookkeeping: two expressions are equal when their trees are.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    /// `(x1, .., xn)`
    Return(Vec<Var>),
    /// `let x = init() in e`
    InitLet { bound: Var, body: Box<Expr> },
    /// `discard x; e`
    Discard { var: Var, body: Box<Expr> },
    /// `let (x1, x2) = cnot(y1, y2) in e`
    CnotLet {
        outs: (Var, Var),
        ins: (Var, Var),
        body: Box<Expr>,
    },
    /// `let (x1, .., xn) = f(y1, .., ym) in e`
    CallLet {
        outs: Vec<Var>,
        fname: FunName,
        args: Vec<Var>,
        body: Box<Expr>,
    },
    /// `let (x1, .., xn) = e1 in e2`
    TupleLet {
        outs: Vec<Var>,
        rhs: Box<Expr>,
        body: Box<Expr>,
    },
    /// `if x then { e1 } else { e2 }`; `x` stays live in both branches.
    If {
        cond: Var,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    /// `let y = h(x) in e`. Only accepted when [`crate::types::Dialect::hadamard`]
    /// is set.
    HLet {
        out: Var,
        input: Var,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn ret<I, V>(vars: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<Var>,
    {
        Expr::new(ExprKind::Return(vars.into_iter().map(Into::into).collect()))
    }

    pub fn init(bound: impl Into<Var>, body: Expr) -> Self {
        Expr::new(ExprKind::InitLet {
            bound: bound.into(),
            body: Box::new(body),
        })
    }

    pub fn discard(var: impl Into<Var>, body: Expr) -> Self {
        Expr::new(ExprKind::Discard {
            var: var.into(),
            body: Box::new(body),
        })
    }

    pub fn cnot(
        outs: (impl Into<Var>, impl Into<Var>),
        ins: (impl Into<Var>, impl Into<Var>),
        body: Expr,
    ) -> Self {
        Expr::new(ExprKind::CnotLet {
            outs: (outs.0.into(), outs.1.into()),
            ins: (ins.0.into(), ins.1.into()),
            body: Box::new(body),
        })
    }

    pub fn call<O, A>(outs: O, fname: impl Into<FunName>, args: A, body: Expr) -> Self
    where
        O: IntoIterator,
        O::Item: Into<Var>,
        A: IntoIterator,
        A::Item: Into<Var>,
    {
        Expr::new(ExprKind::CallLet {
            outs: outs.into_iter().map(Into::into).collect(),
            fname: fname.into(),
            args: args.into_iter().map(Into::into).collect(),
            body: Box::new(body),
        })
    }

    pub fn tuple_let<O>(outs: O, rhs: Expr, body: Expr) -> Self
    where
        O: IntoIterator,
        O::Item: Into<Var>,
    {
        Expr::new(ExprKind::TupleLet {
            outs: outs.into_iter().map(Into::into).collect(),
            rhs: Box::new(rhs),
            body: Box::new(body),
        })
    }

    pub fn if_(cond: impl Into<Var>, then_branch: Expr, else_branch: Expr) -> Self {
        Expr::new(ExprKind::If {
            cond: cond.into(),
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
        })
    }

    pub fn h(out: impl Into<Var>, input: impl Into<Var>, body: Expr) -> Self {
        Expr::new(ExprKind::HLet {
            out: out.into(),
            input: input.into(),
            body: Box::new(body),
        })
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = span;
        self
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut out);
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Expr::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(Expr::depth).max().unwrap_or(0)
    }

    pub fn children(&self) -> impl Iterator<Item = &Expr> {
        let (a, b): (Option<&Expr>, Option<&Expr>) = match &self.kind {
            ExprKind::Return(_) => (None, None),
            ExprKind::InitLet { body, .. }
            | ExprKind::Discard { body, .. }
            | ExprKind::CnotLet { body, .. }
            | ExprKind::CallLet { body, .. }
            | ExprKind::HLet { body, .. } => (Some(body), None),
            ExprKind::TupleLet { rhs, body, .. } => (Some(rhs), Some(body)),
            ExprKind::If {
                then_branch,
                else_branch,
                ..
            } => (Some(then_branch), Some(else_branch)),
        };
        a.into_iter().chain(b)
    }

    /// Length of the tuple this expression evaluates to, read off the first
    /// `Return` reached through bodies and then-branches.
    pub fn tail_arity(&self) -> usize {
        let mut e = self;
        loop {
            e = match &e.kind {
                ExprKind::Return(vs) => return vs.len(),
                ExprKind::InitLet { body, .. }
                | ExprKind::Discard { body, .. }
                | ExprKind::CnotLet { body, .. }
                | ExprKind::CallLet { body, .. }
                | ExprKind::TupleLet { body, .. }
                | ExprKind::HLet { body, .. } => body,
                ExprKind::If { then_branch, .. } => then_branch,
            }
        }
    }

    pub fn uses_hadamard(&self) -> bool {
        matches!(self.kind, ExprKind::HLet { .. }) || self.children().any(Expr::uses_hadamard)
    }

    /// Calls `f` for every call site in the tree, outermost first.
    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a FunName, usize, usize)) {
        if let ExprKind::CallLet {
            outs, fname, args, ..
        } = &self.kind
        {
            f(fname, args.len(), outs.len());
        }
        for c in self.children() {
            c.for_each_call(f);
        }
    }

    pub fn count_inits(&self) -> usize {
        let own = matches!(self.kind, ExprKind::InitLet { .. }) as usize;
        own + self.children().map(Expr::count_inits).sum::<usize>()
    }

    pub fn head(&self) -> Head<'_> {
        Head(self)
    }
}

fn collect_free(e: &Expr, out: &mut BTreeSet<Var>) {
    match &e.kind {
        ExprKind::Return(vs) => out.extend(vs.iter().cloned()),
        ExprKind::InitLet { bound, body } => {
            let mut inner = body.free_vars();
            inner.remove(bound);
            out.extend(inner);
        }
        ExprKind::Discard { var, body } => {
            out.insert(var.clone());
            collect_free(body, out);
        }
        ExprKind::CnotLet { outs, ins, body } => {
            let mut inner = body.free_vars();
            inner.remove(&outs.0);
            inner.remove(&outs.1);
            out.extend(inner);
            out.insert(ins.0.clone());
            out.insert(ins.1.clone());
        }
        ExprKind::CallLet {
            outs, args, body, ..
        } => {
            let mut inner = body.free_vars();
            for o in outs {
                inner.remove(o);
            }
            out.extend(inner);
            out.extend(args.iter().cloned());
        }
        ExprKind::TupleLet { outs, rhs, body } => {
            let mut inner = body.free_vars();
            for o in outs {
                inner.remove(o);
            }
            out.extend(inner);
            collect_free(rhs, out);
        }
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            out.insert(cond.clone());
            collect_free(then_branch, out);
            collect_free(else_branch, out);
        }
        ExprKind::HLet {
            out: o,
            input,
            body,
        } => {
            let mut inner = body.free_vars();
            inner.remove(o);
            out.extend(inner);
            out.insert(input.clone());
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunDef {
    pub name: FunName,
    pub params: Vec<Var>,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for FunDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.body == other.body
    }
}

impl Eq for FunDef {}

impl FunDef {
    pub fn new<P>(name: impl Into<FunName>, params: P, body: Expr) -> Self
    where
        P: IntoIterator,
        P::Item: Into<Var>,
    {
        FunDef {
            name: name.into(),
            params: params.into_iter().map(Into::into).collect(),
            body,
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<FunDef>,
    pub entry: Expr,
}

impl Program {
    pub fn new(defs: Vec<FunDef>, entry: Expr) -> Self {
        Program { defs, entry }
    }

    pub fn def(&self, name: &FunName) -> Option<&FunDef> {
        self.defs.iter().find(|d| &d.name == name)
    }

    pub fn size(&self) -> usize {
        self.entry.size() + self.defs.iter().map(|d| d.body.size()).sum::<usize>()
    }
}

/// One-line rendering of an expression's outermost construct, used in
/// derivation dumps and diagnostics.
pub struct Head<'a>(&'a Expr);

impl fmt::Display for Head<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            ExprKind::Return(vs) => write_tuple(f, vs),
            ExprKind::InitLet { bound, .. } => write!(f, "let {bound} = init() in ..."),
            ExprKind::Discard { var, .. } => write!(f, "discard {var}; ..."),
            ExprKind::CnotLet { outs, ins, .. } => write!(
                f,
                "let ({}, {}) = cnot({}, {}) in ...",
                outs.0, outs.1, ins.0, ins.1
            ),
            ExprKind::CallLet {
                outs, fname, args, ..
            } => {
                f.write_str("let ")?;
                write_tuple(f, outs)?;
                write!(f, " = {fname}")?;
                write_tuple(f, args)?;
                f.write_str(" in ...")
            }
            ExprKind::TupleLet { outs, .. } => {
                f.write_str("let ")?;
                write_tuple(f, outs)?;
                f.write_str(" = ... in ...")
            }
            ExprKind::If { cond, .. } => write!(f, "if {cond} then {{ ... }} else {{ ... }}"),
            ExprKind::HLet { out, input, .. } => write!(f, "let {out} = h({input}) in ..."),
        }
    }
}

pub(crate) fn write_tuple<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}
