//! Abstract syntax of the target language: every qubit is allocated up
//! front, `init` resets an existing qubit and `swap` moves states.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::names::{FunName, Qidx, Span, Var};
use crate::source::write_tuple;
use crate::types::TargetFunType;

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Return(Vec<Var>),
    /// `init x; e`
    Init {
        var: Var,
        body: Box<Expr>,
    },
    /// `let (x1, x2) = swap(y1, y2) in e`
    SwapLet {
        outs: (Var, Var),
        ins: (Var, Var),
        body: Box<Expr>,
    },
    CnotLet {
        outs: (Var, Var),
        ins: (Var, Var),
        body: Box<Expr>,
    },
    CallLet {
        outs: Vec<Var>,
        fname: FunName,
        args: Vec<Var>,
        body: Box<Expr>,
    },
    TupleLet {
        outs: Vec<Var>,
        rhs: Box<Expr>,
        body: Box<Expr>,
    },
    If {
        cond: Var,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
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

    pub fn init(var: impl Into<Var>, body: Expr) -> Self {
        Expr::new(ExprKind::Init {
            var: var.into(),
            body: Box::new(body),
        })
    }

    pub fn swap(
        outs: (impl Into<Var>, impl Into<Var>),
        ins: (impl Into<Var>, impl Into<Var>),
        body: Expr,
    ) -> Self {
        Expr::new(ExprKind::SwapLet {
            outs: (outs.0.into(), outs.1.into()),
            ins: (ins.0.into(), ins.1.into()),
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

    pub fn size(&self) -> usize {
        1 + self.children().map(Expr::size).sum::<usize>()
    }

    pub fn children(&self) -> impl Iterator<Item = &Expr> {
        let (a, b): (Option<&Expr>, Option<&Expr>) = match &self.kind {
            ExprKind::Return(_) => (None, None),
            ExprKind::Init { body, .. }
            | ExprKind::SwapLet { body, .. }
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

    pub fn count_swaps(&self) -> usize {
        let own = matches!(self.kind, ExprKind::SwapLet { .. }) as usize;
        own + self.children().map(Expr::count_swaps).sum::<usize>()
    }

    pub fn uses_hadamard(&self) -> bool {
        matches!(self.kind, ExprKind::HLet { .. }) || self.children().any(Expr::uses_hadamard)
    }

    pub fn head(&self) -> Head<'_> {
        Head(self)
    }
}

fn collect_free(e: &Expr, out: &mut BTreeSet<Var>) {
    let remove_all = |mut inner: BTreeSet<Var>, bound: &[&Var]| {
        for b in bound {
            inner.remove(*b);
        }
        inner
    };
    match &e.kind {
        ExprKind::Return(vs) => out.extend(vs.iter().cloned()),
        ExprKind::Init { var, body } => {
            out.insert(var.clone());
            collect_free(body, out);
        }
        ExprKind::SwapLet { outs, ins, body } | ExprKind::CnotLet { outs, ins, body } => {
            out.extend(remove_all(body.free_vars(), &[&outs.0, &outs.1]));
            out.insert(ins.0.clone());
            out.insert(ins.1.clone());
        }
        ExprKind::CallLet {
            outs, args, body, ..
        } => {
            let bound: Vec<&Var> = outs.iter().collect();
            out.extend(remove_all(body.free_vars(), &bound));
            out.extend(args.iter().cloned());
        }
        ExprKind::TupleLet { outs, rhs, body } => {
            let bound: Vec<&Var> = outs.iter().collect();
            out.extend(remove_all(body.free_vars(), &bound));
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
            out.extend(remove_all(body.free_vars(), &[o]));
            out.insert(input.clone());
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunDef {
    pub name: FunName,
    pub sig: TargetFunType,
    pub params: Vec<Var>,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for FunDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.sig == other.sig
            && self.params == other.params
            && self.body == other.body
    }
}

impl Eq for FunDef {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<FunDef>,
    /// The `qubits:` preamble of `main`: the initial placement Γ.
    pub preamble: Vec<(Var, Qidx)>,
    pub entry: Expr,
}

impl Program {
    pub fn def(&self, name: &FunName) -> Option<&FunDef> {
        self.defs.iter().find(|d| &d.name == name)
    }

    pub fn count_swaps(&self) -> usize {
        self.entry.count_swaps()
            + self
                .defs
                .iter()
                .map(|d| d.body.count_swaps())
                .sum::<usize>()
    }

    pub fn size(&self) -> usize {
        self.entry.size() + self.defs.iter().map(|d| d.body.size()).sum::<usize>()
    }
}

pub struct Head<'a>(&'a Expr);

impl fmt::Display for Head<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            ExprKind::Return(vs) => write_tuple(f, vs),
            ExprKind::Init { var, .. } => write!(f, "init {var}; ..."),
            ExprKind::SwapLet { outs, ins, .. } => write!(
                f,
                "let ({}, {}) = swap({}, {}) in ...",
                outs.0, outs.1, ins.0, ins.1
            ),
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
