//! Simultaneous variable renaming.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::names::{Span, Var};
use crate::types::VarSubst;
use crate::{source, target};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("renaming would capture `{binder}` at {span}")]
pub struct CaptureError {
    pub binder: Var,
    pub span: Span,
}

/// Expressions that support [`apply_var_subst`].
pub trait VarRenaming: Sized {
    fn rename_vars(&self, subst: &VarSubst) -> Result<Self, CaptureError>;
}

/// Replaces every free occurrence of each key of `subst` by its image, all
/// at once. A binder that rebinds a key stops the renaming of that key below
/// it; a binder equal to the image of a key still being renamed is a
/// capture, whether or not the key actually occurs underneath.
pub fn apply_var_subst<E: VarRenaming>(subst: &VarSubst, e: &E) -> Result<E, CaptureError> {
    e.rename_vars(subst)
}

fn image(s: &VarSubst, v: &Var) -> Var {
    s.get(v).cloned().unwrap_or_else(|| v.clone())
}

/// The substitution in force under `binders`.
fn under(s: &VarSubst, binders: &[&Var], span: Span) -> Result<VarSubst, CaptureError> {
    if s.is_empty() {
        return Ok(VarSubst::new());
    }
    let mut inner = s.clone();
    for b in binders {
        inner.remove(*b);
    }
    for b in binders {
        if inner.values().any(|img| img == *b) {
            return Err(CaptureError {
                binder: (*b).clone(),
                span,
            });
        }
    }
    Ok(inner)
}

fn map_vars(s: &VarSubst, vs: &[Var]) -> Vec<Var> {
    vs.iter().map(|v| image(s, v)).collect()
}

impl VarRenaming for source::Expr {
    fn rename_vars(&self, s: &VarSubst) -> Result<Self, CaptureError> {
        use source::ExprKind as K;
        let span = self.span;
        let kind = match &self.kind {
            K::Return(vs) => K::Return(map_vars(s, vs)),
            K::InitLet { bound, body } => {
                let inner = under(s, &[bound], span)?;
                K::InitLet {
                    bound: bound.clone(),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::Discard { var, body } => K::Discard {
                var: image(s, var),
                body: Box::new(body.rename_vars(s)?),
            },
            K::CnotLet { outs, ins, body } => {
                let inner = under(s, &[&outs.0, &outs.1], span)?;
                K::CnotLet {
                    outs: outs.clone(),
                    ins: (image(s, &ins.0), image(s, &ins.1)),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                let bound: Vec<&Var> = outs.iter().collect();
                let inner = under(s, &bound, span)?;
                K::CallLet {
                    outs: outs.clone(),
                    fname: fname.clone(),
                    args: map_vars(s, args),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::TupleLet { outs, rhs, body } => {
                let bound: Vec<&Var> = outs.iter().collect();
                let inner = under(s, &bound, span)?;
                K::TupleLet {
                    outs: outs.clone(),
                    rhs: Box::new(rhs.rename_vars(s)?),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::If {
                cond,
                then_branch,
                else_branch,
            } => K::If {
                cond: image(s, cond),
                then_branch: Box::new(then_branch.rename_vars(s)?),
                else_branch: Box::new(else_branch.rename_vars(s)?),
            },
            K::HLet { out, input, body } => {
                let inner = under(s, &[out], span)?;
                K::HLet {
                    out: out.clone(),
                    input: image(s, input),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
        };
        Ok(source::Expr::at(kind, span))
    }
}

impl VarRenaming for target::Expr {
    fn rename_vars(&self, s: &VarSubst) -> Result<Self, CaptureError> {
        use target::ExprKind as K;
        let span = self.span;
        let kind = match &self.kind {
            K::Return(vs) => K::Return(map_vars(s, vs)),
            K::Init { var, body } => K::Init {
                var: image(s, var),
                body: Box::new(body.rename_vars(s)?),
            },
            K::SwapLet { outs, ins, body } => {
                let inner = under(s, &[&outs.0, &outs.1], span)?;
                K::SwapLet {
                    outs: outs.clone(),
                    ins: (image(s, &ins.0), image(s, &ins.1)),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::CnotLet { outs, ins, body } => {
                let inner = under(s, &[&outs.0, &outs.1], span)?;
                K::CnotLet {
                    outs: outs.clone(),
                    ins: (image(s, &ins.0), image(s, &ins.1)),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                let bound: Vec<&Var> = outs.iter().collect();
                let inner = under(s, &bound, span)?;
                K::CallLet {
                    outs: outs.clone(),
                    fname: fname.clone(),
                    args: map_vars(s, args),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::TupleLet { outs, rhs, body } => {
                let bound: Vec<&Var> = outs.iter().collect();
                let inner = under(s, &bound, span)?;
                K::TupleLet {
                    outs: outs.clone(),
                    rhs: Box::new(rhs.rename_vars(s)?),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
            K::If {
                cond,
                then_branch,
                else_branch,
            } => K::If {
                cond: image(s, cond),
                then_branch: Box::new(then_branch.rename_vars(s)?),
                else_branch: Box::new(else_branch.rename_vars(s)?),
            },
            K::HLet { out, input, body } => {
                let inner = under(s, &[out], span)?;
                K::HLet {
                    out: out.clone(),
                    input: image(s, input),
                    body: Box::new(body.rename_vars(&inner)?),
                }
            }
        };
        Ok(target::Expr::at(kind, span))
    }
}
