//! Types, environments and constraint sets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::names::{FunName, Qidx, Var};

/// Language options shared by the checkers, the allocator and the
/// interpreters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dialect {
    /// Accept the single-qubit `h` gate. It does not interact with
    /// allocation but makes superpositions (and so measurements) reachable.
    pub hadamard: bool,
}

impl Dialect {
    pub const CORE: Dialect = Dialect { hadamard: false };
    pub const WITH_H: Dialect = Dialect { hadamard: true };
}

/// `qbit * .. * qbit --N--> qbit * .. * qbit`. Every simple type is `qbit`,
/// so tuple types are represented by their length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceFunType {
    pub params: usize,
    pub budget: usize,
    pub results: usize,
}

impl SourceFunType {
    pub fn new(params: usize, budget: usize, results: usize) -> Self {
        SourceFunType {
            params,
            budget,
            results,
        }
    }
}

/// Writes `qbit * qbit`, or `()` for the empty tuple.
pub struct QbitTuple(pub usize);

impl fmt::Display for QbitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("()");
        }
        for i in 0..self.0 {
            if i > 0 {
                f.write_str(" * ")?;
            }
            f.write_str("qbit")?;
        }
        Ok(())
    }
}

impl fmt::Display for SourceFunType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} --{}--> {}",
            QbitTuple(self.params),
            self.budget,
            QbitTuple(self.results)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("self-loop constraint {0} ~ {0}")]
pub struct SelfLoop(pub Qidx);

/// A set of undirected adjacency constraints `a ~ b`, stored as sorted pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintSet {
    edges: BTreeSet<(Qidx, Qidx)>,
}

fn canonical(a: Qidx, b: Qidx) -> (Qidx, Qidx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, SelfLoop>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<Qidx>,
        B: Into<Qidx>,
    {
        let mut set = ConstraintSet::new();
        for (a, b) in pairs {
            set.insert(a.into(), b.into())?;
        }
        Ok(set)
    }

    /// Returns whether the pair was new.
    pub fn insert(&mut self, a: Qidx, b: Qidx) -> Result<bool, SelfLoop> {
        if a == b {
            return Err(SelfLoop(a));
        }
        Ok(self.edges.insert(canonical(a, b)))
    }

    pub fn contains(&self, a: &Qidx, b: &Qidx) -> bool {
        if a <= b {
            self.edges.contains(&(a.clone(), b.clone()))
        } else {
            self.edges.contains(&(b.clone(), a.clone()))
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Qidx, Qidx)> {
        self.edges.iter()
    }

    pub fn is_subset(&self, other: &ConstraintSet) -> bool {
        self.edges.is_subset(&other.edges)
    }

    pub fn qidxs(&self) -> BTreeSet<Qidx> {
        self.edges
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect()
    }

    /// Image under `s`; qidxs outside the domain of `s` are kept.
    pub fn rename(&self, s: &QidxSubst) -> Result<ConstraintSet, SelfLoop> {
        let mut out = ConstraintSet::new();
        for (a, b) in &self.edges {
            let a = s.get(a).cloned().unwrap_or_else(|| a.clone());
            let b = s.get(b).cloned().unwrap_or_else(|| b.clone());
            out.insert(a, b)?;
        }
        Ok(out)
    }

    /// Pairs whose endpoints both lie in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Qidx>) -> ConstraintSet {
        ConstraintSet {
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}~{b}")?;
        }
        f.write_str("}")
    }
}

pub type QidxSubst = BTreeMap<Qidx, Qidx>;
pub type VarSubst = BTreeMap<Var, Var>;

/// Target type environment: every variable has type `q(α)`.
pub type TargetEnv = BTreeMap<Var, Qidx>;

/// `∀ ᾱ. Φ ⇒ q(α1) * .. * q(αn) → q(β1) * .. * q(βm)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetFunType {
    pub quantified: Vec<Qidx>,
    pub constraints: ConstraintSet,
    pub params: Vec<Qidx>,
    pub results: Vec<Qidx>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("qidx {0} is used but not quantified")]
    Unbound(Qidx),
    #[error("quantified qidx {0} does not occur in a parameter type")]
    NotInParams(Qidx),
    #[error("qidx {0} is quantified twice")]
    DuplicateQuantifier(Qidx),
    #[error("qidx {0} appears twice in the parameter types")]
    DuplicateParam(Qidx),
    #[error("qidx {0} appears twice in the result types")]
    DuplicateResult(Qidx),
}

impl TargetFunType {
    /// Checks the invariants that make call-site instantiation first-order
    /// matching: every qidx is quantified, every quantified qidx occurs in
    /// the parameters, and parameter (and result) qidxs are distinct.
    pub fn validate(&self) -> Result<(), SignatureError> {
        let mut quantified = BTreeSet::new();
        for a in &self.quantified {
            if !quantified.insert(a) {
                return Err(SignatureError::DuplicateQuantifier(a.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &self.params {
            if !quantified.contains(a) {
                return Err(SignatureError::Unbound(a.clone()));
            }
            if !seen.insert(a) {
                return Err(SignatureError::DuplicateParam(a.clone()));
            }
        }
        let mut seen_res = BTreeSet::new();
        for a in &self.results {
            if !quantified.contains(a) {
                return Err(SignatureError::Unbound(a.clone()));
            }
            if !seen_res.insert(a) {
                return Err(SignatureError::DuplicateResult(a.clone()));
            }
        }
        for a in self.constraints.qidxs() {
            if !quantified.contains(&a) {
                return Err(SignatureError::Unbound(a));
            }
        }
        for a in &self.quantified {
            if !seen.contains(a) {
                return Err(SignatureError::NotInParams(a.clone()));
            }
        }
        Ok(())
    }
}

fn write_qtuple(f: &mut fmt::Formatter<'_>, qs: &[Qidx]) -> fmt::Result {
    if qs.is_empty() {
        return f.write_str("()");
    }
    for (i, q) in qs.iter().enumerate() {
        if i > 0 {
            f.write_str(" * ")?;
        }
        write!(f, "q({q})")?;
    }
    Ok(())
}

impl fmt::Display for TargetFunType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("forall")?;
        for a in &self.quantified {
            write!(f, " {a}")?;
        }
        write!(f, ". {} => ", self.constraints)?;
        write_qtuple(f, &self.params)?;
        f.write_str(" -> ")?;
        write_qtuple(f, &self.results)
    }
}

/// Function environment Θ, kept in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunEnv<T> {
    entries: Vec<(FunName, T)>,
}

impl<T> Default for FunEnv<T> {
    fn default() -> Self {
        FunEnv {
            entries: Vec::new(),
        }
    }
}

impl<T> FunEnv<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, f: &FunName) -> Option<&T> {
        self.entries.iter().find(|(g, _)| g == f).map(|(_, t)| t)
    }

    pub fn contains(&self, f: &FunName) -> bool {
        self.get(f).is_some()
    }

    /// Adds or replaces a binding, keeping its original position on replace.
    pub fn insert(&mut self, f: FunName, t: T) {
        if let Some(slot) = self.entries.iter_mut().find(|(g, _)| *g == f) {
            slot.1 = t;
        } else {
            self.entries.push((f, t));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FunName, &T)> {
        self.entries.iter().map(|(f, t)| (f, t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T> FromIterator<(FunName, T)> for FunEnv<T> {
    fn from_iter<I: IntoIterator<Item = (FunName, T)>>(iter: I) -> Self {
        let mut env = FunEnv::new();
        for (f, t) in iter {
            env.insert(f, t);
        }
        env
    }
}

/// Ψ(Γ): for each pair in order, the variables sitting at the two qidxs
/// exchange positions. A pair with only one occupied side moves that
/// variable to the other side.
pub fn apply_swaps_to_env(psi: &[(Qidx, Qidx)], gamma: &TargetEnv) -> TargetEnv {
    let mut env = gamma.clone();
    for (a, b) in psi {
        let at_a = env.iter().find(|(_, q)| *q == a).map(|(v, _)| v.clone());
        let at_b = env.iter().find(|(_, q)| *q == b).map(|(v, _)| v.clone());
        if let Some(v) = at_a {
            env.insert(v, b.clone());
        }
        if let Some(v) = at_b {
            env.insert(v, a.clone());
        }
    }
    env
}
