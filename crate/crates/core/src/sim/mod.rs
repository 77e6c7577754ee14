//! Density-matrix interpreters for both languages.
//!
//! Runtime variables are wire labels. Source wires are called `$w0`, `$w1`,
//! …; target wires are `$` followed by the node name. `$` cannot start a
//! parsed identifier, so substituting a wire for a variable never captures.
//!
//! A measurement (`if`) splits a configuration into two unnormalised
//! branches. [`run_to_values`] explores every branch depth first and drops
//! branches whose weight is below [`PRUNE_WEIGHT`].

mod compare;
mod density;
pub mod source;
pub mod target;

pub use compare::{
    check_semantic_preservation, density_isomorphic, BranchComparison, PreservationReport,
    UnpairedBranch, EXHAUSTIVE_MAX_WIRES, FROBENIUS_TOL,
};
pub use density::{DensityState, MAX_WIRES};
pub use source::{check_runtime_src, step_src, SourceMachine, SrcConfig};
pub use target::{check_runtime_tgt, step_tgt, TargetMachine, TgtConfig};

use alloc::vec::Vec;
use core::fmt;

use crate::check::source::SrcTypeError;
use crate::check::target::TgtDiagnostic;
use crate::names::{Qidx, Span, Var};

/// Branches lighter than this are not explored further.
pub const PRUNE_WEIGHT: f64 = 1e-12;

/// Default step budget.
pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    /// `init` with no free qubit left.
    StuckNoFreeQubit {
        span: Span,
    },
    /// A two-qubit gate on nodes that are not adjacent.
    ConnectivityStuck {
        a: Qidx,
        b: Qidx,
        span: Span,
    },
    StuckIllFormed(&'static str),
    FuelExhausted {
        fuel: u64,
    },
    TooManyWires {
        wires: usize,
        max: usize,
    },
    TooLargeWithoutHint {
        wires: usize,
    },
    WireCountMismatch {
        left: usize,
        right: usize,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::StuckNoFreeQubit { span } => {
                write!(f, "StuckNoFreeQubit: init with no free qubit at {span}")
            }
            SimError::ConnectivityStuck { a, b, span } => {
                write!(
                    f,
                    "ConnectivityStuck: gate on {a}~{b}, which is not an edge, at {span}"
                )
            }
            SimError::StuckIllFormed(what) => write!(f, "StuckIllFormed: {what}"),
            SimError::FuelExhausted { fuel } => {
                write!(f, "FuelExhausted: no result within {fuel} steps")
            }
            SimError::TooManyWires { wires, max } => {
                write!(
                    f,
                    "TooManyWires: {wires} wires, at most {max} are simulated"
                )
            }
            SimError::TooLargeWithoutHint { wires } => write!(
                f,
                "TooLargeWithoutHint: {wires} wires is too many for an exhaustive search"
            ),
            SimError::WireCountMismatch { left, right } => {
                write!(f, "WireCountMismatch: {left} wires against {right}")
            }
        }
    }
}

impl core::error::Error for SimError {}

pub(crate) fn write_path(f: &mut fmt::Formatter<'_>, path: &[bool]) -> fmt::Result {
    if path.is_empty() {
        return f.write_str("ε");
    }
    for b in path {
        f.write_str(if *b { "1" } else { "0" })?;
    }
    Ok(())
}

/// Why a configuration fails the runtime typing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuntimeTypeError {
    UnknownWire(Var),
    /// A wire both free and in use.
    Overlap(Var),
    Source(SrcTypeError),
    Target(Vec<TgtDiagnostic>),
}

impl fmt::Display for RuntimeTypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeTypeError::UnknownWire(v) => write!(f, "`{v}` is not a wire of the state"),
            RuntimeTypeError::Overlap(v) => write!(f, "`{v}` is both free and in use"),
            RuntimeTypeError::Source(e) => write!(f, "{e}"),
            RuntimeTypeError::Target(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

/// An evaluation context `let (outs) = [] in body`, waiting for the tuple
/// its hole returns.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<E> {
    pub outs: Vec<Var>,
    pub body: E,
    pub span: Span,
}

/// Result of one step.
#[derive(Clone, Debug)]
pub enum Successors<C> {
    One(C),
    /// Outcome 0 (else-branch) and outcome 1 (then-branch).
    Measure {
        zero: C,
        one: C,
    },
}

/// A finished branch: the measurement outcomes on the way, the terminal
/// state and the returned wires.
#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub path: Vec<bool>,
    pub state: DensityState,
    pub values: Vec<Var>,
    pub steps: u64,
}

impl BranchTrace {
    pub fn weight(&self) -> f64 {
        self.state.trace()
    }
}

/// Common interface of the two configuration types.
pub trait Machine {
    type Config: Clone;
    fn state<'c>(&self, cfg: &'c Self::Config) -> &'c DensityState;
    /// The returned wires when `cfg` is a value.
    fn value(&self, cfg: &Self::Config) -> Option<Vec<Var>>;
    fn step(&self, cfg: Self::Config) -> Result<Successors<Self::Config>, SimError>;
}

/// Runs every measurement branch of `cfg` to a value. `fuel` bounds the
/// total number of steps over all branches.
pub fn run_to_values<M: Machine>(
    machine: &M,
    cfg: M::Config,
    fuel: u64,
) -> Result<Vec<BranchTrace>, SimError> {
    let mut used = 0u64;
    let mut out = Vec::new();
    let mut stack = alloc::vec![(Vec::new(), cfg)];
    while let Some((path, cfg)) = stack.pop() {
        if let Some(values) = machine.value(&cfg) {
            out.push(BranchTrace {
                path,
                state: machine.state(&cfg).clone(),
                values,
                steps: used,
            });
            continue;
        }
        if used >= fuel {
            return Err(SimError::FuelExhausted { fuel });
        }
        used += 1;
        match machine.step(cfg)? {
            Successors::One(next) => stack.push((path, next)),
            Successors::Measure { zero, one } => {
                // Pushed in reverse so that outcome 0 is explored first.
                for (outcome, next) in [(true, one), (false, zero)] {
                    if machine.state(&next).trace() >= PRUNE_WEIGHT {
                        let mut p = path.clone();
                        p.push(outcome);
                        stack.push((p, next));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

pub(crate) fn wire(i: usize) -> Var {
    Var::from(alloc::format!("$w{i}"))
}

pub(crate) fn node_wire(q: &Qidx) -> Var {
    Var::from(alloc::format!("${q}"))
}

pub(crate) fn wire_node(v: &Var) -> Option<Qidx> {
    v.as_str().strip_prefix('$').map(Qidx::from)
}
