//! Type-directed qubit allocation for a small first-order quantum language.
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! * the two ASTs ([`source`] and [`target`]) and their shared vocabulary
//!   ([`names`], [`types`], [`subst`]);
//! * a linear type checker for source programs ([`check::source`]) and a
//!   qualified, connectivity-aware checker for target programs
//!   ([`check::target`]);
//! * coupling-graph algorithms ([`graph`]): articulation points, the nested
//!   workspace chain, embeddings, token swapping and shortest paths;
//! * the allocator ([`allocation`]) turning a checked source program into a
//!   target program that respects a coupling graph;
//! * density-matrix interpreters for both languages ([`sim`]).
//!
//! Parsing, printing, fuzzing and the command line live in the `qalloc`
//! crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod allocation;
pub mod check;
pub mod graph;
pub mod names;
pub mod sim;
pub mod source;
pub mod subst;
pub mod target;
pub mod types;

pub use names::{FreshNames, FunName, Qidx, Span, Var};
