//! Equality of states up to a relabelling of wires, and the comparison of a
//! source run with the run of its allocated program.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use super::{
    run_to_values, write_path, BranchTrace, DensityState, SimError, SourceMachine, SrcConfig,
    TargetMachine, TgtConfig,
};
use crate::graph::CouplingGraph;
use crate::names::Var;
use crate::{source, target};

/// Frobenius-norm tolerance for state comparison; also the tolerance on
/// branch weights.
pub const FROBENIUS_TOL: f64 = 1e-9;

/// Above this many wires only a supplied relabelling is tried.
pub const EXHAUSTIVE_MAX_WIRES: usize = 6;

/// `index_map[i]` is the basis index of `b` for basis index `i` of `a`
/// when wire `w` of `a` becomes wire `perm[w]` of `b`.
fn index_map(n: usize, perm: &[usize]) -> Vec<usize> {
    (0..1usize << n)
        .map(|i| {
            (0..n)
                .filter(|w| i & (1 << (n - 1 - w)) != 0)
                .fold(0, |acc, w| acc | 1 << (n - 1 - perm[w]))
        })
        .collect()
}

fn equal_under(a: &DensityState, b: &DensityState, perm: &[usize]) -> bool {
    let m = index_map(a.wires(), perm);
    let tol = FROBENIUS_TOL * FROBENIUS_TOL;
    let d = a.dim();
    let diag: f64 = (0..d)
        .map(|i| (a.get(i, i) - b.get(m[i], m[i])).norm_sqr())
        .sum();
    if diag > tol {
        return false;
    }
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            total += (a.get(i, j) - b.get(m[i], m[j])).norm_sqr();
        }
        if total > tol {
            return false;
        }
    }
    true
}

/// Whether `a` and `b` are equal up to a relabelling of wires, within
/// [`FROBENIUS_TOL`]. `hint` (labels of `a` to labels of `b`) is tried
/// first; without a matching hint every relabelling is tried, which is
/// limited to [`EXHAUSTIVE_MAX_WIRES`] wires.
pub fn density_isomorphic(
    a: &DensityState,
    b: &DensityState,
    hint: Option<&BTreeMap<Var, Var>>,
) -> Result<bool, SimError> {
    let n = a.wires();
    if n != b.wires() {
        return Err(SimError::WireCountMismatch {
            left: n,
            right: b.wires(),
        });
    }
    if let Some(h) = hint {
        let perm: Option<Vec<usize>> = a
            .labels()
            .iter()
            .map(|l| {
                h.get(l)
                    .and_then(|t| b.labels().iter().position(|x| x == t))
            })
            .collect();
        if let Some(perm) = perm {
            let distinct: BTreeSet<&usize> = perm.iter().collect();
            if distinct.len() == n && equal_under(a, b, &perm) {
                return Ok(true);
            }
        }
        if n > EXHAUSTIVE_MAX_WIRES {
            return Ok(false);
        }
    } else if n > EXHAUSTIVE_MAX_WIRES {
        return Err(SimError::TooLargeWithoutHint { wires: n });
    }
    // Heap's algorithm over all wire permutations.
    let mut perm: Vec<usize> = (0..n).collect();
    if equal_under(a, b, &perm) {
        return Ok(true);
    }
    let mut c = alloc::vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if equal_under(a, b, &perm) {
                return Ok(true);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchComparison {
    pub path: Vec<bool>,
    pub source_weight: f64,
    pub target_weight: f64,
    pub isomorphic: bool,
}

impl BranchComparison {
    pub fn weights_match(&self) -> bool {
        (self.source_weight - self.target_weight).abs() <= FROBENIUS_TOL
    }

    pub fn ok(&self) -> bool {
        self.isomorphic && self.weights_match()
    }
}

impl fmt::Display for BranchComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("branch ")?;
        write_path(f, &self.path)?;
        write!(
            f,
            ": weight {:.6} / {:.6}, {}",
            self.source_weight,
            self.target_weight,
            if self.ok() { "equivalent" } else { "DIFFERENT" }
        )
    }
}

/// A branch of non-negligible weight with no counterpart on the other side.
#[derive(Clone, Debug, PartialEq)]
pub struct UnpairedBranch {
    pub path: Vec<bool>,
    /// True when the branch belongs to the source run.
    pub in_source: bool,
    pub weight: f64,
}

impl fmt::Display for UnpairedBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("branch ")?;
        write_path(f, &self.path)?;
        write!(
            f,
            " (weight {:.6}) exists in the {} run only",
            self.weight,
            if self.in_source { "source" } else { "target" }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport {
    /// Branches paired by measurement outcomes.
    pub branches: Vec<BranchComparison>,
    pub unpaired: Vec<UnpairedBranch>,
    /// Whether every branch of either run has a branch of equal weight and
    /// isomorphic state in the other run, wherever its outcomes lead.
    pub existential: bool,
}

impl PreservationReport {
    /// Every branch paired by outcome, with equal weight and isomorphic
    /// states.
    pub fn all_ok(&self) -> bool {
        self.unpaired.is_empty() && self.branches.iter().all(BranchComparison::ok)
    }

    /// The pairing by outcomes fails but an arbitrary pairing succeeds.
    pub fn strict_only_failure(&self) -> bool {
        !self.all_ok() && self.existential
    }
}

/// Pairs the returned wires of both runs position by position and the
/// remaining wires in label order.
fn relabelling(src: &BranchTrace, tgt: &BranchTrace) -> BTreeMap<Var, Var> {
    let mut map: BTreeMap<Var, Var> = src
        .values
        .iter()
        .cloned()
        .zip(tgt.values.iter().cloned())
        .collect();
    let used_t: BTreeSet<&Var> = map.values().collect();
    let rest_t: Vec<Var> = tgt
        .state
        .labels()
        .iter()
        .filter(|l| !used_t.contains(l))
        .cloned()
        .collect();
    let rest_s: Vec<Var> = src
        .state
        .labels()
        .iter()
        .filter(|l| !map.contains_key(*l))
        .cloned()
        .collect();
    map.extend(rest_s.into_iter().zip(rest_t));
    map
}

fn covered(
    from: &[BranchTrace],
    to: &[BranchTrace],
    from_is_source: bool,
) -> Result<bool, SimError> {
    for a in from.iter().filter(|a| a.weight() >= FROBENIUS_TOL) {
        let mut found = false;
        for b in to {
            if (a.weight() - b.weight()).abs() > FROBENIUS_TOL {
                continue;
            }
            let (s, t) = if from_is_source { (a, b) } else { (b, a) };
            if density_isomorphic(&s.state, &t.state, Some(&relabelling(s, t)))? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs `src` with one free wire per node of `g` and `tgt` on `g`, pairs the
/// branches by their measurement outcomes, and compares terminal states up
/// to relabelling. Branches present on one side only are ignored when they
/// weigh less than [`FROBENIUS_TOL`].
pub fn check_semantic_preservation(
    src: &source::Program,
    tgt: &target::Program,
    g: &CouplingGraph,
    fuel: u64,
) -> Result<PreservationReport, SimError> {
    let s_cfg = SrcConfig::initial(src, g.node_count())?;
    let s_runs = run_to_values(&SourceMachine { program: src }, s_cfg, fuel)?;
    let t_cfg = TgtConfig::initial(tgt, g)?;
    let t_runs = run_to_values(
        &TargetMachine {
            program: tgt,
            graph: g,
        },
        t_cfg,
        fuel,
    )?;

    let by_path: BTreeMap<&[bool], &BranchTrace> =
        t_runs.iter().map(|t| (t.path.as_slice(), t)).collect();
    let mut branches = Vec::new();
    let mut unpaired = Vec::new();
    let mut matched = BTreeSet::new();
    for s in &s_runs {
        match by_path.get(s.path.as_slice()) {
            Some(t) => {
                matched.insert(s.path.as_slice());
                let hint = relabelling(s, t);
                branches.push(BranchComparison {
                    path: s.path.clone(),
                    source_weight: s.weight(),
                    target_weight: t.weight(),
                    isomorphic: density_isomorphic(&s.state, &t.state, Some(&hint))?,
                });
            }
            None if s.weight() < FROBENIUS_TOL => {}
            None => unpaired.push(UnpairedBranch {
                path: s.path.clone(),
                in_source: true,
                weight: s.weight(),
            }),
        }
    }
    for t in &t_runs {
        if !matched.contains(t.path.as_slice()) && t.weight() >= FROBENIUS_TOL {
            unpaired.push(UnpairedBranch {
                path: t.path.clone(),
                in_source: false,
                weight: t.weight(),
            });
        }
    }
    let mut report = PreservationReport {
        branches,
        unpaired,
        existential: true,
    };
    if !report.all_ok() {
        report.existential = covered(&s_runs, &t_runs, true)? && covered(&t_runs, &s_runs, false)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(s: &str) -> Var {
        Var::from(s)
    }

    #[test]
    fn relabelled_basis_states() {
        let a = DensityState::basis(vec![v("x1"), v("x2")], &[false, true]).unwrap();
        let b = DensityState::basis(vec![v("x2"), v("x1")], &[true, false]).unwrap();
        assert!(density_isomorphic(&a, &b, None).unwrap());
        let c = DensityState::basis(vec![v("x1"), v("x2")], &[true, true]).unwrap();
        assert!(!density_isomorphic(&a, &c, None).unwrap());
    }

    #[test]
    fn hint_is_used_first() {
        let a = DensityState::basis(vec![v("a"), v("b"), v("c")], &[true, false, false]).unwrap();
        let b = DensityState::basis(vec![v("p"), v("q"), v("r")], &[false, false, true]).unwrap();
        let hint: BTreeMap<Var, Var> =
            [(v("a"), v("r")), (v("b"), v("p")), (v("c"), v("q"))].into();
        assert!(density_isomorphic(&a, &b, Some(&hint)).unwrap());
        // A wrong hint falls back to the search.
        let wrong: BTreeMap<Var, Var> =
            [(v("a"), v("p")), (v("b"), v("q")), (v("c"), v("r"))].into();
        assert!(density_isomorphic(&a, &b, Some(&wrong)).unwrap());
    }

    #[test]
    fn size_limits() {
        let labels: Vec<Var> = (0..7).map(|i| Var::from(alloc::format!("w{i}"))).collect();
        let a = DensityState::zero(labels.clone()).unwrap();
        assert_eq!(
            density_isomorphic(&a, &a, None),
            Err(SimError::TooLargeWithoutHint { wires: 7 })
        );
        let id: BTreeMap<Var, Var> = labels.iter().map(|l| (l.clone(), l.clone())).collect();
        assert_eq!(density_isomorphic(&a, &a, Some(&id)), Ok(true));
        let small = DensityState::zero(labels[..2].to_vec()).unwrap();
        assert!(matches!(
            density_isomorphic(&a, &small, None),
            Err(SimError::WireCountMismatch { .. })
        ));
    }
}
