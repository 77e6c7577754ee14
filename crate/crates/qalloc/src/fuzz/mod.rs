//! Random well-typed programs and coupling graphs, and the property suite
//! run on each of them.
//!
//! Case `i` of a run with seed `s` draws from a ChaCha8 stream keyed by
//! `(s, i)`, so cases are independent of each other, of the thread that
//! runs them and of how many cases are requested.

mod generate;

pub use generate::{generate_program, random_connected_graph, Generated};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qalloc_core::allocation::qubit_alloc;
use qalloc_core::check::source::{check_program, min_budget, SrcErrorKind};
use qalloc_core::check::target::check_program_tgt;
use qalloc_core::graph::CouplingGraph;
use qalloc_core::sim::{
    check_runtime_src, check_runtime_tgt, check_semantic_preservation, Machine, SimError,
    SourceMachine, SrcConfig, Successors, TargetMachine, TgtConfig, MAX_WIRES, PRUNE_WEIGHT,
};
use qalloc_core::source::Program;
use qalloc_core::types::Dialect;

use crate::syntax::{parse_source, parse_target, print_coupling_graph, print_source, print_target};

/// Version of the JSON layout of [`FuzzReport`].
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzConfig {
    /// Qubits any one function (or `main`) may hold at once.
    pub max_qubits: usize,
    pub max_depth: usize,
    pub max_functions: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Probability of each edge outside the random spanning tree.
    pub extra_edge_probability: f64,
    pub hadamard: bool,
    /// Allow a function to call itself inside a then-branch.
    pub recursion: bool,
    pub fuel: u64,
    /// Semantic preservation is only checked on graphs with at most this
    /// many nodes. The soundness walks run up to [`MAX_WIRES`].
    pub sim_max_wires: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_qubits: 5,
            max_depth: 8,
            max_functions: 3,
            min_nodes: 5,
            max_nodes: 8,
            extra_edge_probability: 0.3,
            hadamard: false,
            recursion: true,
            fuel: qalloc_core::sim::DEFAULT_FUEL,
            sim_max_wires: 6,
        }
    }
}

impl FuzzConfig {
    pub fn dialect(&self) -> Dialect {
        Dialect {
            hadamard: self.hadamard,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(String),
    /// Semantic preservation fails when branches are paired by outcomes
    /// but holds under some other pairing.
    StrictPairingOnly(String),
    /// The run did not finish within the fuel.
    Inconclusive(String),
    Skipped(String),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn key(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::StrictPairingOnly(_) => "strict_pairing_only",
            Verdict::Inconclusive(_) => "inconclusive",
            Verdict::Skipped(_) => "skipped",
        }
    }
}

/// Outcome of every property on one case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checks {
    /// `parse(print(p)) = p` for the source and the allocated program.
    pub round_trip: Verdict,
    pub source_typing: Verdict,
    /// With one qubit less than the least budget, checking fails with
    /// `BudgetExceeded`.
    pub budget_mutation: Verdict,
    /// Running with exactly the least budget never gets stuck and every
    /// configuration is re-typeable with the same qubit count.
    pub source_soundness: Verdict,
    pub allocation: Verdict,
    pub type_preservation: Verdict,
    /// The allocated program never gates non-adjacent nodes and stays
    /// typeable while it runs.
    pub target_soundness: Verdict,
    pub semantic_preservation: Verdict,
}

impl Checks {
    pub fn all(&self) -> [(&'static str, &Verdict); 8] {
        [
            ("round_trip", &self.round_trip),
            ("source_typing", &self.source_typing),
            ("budget_mutation", &self.budget_mutation),
            ("source_soundness", &self.source_soundness),
            ("allocation", &self.allocation),
            ("type_preservation", &self.type_preservation),
            ("target_soundness", &self.target_soundness),
            ("semantic_preservation", &self.semantic_preservation),
        ]
    }

    pub fn failed(&self) -> bool {
        self.all().iter().any(|(_, v)| v.is_fail())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub index: u64,
    pub nodes: usize,
    pub edges: usize,
    pub functions: usize,
    pub size: usize,
    pub budget: Option<usize>,
    pub swaps: Option<usize>,
    pub checks: Checks,
    /// Source text and graph of failing cases, for reproduction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub strict_pairing_only: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub schema_version: u32,
    pub seed: u64,
    pub count: u64,
    pub config: FuzzConfig,
    pub failed_cases: usize,
    pub summary: BTreeMap<&'static str, Tally>,
    pub cases: Vec<CaseReport>,
}

impl FuzzReport {
    pub fn ok(&self) -> bool {
        self.failed_cases == 0
    }
}

/// The generator of case `index` under `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The graph and program of one case.
pub fn generate_case(seed: u64, index: u64, cfg: &FuzzConfig) -> (CouplingGraph, Generated) {
    let mut rng = case_rng(seed, index);
    let nodes = rng.gen_range(cfg.min_nodes..=cfg.max_nodes.max(cfg.min_nodes));
    let g = random_connected_graph(&mut rng, nodes, cfg.extra_edge_probability);
    let gen = generate_program(&mut rng, cfg, nodes);
    (g, gen)
}

#[derive(Debug)]
pub enum WalkError {
    Sim(SimError),
    Visit(String),
}

/// Visits every configuration reachable from `cfg`, over every measurement
/// branch heavier than [`PRUNE_WEIGHT`], within `fuel` steps in total.
pub fn walk<M: Machine>(
    m: &M,
    cfg: M::Config,
    fuel: u64,
    mut visit: impl FnMut(&M::Config) -> Result<(), String>,
) -> Result<(), WalkError> {
    let mut used = 0;
    let mut stack = vec![cfg];
    while let Some(cfg) = stack.pop() {
        visit(&cfg).map_err(WalkError::Visit)?;
        if m.value(&cfg).is_some() {
            continue;
        }
        if used >= fuel {
            return Err(WalkError::Sim(SimError::FuelExhausted { fuel }));
        }
        used += 1;
        match m.step(cfg).map_err(WalkError::Sim)? {
            Successors::One(c) => stack.push(c),
            Successors::Measure { zero, one } => {
                for c in [one, zero] {
                    if m.state(&c).trace() >= PRUNE_WEIGHT {
                        stack.push(c);
                    }
                }
            }
        }
    }
    Ok(())
}

fn walk_verdict(r: Result<(), WalkError>, stuck: impl Fn(&SimError) -> bool) -> Verdict {
    match r {
        Ok(()) => Verdict::Pass,
        Err(WalkError::Sim(e @ SimError::FuelExhausted { .. })) => {
            Verdict::Inconclusive(e.to_string())
        }
        Err(WalkError::Sim(e)) if stuck(&e) => Verdict::Fail(e.to_string()),
        Err(WalkError::Sim(e)) => Verdict::Fail(format!("unexpected: {e}")),
        Err(WalkError::Visit(msg)) => Verdict::Fail(msg),
    }
}

fn skipped(why: &str) -> Verdict {
    Verdict::Skipped(why.to_string())
}

/// Runs the whole property suite on one program and graph.
pub fn check_case(
    p: &Program,
    g: &CouplingGraph,
    cfg: &FuzzConfig,
) -> (Checks, Option<usize>, Option<usize>) {
    let dialect = cfg.dialect();
    let compare = g.node_count() <= cfg.sim_max_wires;
    let mut checks = Checks {
        round_trip: match parse_source(&print_source(p)) {
            Ok(q) if &q == p => Verdict::Pass,
            Ok(_) => Verdict::Fail("source reparses to a different program".into()),
            Err(e) => Verdict::Fail(format!("source does not reparse: {e}")),
        },
        source_typing: Verdict::Pass,
        budget_mutation: skipped("source rejected"),
        source_soundness: skipped("source rejected"),
        allocation: skipped("source rejected"),
        type_preservation: skipped("no allocation"),
        target_soundness: skipped("no allocation"),
        semantic_preservation: skipped("no allocation"),
    };
    let budget = match min_budget(p, dialect) {
        Ok(n) => n,
        Err(e) => {
            checks.source_typing = Verdict::Fail(e.to_string());
            return (checks, None, None);
        }
    };
    let derivation = match check_program(p, budget, dialect) {
        Ok(d) => d,
        Err(e) => {
            checks.source_typing = Verdict::Fail(format!("least budget {budget} rejected: {e}"));
            return (checks, Some(budget), None);
        }
    };
    checks.budget_mutation = if budget == 0 {
        skipped("least budget is 0")
    } else {
        match check_program(p, budget - 1, dialect) {
            Err(e) if matches!(e.kind, SrcErrorKind::BudgetExceeded { .. }) => Verdict::Pass,
            Err(e) => Verdict::Fail(format!("expected BudgetExceeded, got {e}")),
            Ok(_) => Verdict::Fail(format!("accepted with budget {}", budget - 1)),
        }
    };
    checks.source_soundness = if budget <= MAX_WIRES {
        let src_cfg = SrcConfig::initial(p, budget).expect("wire count checked");
        let r = walk(
            &SourceMachine { program: p },
            src_cfg,
            cfg.fuel,
            |c| match check_runtime_src(&derivation.theta, c, dialect) {
                Ok(m) if m == budget => Ok(()),
                Ok(m) => Err(format!("qubit count changed from {budget} to {m}")),
                Err(e) => Err(format!("runtime typing: {e}")),
            },
        );
        walk_verdict(r, |e| matches!(e, SimError::StuckNoFreeQubit { .. }))
    } else {
        skipped("too many wires to simulate")
    };

    let alloc = match qubit_alloc(p, &derivation, g, dialect) {
        Ok(a) => a,
        Err(e) => {
            checks.allocation = Verdict::Fail(e.to_string());
            return (checks, Some(budget), None);
        }
    };
    checks.allocation = Verdict::Pass;
    let tgt = &alloc.program;
    let swaps = tgt.count_swaps();
    match parse_target(&print_target(tgt)) {
        Ok(q) if &q == tgt => {}
        Ok(_) => checks.round_trip = Verdict::Fail("target reparses to a different program".into()),
        Err(e) => checks.round_trip = Verdict::Fail(format!("target does not reparse: {e}")),
    }
    let tderiv = match check_program_tgt(tgt, g, dialect) {
        Ok(d) => {
            checks.type_preservation = Verdict::Pass;
            d
        }
        Err(ds) => {
            let msgs: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
            checks.type_preservation = Verdict::Fail(msgs.join("; "));
            return (checks, Some(budget), Some(swaps));
        }
    };
    if g.node_count() > MAX_WIRES {
        checks.target_soundness = skipped("too many wires to simulate");
        checks.semantic_preservation = skipped("too many wires to simulate");
        return (checks, Some(budget), Some(swaps));
    }
    let tcfg = match TgtConfig::initial(tgt, g) {
        Ok(c) => c,
        Err(e) => {
            checks.target_soundness = Verdict::Fail(e.to_string());
            return (checks, Some(budget), Some(swaps));
        }
    };
    let r = walk(
        &TargetMachine {
            program: tgt,
            graph: g,
        },
        tcfg,
        cfg.fuel,
        |c| {
            check_runtime_tgt(&tderiv.theta, g, c, dialect)
                .map_err(|e| format!("runtime typing: {e}"))
        },
    );
    checks.target_soundness = walk_verdict(r, |e| matches!(e, SimError::ConnectivityStuck { .. }));
    if !compare {
        checks.semantic_preservation = skipped("too many wires to compare");
        return (checks, Some(budget), Some(swaps));
    }
    checks.semantic_preservation = match check_semantic_preservation(p, tgt, g, cfg.fuel) {
        Ok(rep) if rep.all_ok() => Verdict::Pass,
        Ok(rep) => {
            let mut parts: Vec<String> = rep.unpaired.iter().map(|u| u.to_string()).collect();
            parts.extend(
                rep.branches
                    .iter()
                    .filter(|b| !b.ok())
                    .map(|b| b.to_string()),
            );
            if rep.existential {
                Verdict::StrictPairingOnly(parts.join("; "))
            } else {
                Verdict::Fail(parts.join("; "))
            }
        }
        Err(e @ SimError::FuelExhausted { .. }) => Verdict::Inconclusive(e.to_string()),
        Err(e) => Verdict::Fail(e.to_string()),
    };
    (checks, Some(budget), Some(swaps))
}

/// Generates and checks case `index` of `seed`.
pub fn run_case(seed: u64, index: u64, cfg: &FuzzConfig) -> CaseReport {
    let (g, gen) = generate_case(seed, index, cfg);
    let (checks, budget, swaps) = check_case(&gen.program, &g, cfg);
    let failed = checks.failed();
    CaseReport {
        index,
        nodes: g.node_count(),
        edges: g.edge_count(),
        functions: gen.program.defs.len(),
        size: gen.program.size(),
        budget,
        swaps,
        checks,
        source: failed.then(|| print_source(&gen.program)),
        graph: failed.then(|| print_coupling_graph(&g)),
    }
}

/// Runs cases `0..count` on a worker pool; the report lists them in index
/// order and contains nothing that depends on scheduling or timing.
pub fn run_fuzz(seed: u64, count: u64, cfg: &FuzzConfig) -> FuzzReport {
    let pool = rayon::ThreadPoolBuilder::new()
        .stack_size(crate::PIPELINE_STACK)
        .build()
        .expect("building the fuzz worker pool");
    let cases: Vec<CaseReport> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| run_case(seed, i, cfg))
            .collect()
    });
    let mut summary: BTreeMap<&'static str, Tally> = BTreeMap::new();
    for c in &cases {
        for (name, v) in c.checks.all() {
            let t = summary.entry(name).or_default();
            match v.key() {
                "pass" => t.pass += 1,
                "fail" => t.fail += 1,
                "strict_pairing_only" => t.strict_pairing_only += 1,
                "inconclusive" => t.inconclusive += 1,
                _ => t.skipped += 1,
            }
        }
    }
    FuzzReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        count,
        config: cfg.clone(),
        failed_cases: cases.iter().filter(|c| c.checks.failed()).count(),
        summary,
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_report() {
        let cfg = FuzzConfig {
            min_nodes: 3,
            max_nodes: 4,
            max_qubits: 3,
            ..FuzzConfig::default()
        };
        let a = serde_json::to_string(&run_fuzz(9, 12, &cfg)).unwrap();
        let b = serde_json::to_string(&run_fuzz(9, 12, &cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cases_do_not_depend_on_count() {
        let cfg = FuzzConfig::default();
        let short = run_fuzz(5, 3, &cfg);
        let long = run_fuzz(5, 6, &cfg);
        assert_eq!(short.cases[..], long.cases[..3]);
    }
}
