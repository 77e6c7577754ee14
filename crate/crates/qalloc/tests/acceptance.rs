//! One line per acceptance criterion. Runs as a plain binary so that the
//! lines come out in order and unfiltered; exits non-zero if any criterion
//! fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qalloc::fuzz::{
    generate_case, random_connected_graph, run_fuzz, FuzzConfig, FuzzReport, Verdict,
};
use qalloc::syntax::{
    parse_coupling_graph, parse_source, parse_target, print_source, print_target,
};
use qalloc_core::allocation::{qubit_alloc, Allocation, SwapSite};
use qalloc_core::check::source::{check_program, min_budget, SrcErrorKind};
use qalloc_core::check::target::{check_program_tgt, TgtErrorKind};
use qalloc_core::graph::{
    articulation_points, construct_subgraphs, token_swapping_approx, token_swapping_exact,
    CouplingGraph, TokenMap,
};
use qalloc_core::names::{Qidx, Var};
use qalloc_core::sim::{
    run_to_values, DensityState, SimError, SourceMachine, SrcConfig, Successors, TargetMachine,
    TgtConfig, DEFAULT_FUEL, FROBENIUS_TOL,
};
use qalloc_core::source;
use qalloc_core::types::Dialect;

const SEED: u64 = 42;
/// Tolerance of the simulator algebra checks.
const ALGEBRA_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn count(
    report: &FuzzReport,
    pick: impl Fn(&qalloc::fuzz::Checks) -> &Verdict,
) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for c in &report.cases {
        let key = match pick(&c.checks) {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::StrictPairingOnly(_) => "strict_only",
            Verdict::Inconclusive(_) => "inconclusive",
            Verdict::Skipped(_) => "skipped",
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

fn first_bad(
    report: &FuzzReport,
    pick: impl Fn(&qalloc::fuzz::Checks) -> &Verdict,
    ok: impl Fn(&Verdict) -> bool,
) -> String {
    report
        .cases
        .iter()
        .find(|c| !ok(pick(&c.checks)))
        .map(|c| format!("; first offender case {}: {:?}", c.index, pick(&c.checks)))
        .unwrap_or_default()
}

fn criterion2_config() -> FuzzConfig {
    // Recursion under measurement spawns a branch per unfolding; with
    // Hadamards both outcomes keep weight, so the branch tree above the
    // pruning weight outgrows any fixed fuel.
    FuzzConfig {
        max_qubits: 4,
        min_nodes: 2,
        max_nodes: 4,
        hadamard: true,
        recursion: false,
        fuel: DEFAULT_FUEL,
        sim_max_wires: 4,
        ..FuzzConfig::default()
    }
}

fn type_preservation(default_run: &FuzzReport) -> Outcome {
    let alloc = count(default_run, |c| &c.allocation);
    let typed = count(default_run, |c| &c.type_preservation);
    let n = default_run.cases.len();
    let ok = alloc.get("pass") == Some(&n) && typed.get("pass") == Some(&n);
    let bounded = default_run
        .cases
        .iter()
        .all(|c| (5..=8).contains(&c.nodes) && c.functions <= 3);
    outcome(
        ok && bounded && n == 500,
        format!(
            "{}/{n} allocations accepted by the target checker (allocation {alloc:?}){}",
            typed.get("pass").unwrap_or(&0),
            first_bad(default_run, |c| &c.type_preservation, Verdict::is_pass)
        ),
    )
}

fn semantic_preservation(small_run: &FuzzReport) -> Outcome {
    let sem = count(small_run, |c| &c.semantic_preservation);
    let n = small_run.cases.len();
    let wires = small_run.cases.iter().all(|c| c.nodes <= 4);
    outcome(
        n == 200 && wires && sem.get("pass") == Some(&n),
        format!(
            "{}/{n} cases paired branch-by-branch within {FROBENIUS_TOL:e} (weights and states) {sem:?}{}",
            sem.get("pass").unwrap_or(&0),
            first_bad(small_run, |c| &c.semantic_preservation, Verdict::is_pass)
        ),
    )
}

fn source_soundness(runs: &[&FuzzReport]) -> Outcome {
    let mut n = 0;
    let mut ran = 0;
    let mut mutated = 0;
    let mut bad = String::new();
    for r in runs {
        for c in &r.cases {
            n += 1;
            match &c.checks.source_soundness {
                Verdict::Pass => ran += 1,
                v if bad.is_empty() => {
                    bad = format!("; case {} of seed {}: {v:?}", c.index, r.seed)
                }
                _ => {}
            }
            match (&c.checks.budget_mutation, c.budget) {
                (Verdict::Pass, _) => mutated += 1,
                (Verdict::Skipped(_), Some(0)) => {}
                (v, _) if bad.is_empty() => {
                    bad = format!("; case {} of seed {}: {v:?}", c.index, r.seed)
                }
                _ => {}
            }
        }
    }
    outcome(
        bad.is_empty() && ran == n,
        format!("{ran}/{n} runs at the least budget never stuck, {mutated} budget-1 mutations all BudgetExceeded{bad}"),
    )
}

fn target_soundness(runs: &[&FuzzReport]) -> Outcome {
    let mut ran = 0;
    let mut skipped = 0;
    let mut bad = String::new();
    for r in runs {
        for c in &r.cases {
            match &c.checks.target_soundness {
                Verdict::Pass => ran += 1,
                Verdict::Skipped(_) => skipped += 1,
                v if bad.is_empty() => {
                    bad = format!("; case {} of seed {}: {v:?}", c.index, r.seed)
                }
                _ => {}
            }
        }
    }
    let g = parse_coupling_graph(&data("qx2.graph")).expect("qx2.graph parses");
    let bad_prog = parse_target(&data("bad-cnot.qtgt")).expect("bad-cnot.qtgt parses");
    let rejected = match check_program_tgt(&bad_prog, &g, Dialect::default()) {
        Err(ds) => ds.iter().any(|d| {
            matches!(&d.kind, TgtErrorKind::ConnectivityViolation { a, b, .. }
                if (a.as_str(), b.as_str()) == ("q1", "q4"))
        }),
        Ok(_) => false,
    };
    let stuck = TgtConfig::initial(&bad_prog, &g).and_then(|c| {
        run_to_values(
            &TargetMachine {
                program: &bad_prog,
                graph: &g,
            },
            c,
            DEFAULT_FUEL,
        )
    });
    let stuck = matches!(stuck, Err(SimError::ConnectivityStuck { ref a, ref b, .. })
        if (a.as_str(), b.as_str()) == ("q1", "q4"));
    outcome(
        bad.is_empty() && ran > 0 && rejected && stuck,
        format!(
            "{ran} accepted targets explored without ConnectivityStuck ({skipped} too large to simulate); \
             q1~q4 rejected by checker: {rejected}, stuck when forced: {stuck}{bad}"
        ),
    )
}

/// Plays `psi` on tokens starting at their own nodes.
fn replay(g: &CouplingGraph, p: &TokenMap, psi: &[(Qidx, Qidx)]) -> bool {
    let mut at: BTreeMap<Qidx, Qidx> = g.nodes().iter().map(|v| (v.clone(), v.clone())).collect();
    for (a, b) in psi {
        if !g.has_edge(a, b) {
            return false;
        }
        let ta = at[a].clone();
        let tb = at[b].clone();
        at.insert(a.clone(), tb);
        at.insert(b.clone(), ta);
    }
    p.iter().all(|(token, dest)| at.get(dest) == Some(token))
}

fn token_swapping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut correct = 0;
    let mut within = 0;
    let mut worst: f64 = 0.0;
    let mut total_exact = 0;
    let graphs = 100;
    let mut bad = String::new();
    for i in 0..graphs {
        let n = rng.gen_range(2..=7);
        let density = [0.0, 0.1, 0.3][rng.gen_range(0..3)];
        let g = random_connected_graph(&mut rng, n, density);
        let mut nodes = g.nodes().to_vec();
        nodes.shuffle(&mut rng);
        let k = rng.gen_range(1..=n);
        let mut dests = g.nodes().to_vec();
        dests.shuffle(&mut rng);
        let p: TokenMap = nodes.into_iter().take(k).zip(dests).collect();
        let approx = token_swapping_approx(&g, &p).expect("connected graph");
        let exact = token_swapping_exact(&g, &p).expect("at most 7 nodes");
        if replay(&g, &p, &approx) && replay(&g, &p, &exact) {
            correct += 1;
        } else if bad.is_empty() {
            bad = format!("; graph {i}: replay failed");
        }
        if approx.len() <= 4 * exact.len() {
            within += 1;
        } else if bad.is_empty() {
            bad = format!(
                "; graph {i}: {} swaps against {}",
                approx.len(),
                exact.len()
            );
        }
        total_exact += exact.len();
        if !exact.is_empty() {
            worst = worst.max(approx.len() as f64 / exact.len() as f64);
        }
    }
    outcome(
        correct == graphs && within == graphs && total_exact > 0,
        format!("{correct}/{graphs} replay-correct, {within}/{graphs} within 4x optimal (worst ratio {worst:.2}){bad}"),
    )
}

fn connected(nodes: &BTreeSet<Qidx>, g: &CouplingGraph) -> bool {
    let Some(start) = nodes.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(v) = queue.pop_front() {
        for w in g.neighbors(&v) {
            if nodes.contains(w) && seen.insert(w.clone()) {
                queue.push_back(w.clone());
            }
        }
    }
    seen.len() == nodes.len()
}

fn chain_and_cuts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5eed);
    let graphs = 100;
    let mut bad = String::new();
    let mut good = 0;
    let mut with_cuts = 0;
    for i in 0..graphs {
        let n = rng.gen_range(1..=32);
        let density = [0.0, 0.02, 0.1, 0.3][rng.gen_range(0..4)];
        let g = random_connected_graph(&mut rng, n, density);
        let all: BTreeSet<Qidx> = g.nodes().iter().cloned().collect();
        let naive: BTreeSet<Qidx> = all
            .iter()
            .filter(|v| {
                let mut rest = all.clone();
                rest.remove(*v);
                !connected(&rest, &g)
            })
            .cloned()
            .collect();
        let fast = articulation_points(&g).expect("connected");
        let chain = construct_subgraphs(&g).expect("connected");
        let mut ok = fast == naive && chain.len() == n;
        let mut prev: Option<BTreeSet<Qidx>> = None;
        for k in 1..=n {
            let Some(gk) = chain.get(k) else {
                ok = false;
                break;
            };
            let vs: BTreeSet<Qidx> = gk.nodes().iter().cloned().collect();
            let induced = g
                .edges()
                .iter()
                .filter(|(a, b)| vs.contains(a) && vs.contains(b))
                .count()
                == gk.edge_count();
            let nested = prev.as_ref().is_none_or(|p| p.is_subset(&vs));
            ok &= vs.len() == k && vs.is_subset(&all) && connected(&vs, &g) && induced && nested;
            prev = Some(vs);
        }
        with_cuts += !naive.is_empty() as usize;
        if ok {
            good += 1;
        } else if bad.is_empty() {
            bad = format!("; graph {i} ({n} nodes) differs");
        }
    }
    outcome(
        good == graphs,
        format!(
            "{good}/{graphs} graphs: chain connected, nested, induced and sized, cut vertices match the \
             naive oracle ({with_cuts} graphs have some){bad}"
        ),
    )
}

fn allocate(p: &source::Program, g: &CouplingGraph) -> Allocation {
    let n = min_budget(p, Dialect::default()).expect("well typed");
    let d = check_program(p, n, Dialect::default()).expect("well typed");
    qubit_alloc(p, &d, g, Dialect::default()).expect("allocates")
}

fn call_swaps(a: &Allocation) -> Vec<usize> {
    a.routing(None)
        .filter(|(s, _)| matches!(s, SwapSite::Call(_)))
        .map(|(_, psi)| psi.len())
        .collect()
}

fn worked_examples() -> Outcome {
    let qx2 = parse_coupling_graph(&data("qx2.graph")).expect("qx2.graph parses");
    let qx2_ok = (qx2.node_count(), qx2.edge_count()) == (5, 6);

    let path = parse_coupling_graph("nodes: q0 q1 q2\nedges: q0-q1 q1-q2").expect("path parses");
    let distant_cnot = parse_source(
        "main { let a = init() in let b = init() in let c = init() in let (x, y) = cnot(a, c) in (x, b, y) }",
    )
    .expect("distant_cnot parses");
    let a4 = allocate(&distant_cnot, &path);
    let pre: Vec<usize> = a4
        .routing(None)
        .filter(|(s, _)| **s == SwapSite::Cnot)
        .map(|(_, psi)| psi.len())
        .collect();
    let path_ok = pre == [1]
        && a4.program.count_swaps() == 1
        && check_program_tgt(&a4.program, &path, Dialect::default()).is_ok();

    let g5 = parse_coupling_graph(&data("paw.graph")).expect("paw.graph parses");
    let p5 = parse_source(&data("borrow.qsrc")).expect("borrow.qsrc parses");
    let a5 = allocate(&p5, &g5);
    let calls = call_swaps(&a5);
    let checks = check_program_tgt(&a5.program, &g5, Dialect::default()).is_ok();
    let borrow_ok =
        g5.edge_count() == 4 && calls.len() == 2 && calls[0] == 0 && calls[1] >= 1 && checks;
    outcome(
        qx2_ok && path_ok && borrow_ok,
        format!(
            "QX2 {}/{} nodes/edges; path swaps before the cnot {pre:?}; borrow swaps per call {calls:?}, \
             output checks: {checks}",
            qx2.node_count(),
            qx2.edge_count()
        ),
    )
}

/// Applies `f` to every identifier-like word of `text`.
fn rename_words(text: &str, f: impl Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if !word.is_empty() {
            out.push_str(&f(word).unwrap_or_else(|| word.clone()));
            word.clear();
        }
    };
    for c in text.chars() {
        if c.is_ascii_alphanumeric() || c == '_' || c == '%' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

fn numbered<'a>(w: &'a str, prefix: &str) -> Option<&'a str> {
    w.strip_prefix(prefix)
        .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}

/// Fresh names for every variable of a generated or allocated program.
fn rename_vars(text: &str) -> String {
    rename_words(text, |w| {
        numbered(w, "x")
            .map(|d| format!("renamed_{d}"))
            .or_else(|| numbered(w, "%v").map(|d| format!("%w{d}")))
    })
}

fn source_verdicts(p: &source::Program, upto: usize) -> (Option<usize>, Vec<bool>, Vec<String>) {
    let dialect = Dialect::default();
    let least = min_budget(p, dialect).ok();
    let at: Vec<bool> = (0..=upto)
        .map(|n| check_program(p, n, dialect).is_ok())
        .collect();
    let types = match least.map(|n| check_program(p, n, dialect)) {
        Some(Ok(d)) => p
            .defs
            .iter()
            .map(|f| {
                d.theta
                    .get(&f.name)
                    .map(|t| t.to_string())
                    .unwrap_or_default()
            })
            .collect(),
        _ => Vec::new(),
    };
    (least, at, types)
}

fn metamorphic() -> Outcome {
    let cfg = FuzzConfig::default();
    let cases = 200;
    let mut renaming = 0;
    let mut monotone = 0;
    let mut extension = 0;
    let mut bad = String::new();
    let note = |bad: &mut String, what: String| {
        if bad.is_empty() {
            *bad = format!("; {what}");
        }
    };
    for i in 0..cases {
        let (g, gen) = generate_case(SEED, i, &cfg);
        let p = &gen.program;
        let upto = gen.budget + 3;
        let base = source_verdicts(p, upto);
        let budget = base.0.expect("generated programs are well typed");
        let alloc = allocate(p, &g);
        let dialect = Dialect::default();

        // Renaming: source variables, target variables, target positions.
        let renamed = parse_source(&rename_vars(&print_source(p))).expect("renamed source parses");
        let src_same = source_verdicts(&renamed, upto) == base;
        let tgt_text = print_target(&alloc.program);
        let tgt_renamed = parse_target(&rename_vars(&tgt_text)).expect("renamed target parses");
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut qalloc::fuzz::case_rng(SEED ^ 0xabc, i));
        let qmap = |w: &str| {
            numbered(w, "q")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|d| *d < perm.len())
                .map(|d| format!("node{}", perm[d]))
        };
        let g_renamed = parse_coupling_graph(&rename_words(
            &qalloc::syntax::print_coupling_graph(&g),
            qmap,
        ))
        .expect("renamed graph");
        let tgt_q = parse_target(&rename_words(&tgt_text, qmap)).expect("renamed target parses");
        let tgt_same = check_program_tgt(&tgt_renamed, &g, dialect).is_ok()
            && check_program_tgt(&tgt_q, &g_renamed, dialect).is_ok()
            && check_program_tgt(&tgt_q, &g, dialect).is_err();
        if src_same && tgt_same {
            renaming += 1;
        } else {
            note(
                &mut bad,
                format!("renaming changed case {i} (source {src_same}, target {tgt_same})"),
            );
        }

        // Budget monotonicity: the verdicts over 0..=upto switch once, at
        // the least budget, which is at most the generator's budget.
        let (_, at, _) = &base;
        let expected: Vec<bool> = (0..=upto).map(|n| n >= budget).collect();
        let exceeded = budget == 0
            || matches!(check_program(p, budget - 1, dialect), Err(e) if matches!(e.kind, SrcErrorKind::BudgetExceeded { .. }));
        if budget <= gen.budget && *at == expected && exceeded {
            monotone += 1;
        } else {
            note(
                &mut bad,
                format!("budget verdicts of case {i}: {at:?} with least {budget}"),
            );
        }

        // Environment extension: prepend the functions of another case,
        // renamed apart and never called.
        let (_, donor) = generate_case(SEED ^ 0xd0, i, &cfg);
        let donor_text = rename_words(&print_source(&donor.program), |w| {
            numbered(w, "f").map(|d| format!("unused{d}"))
        });
        let donor_p = parse_source(&donor_text).expect("donor parses");
        let mut extended = p.clone();
        extended.defs.splice(0..0, donor_p.defs.iter().cloned());
        let (l2, at2, types2) = source_verdicts(&extended, upto);
        let src_ext =
            l2 == base.0 && at2 == base.1 && types2.get(donor_p.defs.len()..) == Some(&base.2[..]);
        let donor_alloc = allocate(&donor_p, &g);
        let mut tgt_ext = alloc.program.clone();
        tgt_ext
            .defs
            .splice(0..0, donor_alloc.program.defs.iter().cloned());
        let tgt_ext_ok = check_program_tgt(&tgt_ext, &g, dialect).is_ok();
        if src_ext && tgt_ext_ok {
            extension += 1;
        } else {
            note(
                &mut bad,
                format!("extension changed case {i} (source {src_ext}, target {tgt_ext_ok})"),
            );
        }
    }
    outcome(
        renaming == cases && monotone == cases && extension == cases,
        format!("renaming {renaming}/{cases}, budget monotonicity {monotone}/{cases}, environment extension {extension}/{cases}{bad}"),
    )
}

fn random_density(rng: &mut ChaCha8Rng, wires: usize) -> DensityState {
    let dim = 1 << wires;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mixtures = rng.gen_range(1..=3);
    for _ in 0..mixtures {
        let psi: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] += psi[i] * psi[j].conj() / (norm * mixtures as f64);
            }
        }
    }
    let labels = (0..wires)
        .map(|i| Var::from(format!("w{i}").as_str()))
        .collect();
    DensityState::from_matrix(labels, data).expect("valid density matrix")
}

fn sim_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x51);
    let wires = 4;
    let w = |i: usize| Var::from(format!("w{i}").as_str());
    let mut drift: f64 = 0.0;
    let mut involution: f64 = 0.0;
    let mut split: f64 = 0.0;
    let runs = 10;
    let steps = 1000;
    for _ in 0..runs {
        let mut rho = random_density(&mut rng, wires);
        for _ in 0..steps {
            let before = rho.trace();
            let a = rng.gen_range(0..wires);
            let b = (a + rng.gen_range(1..wires)) % wires;
            match rng.gen_range(0..5) {
                0 => rho.cnot(&w(a), &w(b)).unwrap(),
                1 => rho.swap(&w(a), &w(b)).unwrap(),
                2 => rho.hadamard(&w(a)).unwrap(),
                3 => rho.reset(&w(a)).unwrap(),
                _ => {
                    let mut zero = rho.clone();
                    let mut one = rho.clone();
                    zero.project(&w(a), false).unwrap();
                    one.project(&w(a), true).unwrap();
                    split = split.max((zero.trace() + one.trace() - before).abs());
                    // Continue on the heavier branch, renormalised, so that
                    // the run does not decay to zero.
                    let next = if zero.trace() >= one.trace() {
                        zero
                    } else {
                        one
                    };
                    let scale = 1.0 / next.trace();
                    rho = DensityState::from_matrix(
                        next.labels().to_vec(),
                        next.matrix().iter().map(|c| c * scale).collect(),
                    )
                    .unwrap();
                    continue;
                }
            }
            drift = drift.max((rho.trace() - before).abs());
        }
        let rho = random_density(&mut rng, wires);
        for (a, b) in [(0, 1), (2, 0), (3, 1)] {
            let mut twice = rho.clone();
            twice.cnot(&w(a), &w(b)).unwrap();
            twice.cnot(&w(a), &w(b)).unwrap();
            involution = involution.max(twice.frobenius_sq(&rho).sqrt());
            let mut twice = rho.clone();
            twice.swap(&w(a), &w(b)).unwrap();
            twice.swap(&w(a), &w(b)).unwrap();
            involution = involution.max(twice.frobenius_sq(&rho).sqrt());
        }
    }

    // The same invariants through the interpreter, on every step of every
    // branch of fuzzed programs with Hadamards and measurements.
    let cfg = criterion2_config();
    let mut machine_steps = 0u64;
    for i in 0..100 {
        let (_, gen) = generate_case(SEED, i, &cfg);
        let p = &gen.program;
        let m = SourceMachine { program: p };
        let mut stack = vec![SrcConfig::initial(p, gen.budget).expect("few wires")];
        while let Some(c) = stack.pop() {
            if machine_steps > 200_000 {
                break;
            }
            use qalloc_core::sim::Machine;
            if m.value(&c).is_some() {
                continue;
            }
            let before = c.state.trace();
            machine_steps += 1;
            match m.step(c) {
                Ok(Successors::One(n)) => {
                    drift = drift.max((n.state.trace() - before).abs());
                    stack.push(n);
                }
                Ok(Successors::Measure { zero, one }) => {
                    split = split.max((zero.state.trace() + one.state.trace() - before).abs());
                    for n in [zero, one] {
                        if n.state.trace() >= qalloc_core::sim::PRUNE_WEIGHT {
                            stack.push(n);
                        }
                    }
                }
                Err(e) => panic!("well-typed program got stuck: {e}"),
            }
        }
    }
    outcome(
        drift <= ALGEBRA_TOL && involution <= ALGEBRA_TOL && split <= ALGEBRA_TOL,
        format!(
            "{runs}x{steps}-step runs plus {machine_steps} interpreter steps: max trace drift {drift:.1e}, \
             max |CNOT^2 - I|,|SWAP^2 - I| {involution:.1e}, max branch-weight gap {split:.1e} (tolerance {ALGEBRA_TOL:e})"
        ),
    )
}

fn main() {
    qalloc::with_pipeline_stack(run);
}

fn run() {
    let mut all = true;
    let mut line = |n: usize, name: &str, started: Instant, o: Outcome| {
        all &= o.pass;
        println!(
            "criterion {n} [{}] {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    let default_run = run_fuzz(SEED, 500, &FuzzConfig::default());
    line(1, "type preservation", t, type_preservation(&default_run));

    let t = Instant::now();
    let small_run = run_fuzz(SEED, 200, &criterion2_config());
    line(
        2,
        "semantic preservation",
        t,
        semantic_preservation(&small_run),
    );

    let t = Instant::now();
    line(
        3,
        "source soundness",
        t,
        source_soundness(&[&default_run, &small_run]),
    );
    let t = Instant::now();
    line(
        4,
        "target soundness",
        t,
        target_soundness(&[&default_run, &small_run]),
    );
    let t = Instant::now();
    line(5, "token swapping", t, token_swapping());
    let t = Instant::now();
    line(6, "subgraph chain", t, chain_and_cuts());
    let t = Instant::now();
    line(7, "worked examples", t, worked_examples());
    let t = Instant::now();
    line(8, "metamorphic lemmas", t, metamorphic());
    let t = Instant::now();
    line(9, "simulator algebra", t, sim_algebra());

    if !all {
        std::process::exit(1);
    }
}
