use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qalloc::fuzz::{check_case, run_fuzz, FuzzConfig, Verdict};
use qalloc::report::{branch_json, document, trace_json, Diagnostic};
use qalloc::syntax::{
    parse_coupling_graph, parse_source, parse_target, print_target, to_dot, ParseError,
};
use qalloc_core::allocation::qubit_alloc;
use qalloc_core::check::source::{check_program, min_budget};
use qalloc_core::check::target::check_program_tgt;
use qalloc_core::graph::{articulation_points, construct_subgraphs, CouplingGraph};
use qalloc_core::sim::{
    run_to_values, BranchTrace, SimError, SourceMachine, SrcConfig, TargetMachine, TgtConfig,
    DEFAULT_FUEL, MAX_WIRES,
};
use qalloc_core::types::Dialect;
use qalloc_core::{source, target};

/// Type-directed qubit allocation for a small quantum language.
#[derive(Parser, Debug)]
#[command(name = "qalloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type-check a source program and report its least qubit budget.
    CheckSrc {
        program: PathBuf,
        /// Check at this budget instead of searching for the least one.
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Type-check a target program against a coupling graph.
    CheckTgt {
        program: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Allocate a source program onto a coupling graph.
    Alloc {
        program: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Write the target program here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the source-to-target variable correspondence as JSON.
        #[arg(long, value_name = "FILE")]
        emit_trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every measurement branch of a program to a value.
    Simulate {
        /// A `.qsrc` or `.qtgt` file; anything else is read as source.
        program: PathBuf,
        /// Required for target programs.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Free wires of a source run; defaults to the least budget.
        #[arg(long)]
        wires: Option<usize>,
        #[arg(long)]
        fuel: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Allocate, check the output and compare source and target runs.
    Verify {
        program: PathBuf,
        /// May also be given with `--graph`.
        graph_pos: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        fuel: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate random programs and graphs and run the property suite.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 5)]
        max_qubits: usize,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 3)]
        max_functions: usize,
        #[arg(long, default_value_t = 5)]
        min_nodes: usize,
        #[arg(long, default_value_t = 8)]
        max_nodes: usize,
        /// Graphs with more nodes are type-checked but not simulated.
        #[arg(long, default_value_t = 6)]
        sim_max_wires: usize,
        #[arg(long)]
        no_recursion: bool,
        #[arg(long)]
        fuel: Option<u64>,
        /// Write the JSON report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Describe a coupling graph and its workspace chain.
    Graph {
        graph: PathBuf,
        /// Print Graphviz text instead.
        #[arg(long)]
        emit_dot: bool,
        /// With `--emit-dot`, highlight chain element `Gk` inside the graph.
        #[arg(long, value_name = "K")]
        chain: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Common {
    /// Print the typing derivation.
    #[arg(long)]
    explain: bool,
    /// Print one JSON document on standard output.
    #[arg(long)]
    json: bool,
    /// Accept the Hadamard gate.
    #[arg(long)]
    allow_h: bool,
}

impl Common {
    fn dialect(&self) -> Dialect {
        Dialect {
            hadamard: self.allow_h,
        }
    }
}

enum Failure {
    /// The input was read and rejected.
    Rejected,
    /// Bad arguments or an unreadable file.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe instead of panicking in println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match qalloc::with_pipeline_stack(move || run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("qalloc: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::CheckSrc {
            program,
            budget,
            common,
        } => check_src(&program, budget, common),
        Command::CheckTgt {
            program,
            graph,
            common,
        } => check_tgt(&program, &graph, common),
        Command::Alloc {
            program,
            graph,
            output,
            emit_trace,
            common,
        } => alloc(
            &program,
            &graph,
            output.as_deref(),
            emit_trace.as_deref(),
            common,
        ),
        Command::Simulate {
            program,
            graph,
            wires,
            fuel,
            common,
        } => simulate(&program, graph.as_deref(), wires, fuel, common),
        Command::Verify {
            program,
            graph_pos,
            graph,
            fuel,
            common,
        } => {
            let graph = match (graph_pos, graph) {
                (Some(_), Some(_)) => return Err(Failure::Usage("give the graph once".into())),
                (Some(g), None) | (None, Some(g)) => g,
                (None, None) => {
                    return Err(Failure::Usage(
                        "verify needs a coupling graph (--graph)".into(),
                    ))
                }
            };
            verify(&program, &graph, fuel, common)
        }
        Command::Fuzz {
            seed,
            count,
            max_qubits,
            max_depth,
            max_functions,
            min_nodes,
            max_nodes,
            sim_max_wires,
            no_recursion,
            fuel,
            output,
            common,
        } => {
            if min_nodes == 0 || min_nodes > max_nodes {
                return Err(Failure::Usage(
                    "need 1 <= --min-nodes <= --max-nodes".into(),
                ));
            }
            if max_qubits == 0 {
                return Err(Failure::Usage("--max-qubits must be positive".into()));
            }
            let cfg = FuzzConfig {
                max_qubits,
                max_depth,
                max_functions,
                min_nodes,
                max_nodes,
                hadamard: common.allow_h,
                recursion: !no_recursion,
                fuel: fuel_setting(fuel)?,
                sim_max_wires: sim_max_wires.min(MAX_WIRES),
                ..FuzzConfig::default()
            };
            fuzz(seed, count, &cfg, output.as_deref(), common)
        }
        Command::Graph {
            graph,
            emit_dot,
            chain,
            common,
        } => graph_info(&graph, emit_dot, chain, common),
    }
}

/// `--fuel`, then `QALLOC_FUEL`, then the default.
fn fuel_setting(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match std::env::var("QALLOC_FUEL") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("QALLOC_FUEL must be a step count, not `{s}`"))),
        Err(_) => Ok(DEFAULT_FUEL),
    }
}

fn read(path: &Path) -> Result<(String, String), Failure> {
    let name = path.display().to_string();
    std::fs::read_to_string(path)
        .map(|text| (name.clone(), text))
        .map_err(|e| Failure::Usage(format!("{name}: {e}")))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_diag(file: &str, e: &ParseError) -> Diagnostic {
    let mut d = Diagnostic::at(file, e.line, e.column, e.message.clone());
    match e.expected.as_slice() {
        [] => {}
        [one] => d.message.push_str(&format!(" (expected {one})")),
        many => d
            .message
            .push_str(&format!(" (expected one of {})", many.join(", "))),
    }
    d
}

/// Prints the diagnostics on standard error and, with `--json`, a failure
/// document on standard output.
fn reject(command: &str, diags: &[Diagnostic], common: Common, extra: Value) -> Failure {
    for d in diags {
        eprintln!("{d}");
    }
    if common.json {
        let mut body = json!({ "ok": false, "diagnostics": diags });
        if let (Value::Object(b), Value::Object(x)) = (&mut body, extra) {
            b.extend(x);
        }
        println!("{}", document(command, body));
    }
    Failure::Rejected
}

fn load_source(
    command: &str,
    path: &Path,
    common: Common,
) -> Result<(String, source::Program), Failure> {
    let (name, text) = read(path)?;
    match parse_source(&text) {
        Ok(p) => Ok((name, p)),
        Err(e) => {
            let d = parse_diag(&name, &e);
            Err(reject(command, &[d], common, json!({})))
        }
    }
}

fn load_target(
    command: &str,
    path: &Path,
    common: Common,
) -> Result<(String, target::Program), Failure> {
    let (name, text) = read(path)?;
    match parse_target(&text) {
        Ok(p) => Ok((name, p)),
        Err(e) => {
            let d = parse_diag(&name, &e);
            Err(reject(command, &[d], common, json!({})))
        }
    }
}

fn load_graph(
    command: &str,
    path: &Path,
    common: Common,
) -> Result<(String, CouplingGraph), Failure> {
    let (name, text) = read(path)?;
    match parse_coupling_graph(&text) {
        Ok(g) => Ok((name, g)),
        Err(e) => {
            let d = parse_diag(&name, &e);
            Err(reject(command, &[d], common, json!({})))
        }
    }
}

fn check_src(path: &Path, budget: Option<usize>, common: Common) -> Outcome {
    const CMD: &str = "check-src";
    let (name, p) = load_source(CMD, path, common)?;
    let dialect = common.dialect();
    let n = match budget {
        Some(n) => n,
        None => match min_budget(&p, dialect) {
            Ok(n) => n,
            Err(e) => {
                return Err(reject(
                    CMD,
                    &[Diagnostic::new(&name, e.span, e.to_string())],
                    common,
                    json!({}),
                ))
            }
        },
    };
    let d = match check_program(&p, n, dialect) {
        Ok(d) => d,
        Err(e) => {
            let diag = Diagnostic::new(&name, e.span, e.to_string());
            return Err(reject(CMD, &[diag], common, json!({ "budget": n })));
        }
    };
    let functions: Vec<Value> = p
        .defs
        .iter()
        .filter_map(|f| {
            d.theta
                .get(&f.name)
                .map(|t| json!({ "name": f.name.as_str(), "type": t.to_string() }))
        })
        .collect();
    if common.json {
        let mut body =
            json!({ "ok": true, "budget": n, "functions": functions, "diagnostics": [] });
        if common.explain {
            body["derivation"] = Value::String(d.to_string());
        }
        println!("{}", document(CMD, body));
    } else {
        for f in &p.defs {
            if let Some(t) = d.theta.get(&f.name) {
                println!("{} : {t}", f.name);
            }
        }
        match budget {
            Some(_) => println!("main type-checks with {n} qubits"),
            None => println!("main needs {n} qubits"),
        }
        if common.explain {
            print!("{d}");
        }
    }
    Ok(())
}

fn check_tgt(path: &Path, graph: &Path, common: Common) -> Outcome {
    const CMD: &str = "check-tgt";
    let (_, g) = load_graph(CMD, graph, common)?;
    let (name, p) = load_target(CMD, path, common)?;
    match check_program_tgt(&p, &g, common.dialect()) {
        Ok(d) => {
            if common.json {
                let mut body = json!({ "ok": true, "swaps": p.count_swaps(), "diagnostics": [] });
                if common.explain {
                    body["derivation"] = Value::String(d.to_string());
                }
                println!("{}", document(CMD, body));
            } else {
                println!("ok: {} swaps", p.count_swaps());
                if common.explain {
                    print!("{d}");
                }
            }
            Ok(())
        }
        Err(ds) => {
            let diags: Vec<Diagnostic> = ds
                .iter()
                .map(|d| Diagnostic::new(&name, d.span, d.to_string()))
                .collect();
            Err(reject(CMD, &diags, common, json!({})))
        }
    }
}

fn alloc(
    path: &Path,
    graph: &Path,
    output: Option<&Path>,
    trace: Option<&Path>,
    common: Common,
) -> Outcome {
    const CMD: &str = "alloc";
    let (_, g) = load_graph(CMD, graph, common)?;
    let (name, p) = load_source(CMD, path, common)?;
    let dialect = common.dialect();
    let derivation = min_budget(&p, dialect).and_then(|n| check_program(&p, n, dialect));
    let derivation = match derivation {
        Ok(d) => d,
        Err(e) => {
            return Err(reject(
                CMD,
                &[Diagnostic::new(&name, e.span, e.to_string())],
                common,
                json!({}),
            ))
        }
    };
    let a = match qubit_alloc(&p, &derivation, &g, dialect) {
        Ok(a) => a,
        Err(e) => {
            return Err(reject(
                CMD,
                &[Diagnostic::whole_file(&name, e.to_string())],
                common,
                json!({}),
            ))
        }
    };
    let text = print_target(&a.program);
    if let Some(t) = trace {
        let doc = trace_json(&a.trace);
        write(
            t,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("JSON values serialize")
            ),
        )?;
    }
    match output {
        Some(o) => write(o, &text)?,
        None if !common.json => print!("{text}"),
        None => {}
    }
    let workspaces: Vec<Value> = a
        .workspaces
        .iter()
        .map(|(f, w)| json!({ "function": f.as_str(), "nodes": w.size, "clamped": w.clamped }))
        .collect();
    if common.json {
        let mut body = json!({
            "ok": true,
            "budget": derivation.budget,
            "swaps": a.program.count_swaps(),
            "workspaces": workspaces,
            "diagnostics": [],
        });
        if output.is_none() {
            body["program"] = Value::String(text);
        }
        if common.explain {
            body["derivation"] = Value::String(derivation.to_string());
        }
        println!("{}", document(CMD, body));
    } else {
        if common.explain {
            eprint!("{derivation}");
        }
        eprintln!("{name}: {} swaps inserted", a.program.count_swaps());
    }
    Ok(())
}

fn sim_reject(name: &str, e: &SimError, common: Common) -> Outcome {
    let span = match e {
        SimError::StuckNoFreeQubit { span } | SimError::ConnectivityStuck { span, .. } => *span,
        _ => Default::default(),
    };
    Err(reject(
        "simulate",
        &[Diagnostic::new(name, span, e.to_string())],
        common,
        json!({}),
    ))
}

fn simulate(
    path: &Path,
    graph: Option<&Path>,
    wires: Option<usize>,
    fuel: Option<u64>,
    common: Common,
) -> Outcome {
    const CMD: &str = "simulate";
    let fuel = fuel_setting(fuel)?;
    let is_target = path.extension().is_some_and(|e| e == "qtgt");
    let (name, runs) = if is_target {
        let Some(graph) = graph else {
            return Err(Failure::Usage(
                "simulating a target program needs --graph".into(),
            ));
        };
        if wires.is_some() {
            return Err(Failure::Usage(
                "--wires applies to source programs only".into(),
            ));
        }
        let (_, g) = load_graph(CMD, graph, common)?;
        let (name, p) = load_target(CMD, path, common)?;
        let runs = TgtConfig::initial(&p, &g).and_then(|c| {
            run_to_values(
                &TargetMachine {
                    program: &p,
                    graph: &g,
                },
                c,
                fuel,
            )
        });
        (name, runs)
    } else {
        if graph.is_some() {
            return Err(Failure::Usage(
                "--graph applies to target programs only".into(),
            ));
        }
        let (name, p) = load_source(CMD, path, common)?;
        let n = match wires {
            Some(n) => n,
            None => match min_budget(&p, common.dialect()) {
                Ok(n) => n,
                Err(e) => {
                    return Err(reject(
                        CMD,
                        &[Diagnostic::new(&name, e.span, e.to_string())],
                        common,
                        json!({}),
                    ))
                }
            },
        };
        let runs = SrcConfig::initial(&p, n)
            .and_then(|c| run_to_values(&SourceMachine { program: &p }, c, fuel));
        (name, runs)
    };
    let runs: Vec<BranchTrace> = match runs {
        Ok(r) => r,
        Err(e) => return sim_reject(&name, &e, common),
    };
    if common.json {
        let branches: Vec<Value> = runs.iter().map(branch_json).collect();
        println!(
            "{}",
            document(
                CMD,
                json!({ "ok": true, "fuel": fuel, "branches": branches })
            )
        );
    } else {
        for b in &runs {
            let path: String = b.path.iter().map(|&x| if x { '1' } else { '0' }).collect();
            let values: Vec<&str> = b.values.iter().map(|v| v.as_str()).collect();
            let path = if path.is_empty() {
                "-".to_string()
            } else {
                path
            };
            println!(
                "branch {path} weight {:.12} returns ({})",
                b.weight(),
                values.join(", ")
            );
        }
    }
    Ok(())
}

fn verify(path: &Path, graph: &Path, fuel: Option<u64>, common: Common) -> Outcome {
    const CMD: &str = "verify";
    let fuel = fuel_setting(fuel)?;
    let (_, g) = load_graph(CMD, graph, common)?;
    let (name, p) = load_source(CMD, path, common)?;
    let cfg = FuzzConfig {
        hadamard: common.allow_h,
        fuel,
        sim_max_wires: MAX_WIRES,
        ..FuzzConfig::default()
    };
    let (checks, budget, swaps) = check_case(&p, &g, &cfg);
    let mut diags = Vec::new();
    for (check, v) in checks.all() {
        match v {
            Verdict::Pass | Verdict::Skipped(_) => {}
            Verdict::Fail(m) => diags.push(Diagnostic::whole_file(
                &name,
                format!("{check} failed: {m}"),
            )),
            Verdict::StrictPairingOnly(m) => diags.push(Diagnostic::whole_file(
                &name,
                format!("{check} holds only when branches are paired freely: {m}"),
            )),
            Verdict::Inconclusive(m) => diags.push(Diagnostic::whole_file(
                &name,
                format!("{check} inconclusive: {m}"),
            )),
        }
    }
    let body = json!({ "budget": budget, "swaps": swaps, "checks": checks });
    if !diags.is_empty() {
        return Err(reject(CMD, &diags, common, body));
    }
    if common.json {
        let mut body = body;
        body["ok"] = json!(true);
        body["diagnostics"] = json!([]);
        println!("{}", document(CMD, body));
    } else {
        for (check, v) in checks.all() {
            match v {
                Verdict::Skipped(why) => println!("{check}: skipped ({why})"),
                _ => println!("{check}: pass"),
            }
        }
        if let (Some(b), Some(s)) = (budget, swaps) {
            println!("budget {b}, {s} swaps");
        }
    }
    Ok(())
}

fn fuzz(seed: u64, count: u64, cfg: &FuzzConfig, output: Option<&Path>, common: Common) -> Outcome {
    let report = run_fuzz(seed, count, cfg);
    let mut body = serde_json::to_value(&report).expect("reports serialize");
    body["ok"] = json!(report.ok());
    let text = serde_json::to_string_pretty(&document("fuzz", body)).expect("reports serialize");
    if let Some(o) = output {
        write(o, &format!("{text}\n"))?;
    }
    if common.json {
        println!("{text}");
    } else {
        for (check, t) in &report.summary {
            println!(
                "{check:<22} pass {:>5}  fail {:>3}  strict-only {:>3}  inconclusive {:>3}  skipped {:>5}",
                t.pass, t.fail, t.strict_pairing_only, t.inconclusive, t.skipped
            );
        }
    }
    for c in report.cases.iter().filter(|c| c.checks.failed()) {
        for (check, v) in c.checks.all() {
            if let Verdict::Fail(m) = v {
                eprintln!("case {} (seed {seed}): {check} failed: {m}", c.index);
            }
        }
    }
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Rejected)
    }
}

fn graph_info(path: &Path, emit_dot: bool, chain_k: Option<usize>, common: Common) -> Outcome {
    const CMD: &str = "graph";
    let (name, g) = load_graph(CMD, path, common)?;
    let cuts = articulation_points(&g).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    let chain = construct_subgraphs(&g).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    if chain_k.is_some() && !emit_dot {
        return Err(Failure::Usage("--chain is used with --emit-dot".into()));
    }
    if emit_dot {
        let (label, highlight) = match chain_k {
            Some(k) => {
                let Some(gk) = chain.get(k) else {
                    return Err(Failure::Usage(format!(
                        "the chain has elements G1..G{}",
                        chain.len()
                    )));
                };
                (format!("G{k}"), gk.nodes().to_vec())
            }
            None => ("G".to_string(), Vec::new()),
        };
        print!("{}", to_dot(&g, &label, &highlight));
        return Ok(());
    }
    let names = |qs: &mut dyn Iterator<Item = &qalloc_core::Qidx>| -> Vec<String> {
        qs.map(|q| q.to_string()).collect()
    };
    let nodes = names(&mut g.nodes().iter());
    let cuts = names(&mut cuts.iter());
    let removal = names(&mut chain.removal_order().iter());
    if common.json {
        let edges: Vec<Value> = g
            .edges()
            .iter()
            .map(|(a, b)| json!([a.as_str(), b.as_str()]))
            .collect();
        let body = json!({
            "ok": true,
            "nodes": nodes,
            "edges": edges,
            "articulation_points": cuts,
            "removal_order": removal,
        });
        println!("{}", document(CMD, body));
    } else {
        println!("{} nodes, {} edges", g.node_count(), g.edge_count());
        println!("articulation points: {}", cuts.join(" "));
        println!("removal order: {}", removal.join(" "));
    }
    Ok(())
}
