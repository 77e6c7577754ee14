use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn qalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qalloc"))
        .args(args)
        .env_remove("QALLOC_FUEL")
        .output()
        .expect("the binary runs")
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn verify_borrowing_call_succeeds() {
    let o = qalloc(&["verify", &path("borrow.qsrc"), "--graph", &path("paw.graph")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("semantic_preservation: pass"));
    let positional = qalloc(&["verify", &path("borrow.qsrc"), &path("paw.graph")]);
    assert_eq!(positional.status.code(), Some(0));
}

#[test]
fn bad_cnot_is_rejected_with_a_position() {
    let o = qalloc(&[
        "check-tgt",
        &path("bad-cnot.qtgt"),
        "--graph",
        &path("qx2.graph"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("ConnectivityViolation"), "{err}");
    assert!(err.contains("q1~q4"), "{err}");
    assert!(err.contains("bad-cnot.qtgt:4:5: "), "{err}");
}

#[test]
fn forced_simulation_of_bad_cnot_gets_stuck() {
    let o = qalloc(&[
        "simulate",
        &path("bad-cnot.qtgt"),
        "--graph",
        &path("qx2.graph"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ConnectivityStuck"));
}

#[test]
fn fuzz_is_deterministic() {
    let args = ["fuzz", "--seed", "42", "--count", "100", "--json"];
    let a = qalloc(&args);
    let b = qalloc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "fuzz");
    assert_eq!(report["ok"], true);
    assert_eq!(report["cases"].as_array().map(Vec::len), Some(100));
    let other = qalloc(&["fuzz", "--seed", "43", "--count", "100", "--json"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn fuzz_report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = qalloc(&[
        "fuzz",
        "--seed",
        "7",
        "--count",
        "20",
        "--json",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, json(&o));
}

#[test]
fn json_outputs_carry_a_schema_version() {
    let runs = [
        vec!["check-src", &*path("borrow.qsrc")]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>(),
        [
            "check-tgt",
            &path("bad-cnot.qtgt"),
            "--graph",
            &path("qx2.graph"),
        ]
        .map(String::from)
        .to_vec(),
        ["alloc", &path("borrow.qsrc"), "--graph", &path("paw.graph")]
            .map(String::from)
            .to_vec(),
        ["simulate", &path("borrow.qsrc")].map(String::from).to_vec(),
        ["verify", &path("borrow.qsrc"), "--graph", &path("paw.graph")]
            .map(String::from)
            .to_vec(),
        ["graph", &path("qx2.graph")].map(String::from).to_vec(),
    ];
    for mut args in runs {
        args.push("--json".into());
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = qalloc(&refs);
        let doc = json(&o);
        assert_eq!(doc["schema_version"], 1, "{args:?}");
        assert_eq!(doc["command"], args[0].as_str());
        assert_eq!(doc["ok"], o.status.success(), "{args:?}");
    }
}

#[test]
fn check_src_reports_budget_and_explains() {
    let o = qalloc(&["check-src", &path("borrow.qsrc"), "--explain"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("func : qbit * qbit --1--> qbit * qbit"),
        "{out}"
    );
    assert!(out.contains("main needs 4 qubits"));
    assert!(out.contains("T-Call"));
    let o = qalloc(&["check-src", &path("borrow.qsrc"), "--budget", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("BudgetExceeded"));
}

#[test]
fn alloc_writes_program_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("borrow.qtgt");
    let trace = dir.path().join("trace.json");
    let o = qalloc(&[
        "alloc",
        &path("borrow.qsrc"),
        "--graph",
        &path("paw.graph"),
        "-o",
        out.to_str().unwrap(),
        "--emit-trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let check = qalloc(&[
        "check-tgt",
        out.to_str().unwrap(),
        "--graph",
        &path("paw.graph"),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["schema_version"], 1);
    let events = t["events"].as_array().unwrap();
    let places_x = events
        .iter()
        .any(|e| e["kind"] == "place" && e["source"] == "x" && e["function"].is_null());
    assert!(places_x);
    let calls: Vec<usize> = events
        .iter()
        .filter(|e| e["site"] == "call")
        .map(|e| e["swaps"].as_array().unwrap().len())
        .collect();
    assert_eq!(calls.len(), 2);
    assert_eq!(calls[0], 0);
    assert!(calls[1] >= 1);
}

#[test]
fn simulate_source_lists_branches() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("coin.qsrc");
    std::fs::write(
        &p,
        "main { let x = init() in let y = h(x) in if y then { (y) } else { (y) } }",
    )
    .unwrap();
    let o = qalloc(&["simulate", p.to_str().unwrap(), "--allow-h", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = json(&o);
    let branches = doc["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    let total: f64 = branches.iter().map(|b| b["weight"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(branches[0]["path"], "0");
    let without_h = qalloc(&["simulate", p.to_str().unwrap()]);
    assert_eq!(without_h.status.code(), Some(1));
}

#[test]
fn fuel_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("loop.qsrc");
    std::fs::write(
        &p,
        "fun spin(x) { let x = h(x) in if x then { let (x) = spin(x) in (x) } else { (x) } }
         main { let a = init() in let (a) = spin(a) in (a) }",
    )
    .unwrap();
    let run = |fuel: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qalloc"));
        c.args(["simulate", p.to_str().unwrap(), "--allow-h"])
            .args(extra);
        match fuel {
            Some(f) => c.env("QALLOC_FUEL", f),
            None => c.env_remove("QALLOC_FUEL"),
        };
        c.output().unwrap()
    };
    let starved = run(Some("5"), &[]);
    assert_eq!(starved.status.code(), Some(1));
    assert!(stderr(&starved).contains("FuelExhausted: no result within 5 steps"));
    let flag_wins = run(Some("5"), &["--fuel", "7"]);
    assert!(stderr(&flag_wins).contains("within 7 steps"));
    let bad = run(Some("lots"), &[]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        qalloc(&["check-tgt", &path("bad-cnot.qtgt")]).status.code(),
        Some(2)
    );
    assert_eq!(
        qalloc(&["verify", &path("borrow.qsrc")]).status.code(),
        Some(2)
    );
    assert_eq!(
        qalloc(&["simulate", &path("bad-cnot.qtgt")]).status.code(),
        Some(2)
    );
    assert_eq!(qalloc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qalloc(&["check-src", "/nonexistent/x.qsrc"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qalloc(&["fuzz", "--min-nodes", "9", "--max-nodes", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn parse_errors_point_at_the_token() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.qsrc");
    std::fs::write(&p, "main {\n  let x = init() in\n  discard ; () }\n").unwrap();
    let o = qalloc(&["check-src", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with(&format!("{}:3:11: ", p.display())), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn graph_describes_chain_and_emits_dot() {
    let o = qalloc(&["graph", &path("paw.graph")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("4 nodes, 4 edges"));
    assert!(out.contains("articulation points: q3"));
    let dot = qalloc(&["graph", &path("paw.graph"), "--emit-dot", "--chain", "3"]);
    let text = stdout(&dot);
    assert!(text.starts_with("graph \"G3\" {"));
    assert_eq!(text.matches("filled").count(), 3);
    assert!(text.contains("\"q4\" -- \"q3\"") || text.contains("\"q3\" -- \"q4\""));
}
