//! Diagnostics and the JSON documents written by the command line.
//!
//! Every document is an object with a `schema_version` field equal to
//! [`SCHEMA_VERSION`] and a `command` field naming the subcommand.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use qalloc_core::allocation::{SwapSite, TraceEvent};
use qalloc_core::names::{FunName, Span};
use qalloc_core::sim::BranchTrace;

pub const SCHEMA_VERSION: u32 = 1;

/// One message about an input file. Printed as `file:line:col: message`,
/// or `file: message` when the position is unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: Option<u32>,
    pub column: Option<u32>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(file: &str, span: Span, message: impl Into<String>) -> Self {
        let known = span.is_known();
        Diagnostic {
            file: file.to_string(),
            line: known.then_some(span.line),
            column: known.then_some(span.col),
            message: message.into(),
        }
    }

    pub fn at(file: &str, line: u32, column: u32, message: impl Into<String>) -> Self {
        Diagnostic::new(file, Span::new(line, column), message)
    }

    pub fn whole_file(file: &str, message: impl Into<String>) -> Self {
        Diagnostic::new(file, Span::default(), message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.file, self.message),
            _ => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

/// Wraps `body` (an object) with the version and command fields.
pub fn document(command: &str, body: Value) -> Value {
    let mut out = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

fn function_name(f: &Option<FunName>) -> Value {
    match f {
        Some(f) => Value::String(f.to_string()),
        None => Value::Null,
    }
}

fn span_json(s: Span) -> (Value, Value) {
    if s.is_known() {
        (json!(s.line), json!(s.col))
    } else {
        (Value::Null, Value::Null)
    }
}

/// The allocation trace: which target variable stands for which source
/// variable at each program point, and the swaps inserted at each routing
/// site. `function` is `null` for `main`.
pub fn trace_json(events: &[TraceEvent]) -> Value {
    let events: Vec<Value> = events
        .iter()
        .map(|ev| match ev {
            TraceEvent::Place {
                function,
                source,
                target,
                qidx,
                span,
            } => {
                let (line, column) = span_json(*span);
                json!({
                    "kind": "place",
                    "function": function_name(function),
                    "source": source.as_str(),
                    "target": target.as_str(),
                    "qidx": qidx.as_str(),
                    "line": line,
                    "column": column,
                })
            }
            TraceEvent::Swaps {
                function,
                site,
                swaps,
                span,
            } => {
                let (line, column) = span_json(*span);
                let (site, callee) = match site {
                    SwapSite::Cnot => ("cnot", Value::Null),
                    SwapSite::Call(f) => ("call", Value::String(f.to_string())),
                    SwapSite::Return => ("return", Value::Null),
                };
                let swaps: Vec<Value> = swaps
                    .iter()
                    .map(|(a, b)| json!([a.as_str(), b.as_str()]))
                    .collect();
                json!({
                    "kind": "swaps",
                    "function": function_name(function),
                    "site": site,
                    "callee": callee,
                    "swaps": swaps,
                    "line": line,
                    "column": column,
                })
            }
        })
        .collect();
    document("alloc-trace", json!({ "events": events }))
}

/// A finished branch: the measurement outcomes (`"1"` is the then-branch,
/// `""` when nothing was measured), its weight, the returned wires and the
/// terminal density matrix, row-major, with `labels[i]` the wire of bit
/// `n - 1 - i` of a basis index.
pub fn branch_json(b: &BranchTrace) -> Value {
    let path: String = b.path.iter().map(|&x| if x { '1' } else { '0' }).collect();
    let dim = b.state.dim();
    let rows = |imag: bool| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let c = b.state.get(i, j);
                        if imag {
                            c.im
                        } else {
                            c.re
                        }
                    })
                    .collect()
            })
            .collect()
    };
    json!({
        "path": path,
        "weight": b.weight(),
        "steps": b.steps,
        "values": b.values.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
        "labels": b.state.labels().iter().map(|v| v.as_str()).collect::<Vec<_>>(),
        "real": rows(false),
        "imag": rows(true),
    })
}
