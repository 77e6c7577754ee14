use std::collections::BTreeMap;
use std::fmt::Write;

use qalloc_core::graph::{CouplingGraph, GraphError};
use qalloc_core::names::Qidx;

use super::lexer::is_ident_char;
use super::ParseError;

fn node_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_ident_char)
}

/// Parses a coupling-graph file:
///
/// ```text
/// # IBM QX2
/// nodes: q0 q1 q2 q3 q4
/// edges: q0-q1 q0-q2 q1-q2 q3-q2 q4-q2 q3-q4
/// ```
///
/// `nodes:` comes first and exactly once; `edges:` lines may repeat and
/// their order does not matter. Edge direction is ignored and repeated
/// edges collapse.
pub fn parse_coupling_graph(text: &str) -> Result<CouplingGraph, ParseError> {
    let mut nodes: Vec<(Qidx, u32, u32)> = Vec::new();
    let mut edges: Vec<(Qidx, Qidx, u32, u32)> = Vec::new();
    let mut seen_nodes = false;
    let mut last_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = i as u32 + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = (content.chars().count() - trimmed.chars().count()) as u32;
        let (key, rest, rest_col) = match trimmed.split_once(':') {
            Some((k, r)) => (k.trim_end(), r, indent + k.chars().count() as u32 + 2),
            None => {
                return Err(ParseError::new(
                    line,
                    indent + 1,
                    "expected a `nodes:` or `edges:` line",
                    vec!["`nodes:`".into(), "`edges:`".into()],
                ))
            }
        };
        let mut items = Vec::new();
        let mut cur = String::new();
        let mut start = rest_col;
        for (col, c) in (rest_col..).zip(rest.chars().chain(std::iter::once(' '))) {
            if c.is_whitespace() {
                if !cur.is_empty() {
                    items.push((std::mem::take(&mut cur), start));
                }
            } else {
                if cur.is_empty() {
                    start = col;
                }
                cur.push(c);
            }
        }
        match key {
            "nodes" => {
                if seen_nodes {
                    return Err(ParseError::new(
                        line,
                        indent + 1,
                        "`nodes:` appears twice",
                        Vec::new(),
                    ));
                }
                seen_nodes = true;
                if items.is_empty() {
                    return Err(ParseError::new(
                        line,
                        rest_col,
                        "a graph needs at least one node",
                        vec!["node name".into()],
                    ));
                }
                for (name, c) in items {
                    if !node_name(&name) {
                        return Err(ParseError::new(
                            line,
                            c,
                            format!("`{name}` is not a node name"),
                            vec!["node name".into()],
                        ));
                    }
                    nodes.push((Qidx::from(name), line, c));
                }
            }
            "edges" => {
                if !seen_nodes {
                    return Err(ParseError::new(
                        line,
                        indent + 1,
                        "`edges:` before `nodes:`",
                        vec!["`nodes:`".into()],
                    ));
                }
                for (item, c) in items {
                    let ends = item
                        .split_once('-')
                        .filter(|(a, b)| node_name(a) && node_name(b));
                    let Some((a, b)) = ends else {
                        return Err(ParseError::new(
                            line,
                            c,
                            format!("`{item}` is not an edge"),
                            vec!["<node>-<node>".into()],
                        ));
                    };
                    edges.push((Qidx::from(a), Qidx::from(b), line, c));
                }
            }
            other => {
                return Err(ParseError::new(
                    line,
                    indent + 1,
                    format!("unknown section `{other}`"),
                    vec!["`nodes:`".into(), "`edges:`".into()],
                ))
            }
        }
    }
    if !seen_nodes {
        return Err(ParseError::new(
            last_line,
            1,
            "missing `nodes:` line",
            vec!["`nodes:`".into()],
        ));
    }
    let node_at: BTreeMap<&Qidx, (u32, u32)> =
        nodes.iter().map(|(q, l, c)| (q, (*l, *c))).collect();
    let edge_at = |q: &Qidx| {
        edges
            .iter()
            .find(|(a, b, _, _)| a == q || b == q)
            .map(|(_, _, l, c)| (*l, *c))
    };
    CouplingGraph::new(
        nodes.iter().map(|(q, _, _)| q.clone()),
        edges.iter().map(|(a, b, _, _)| (a.clone(), b.clone())),
    )
    .map_err(|e| {
        let (line, col) = match &e {
            GraphError::DuplicateNode(q) => nodes
                .iter()
                .filter(|(n, _, _)| n == q)
                .nth(1)
                .map(|(_, l, c)| (*l, *c)),
            GraphError::UnknownNode(q) | GraphError::SelfLoop(q) => edge_at(q),
            GraphError::Disconnected(q, _) => node_at.get(q).copied(),
            _ => None,
        }
        .unwrap_or((1, 1));
        ParseError::new(line, col, e.to_string(), Vec::new())
    })
}

/// Renders `g` in the format read by [`parse_coupling_graph`].
pub fn print_coupling_graph(g: &CouplingGraph) -> String {
    let mut out = String::from("nodes:");
    for q in g.nodes() {
        let _ = write!(out, " {q}");
    }
    out.push_str("\nedges:");
    for (a, b) in g.edges().iter() {
        let _ = write!(out, " {a}-{b}");
    }
    out.push('\n');
    out
}

/// Graphviz rendering; nodes in `highlight` are filled.
pub fn to_dot(g: &CouplingGraph, name: &str, highlight: &[Qidx]) -> String {
    let mut out = format!("graph \"{name}\" {{\n");
    for q in g.nodes() {
        if highlight.contains(q) {
            let _ = writeln!(out, "    \"{q}\" [style=filled, fillcolor=lightblue];");
        } else {
            let _ = writeln!(out, "    \"{q}\";");
        }
    }
    for (a, b) in g.edges().iter() {
        let _ = writeln!(out, "    \"{a}\" -- \"{b}\";");
    }
    out.push_str("}\n");
    out
}
