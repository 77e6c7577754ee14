//! Concrete syntax of source programs (`.qsrc`), target programs (`.qtgt`)
//! and coupling graphs (`.graph`).
//!
//! Source:
//!
//! ```text
//! fun f(a, b) {
//!     let t = init() in
//!     let (a, t) = cnot(a, t) in
//!     discard t;
//!     (a, b)
//! }
//!
//! main {
//!     let x = init() in
//!     let y = init() in
//!     let (x, y) = f(x, y) in
//!     (x, y)
//! }
//! ```
//!
//! Target programs replace `let x = init() in` and `discard x;` by
//! `init x;`, add `let (x, y) = swap(a, b) in`, annotate headers as
//! `fun f<a, b | a~b>(x: q(a), y: q(b)) -> (q(a), q(b))` and start `main`
//! with a `qubits: x@q0, y@q1;` preamble. In both languages the right-hand
//! side of a tuple `let` is a `{ … }` block.

mod graph;
mod lexer;
mod parser;
mod printer;

pub use graph::{parse_coupling_graph, print_coupling_graph, to_dot};
pub use parser::{parse_source, parse_target};
pub use printer::{print_source, print_target};

use std::fmt;

/// Words that cannot name variables or functions.
pub const KEYWORDS: &[&str] = &[
    "let", "in", "if", "then", "else", "discard", "fun", "main", "init", "cnot", "swap", "h",
];

/// Expressions nested deeper than this are rejected, which bounds the stack
/// the recursive passes need (see [`crate::PIPELINE_STACK`]).
pub const MAX_NESTING: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(
        line: u32,
        column: u32,
        message: impl Into<String>,
        expected: Vec<String>,
    ) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        match self.expected.as_slice() {
            [] => Ok(()),
            [one] => write!(f, " (expected {one})"),
            many => write!(f, " (expected one of {})", many.join(", ")),
        }
    }
}

impl std::error::Error for ParseError {}

#[cfg(test)]
mod tests {
    use super::*;
    use qalloc_core::names::{Qidx, Var};
    use qalloc_core::source::{Expr, FunDef, Program};
    use qalloc_core::target;

    #[test]
    fn smallest_program() {
        let p = parse_source("main { let x = init() in discard x; () }").unwrap();
        assert_eq!(
            p.entry,
            Expr::init("x", Expr::discard("x", Expr::ret(Vec::<Var>::new())))
        );
        assert!(p.defs.is_empty());
    }

    #[test]
    fn duplicate_use_is_not_a_parse_error() {
        let p = parse_source("main { let x = init() in (x, x) }").unwrap();
        assert_eq!(p.entry, Expr::init("x", Expr::ret(["x", "x"])));
    }

    #[test]
    fn function_and_calls() {
        let text = "
            fun func(a, b) {
                let t = init() in
                let (a, t) = cnot(a, t) in
                let (t, b) = cnot(t, b) in
                discard t;
                (a, b)
            }
            main {
                let x = init() in
                let y = init() in
                let (x, y) = func(x, y) in
                let (y, x) = func(y, x) in
                (x, y)
            }";
        let body = Expr::init(
            "t",
            Expr::cnot(
                ("a", "t"),
                ("a", "t"),
                Expr::cnot(
                    ("t", "b"),
                    ("t", "b"),
                    Expr::discard("t", Expr::ret(["a", "b"])),
                ),
            ),
        );
        let entry = Expr::init(
            "x",
            Expr::init(
                "y",
                Expr::call(
                    ["x", "y"],
                    "func",
                    ["x", "y"],
                    Expr::call(["y", "x"], "func", ["y", "x"], Expr::ret(["x", "y"])),
                ),
            ),
        );
        let expected = Program::new(vec![FunDef::new("func", ["a", "b"], body)], entry);
        let p = parse_source(text).unwrap();
        assert_eq!(p, expected);
        assert_eq!(parse_source(&print_source(&p)).unwrap(), expected);
    }

    #[test]
    fn empty_return_prints_as_unit() {
        let p = Program::new(vec![], Expr::ret(Vec::<Var>::new()));
        assert!(print_source(&p).contains("    ()\n"));
    }

    #[test]
    fn nested_tuple_let_is_bracketed() {
        let inner = Expr::tuple_let(["b"], Expr::init("c", Expr::ret(["c"])), Expr::ret(["b"]));
        let p = Program::new(vec![], Expr::tuple_let(["a"], inner, Expr::ret(["a"])));
        let text = print_source(&p);
        assert_eq!(text.matches('{').count(), 3);
        assert_eq!(parse_source(&text).unwrap(), p);
    }

    #[test]
    fn duplicate_functions_are_rejected() {
        let e = parse_source("fun f() { () } fun f() { () } main { () }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 20));
    }

    #[test]
    fn reserved_prefix_only_in_target() {
        assert!(parse_source("main { let %v0 = init() in (%v0) }").is_err());
        assert!(parse_target("main { qubits: %v0@q0; init %v0; (%v0) }").is_ok());
    }

    #[test]
    fn target_preamble_and_init() {
        let p = parse_target("main { qubits: x@q0; init x; (x) }").unwrap();
        assert_eq!(p.preamble, vec![(Var::from("x"), Qidx::from("q0"))]);
        assert_eq!(p.entry, target::Expr::init("x", target::Expr::ret(["x"])));
    }

    #[test]
    fn target_header() {
        let p = parse_target(
            "fun f<a, b | a~b>(x: q(a), y: q(b)) -> (q(a), q(b)) {
                let (x, y) = cnot(x, y) in (x, y)
            }
            main { () }",
        )
        .unwrap();
        let d = &p.defs[0];
        assert_eq!(d.sig.quantified, vec![Qidx::from("a"), Qidx::from("b")]);
        assert!(d
            .sig
            .constraints
            .contains(&Qidx::from("a"), &Qidx::from("b")));
        assert_eq!(d.sig.constraints.len(), 1);
        assert_eq!(d.sig.params, d.sig.results);
        assert_eq!(parse_target(&print_target(&p)).unwrap(), p);
    }

    #[test]
    fn swap_statement() {
        let p =
            parse_target("main { qubits: x@a, y@b; let (p, q) = swap(x, y) in (p, q) }").unwrap();
        assert_eq!(
            p.entry,
            target::Expr::swap(("p", "q"), ("x", "y"), target::Expr::ret(["p", "q"]))
        );
    }

    #[test]
    fn errors_carry_positions_and_expectations() {
        let e = parse_source("main {\n  let x = init() in\n  discard ; () }").unwrap_err();
        assert_eq!((e.line, e.column), (3, 11));
        assert_eq!(e.expected, vec!["variable".to_string()]);
        let e = parse_source("main { let (a) = cnot(x, y) in (a) }").unwrap_err();
        assert!(e.message.contains("exactly two"));
        assert!(parse_source("main { () } trailing").is_err());
        assert!(parse_source("main { let x = swap() in (x) }").is_err());
    }

    #[test]
    fn nesting_limit() {
        let deep = |n: usize| format!("main {{ {}() {} }}", "{ ".repeat(n), "} ".repeat(n));
        let ok = crate::with_pipeline_stack(|| parse_source(&deep(MAX_NESTING - 1)).is_ok());
        assert!(ok);
        let e = crate::with_pipeline_stack(|| parse_source(&deep(MAX_NESTING + 5))).unwrap_err();
        assert!(e.message.contains("nested"));
    }

    #[test]
    fn qx2_graph() {
        let g = parse_coupling_graph(
            "# IBM QX2\nnodes: q0 q1 q2 q3 q4\nedges: q0-q1 q0-q2 q1-q2 q3-q2 q4-q2 q3-q4\n",
        )
        .unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(parse_coupling_graph(&print_coupling_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_edge_lines_are_unordered_and_undirected() {
        let a = parse_coupling_graph("nodes: q1 q2 q3 q4\nedges: q1-q2 q1-q3\nedges: q2-q3 q4-q3")
            .unwrap();
        let b = parse_coupling_graph(
            "nodes: q1 q2 q3 q4\nedges: q3-q4 q3-q2\nedges: q2-q1 q3-q1 q1-q2",
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 4);
    }

    #[test]
    fn single_node_graph() {
        let g = parse_coupling_graph("nodes: q0\nedges:\n").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn graph_errors() {
        let e = parse_coupling_graph("nodes: a b\nedges: a-c").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        let e = parse_coupling_graph("nodes: a b\nedges: a-a").unwrap_err();
        assert!(e.message.contains("self-loop"));
        let e = parse_coupling_graph("nodes: a b c\nedges: a-b").unwrap_err();
        assert!(e.message.contains("not connected"));
        assert_eq!((e.line, e.column), (1, 12));
        assert!(parse_coupling_graph("edges: a-b").is_err());
        assert!(parse_coupling_graph("nodes:").is_err());
        assert!(parse_coupling_graph("nodes: a\nfoo: b").is_err());
    }
}
