use std::fmt::{Display, Write};

use qalloc_core::names::{Qidx, Var};
use qalloc_core::types::TargetFunType;
use qalloc_core::{source, target};

const INDENT: &str = "    ";

struct Out {
    buf: String,
}

impl Out {
    fn newline(&mut self, level: usize) {
        self.buf.push('\n');
        for _ in 0..level {
            self.buf.push_str(INDENT);
        }
    }

    fn tuple<T: Display>(&mut self, items: &[T]) {
        self.buf.push('(');
        for (i, v) in items.iter().enumerate() {
            if i > 0 {
                self.buf.push_str(", ");
            }
            let _ = write!(self.buf, "{v}");
        }
        self.buf.push(')');
    }

    fn src(&mut self, e: &source::Expr, level: usize) {
        use source::ExprKind as K;
        match &e.kind {
            K::Return(vs) => self.tuple(vs),
            K::InitLet { bound, body } => {
                let _ = write!(self.buf, "let {bound} = init() in");
                self.newline(level);
                self.src(body, level);
            }
            K::Discard { var, body } => {
                let _ = write!(self.buf, "discard {var};");
                self.newline(level);
                self.src(body, level);
            }
            K::CnotLet { outs, ins, body } => {
                self.gate("cnot", outs, ins);
                self.newline(level);
                self.src(body, level);
            }
            K::HLet { out, input, body } => {
                let _ = write!(self.buf, "let {out} = h({input}) in");
                self.newline(level);
                self.src(body, level);
            }
            K::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                self.call(outs, fname, args);
                self.newline(level);
                self.src(body, level);
            }
            K::TupleLet { outs, rhs, body } => {
                self.buf.push_str("let ");
                self.tuple(outs);
                self.buf.push_str(" = {");
                self.newline(level + 1);
                self.src(rhs, level + 1);
                self.newline(level);
                self.buf.push_str("} in");
                self.newline(level);
                self.src(body, level);
            }
            K::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = write!(self.buf, "if {cond} then {{");
                self.newline(level + 1);
                self.src(then_branch, level + 1);
                self.newline(level);
                self.buf.push_str("} else {");
                self.newline(level + 1);
                self.src(else_branch, level + 1);
                self.newline(level);
                self.buf.push('}');
            }
        }
    }

    fn tgt(&mut self, e: &target::Expr, level: usize) {
        use target::ExprKind as K;
        match &e.kind {
            K::Return(vs) => self.tuple(vs),
            K::Init { var, body } => {
                let _ = write!(self.buf, "init {var};");
                self.newline(level);
                self.tgt(body, level);
            }
            K::SwapLet { outs, ins, body } => {
                self.gate("swap", outs, ins);
                self.newline(level);
                self.tgt(body, level);
            }
            K::CnotLet { outs, ins, body } => {
                self.gate("cnot", outs, ins);
                self.newline(level);
                self.tgt(body, level);
            }
            K::HLet { out, input, body } => {
                let _ = write!(self.buf, "let {out} = h({input}) in");
                self.newline(level);
                self.tgt(body, level);
            }
            K::CallLet {
                outs,
                fname,
                args,
                body,
            } => {
                self.call(outs, fname, args);
                self.newline(level);
                self.tgt(body, level);
            }
            K::TupleLet { outs, rhs, body } => {
                self.buf.push_str("let ");
                self.tuple(outs);
                self.buf.push_str(" = {");
                self.newline(level + 1);
                self.tgt(rhs, level + 1);
                self.newline(level);
                self.buf.push_str("} in");
                self.newline(level);
                self.tgt(body, level);
            }
            K::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = write!(self.buf, "if {cond} then {{");
                self.newline(level + 1);
                self.tgt(then_branch, level + 1);
                self.newline(level);
                self.buf.push_str("} else {");
                self.newline(level + 1);
                self.tgt(else_branch, level + 1);
                self.newline(level);
                self.buf.push('}');
            }
        }
    }

    fn gate(&mut self, name: &str, outs: &(Var, Var), ins: &(Var, Var)) {
        let _ = write!(
            self.buf,
            "let ({}, {}) = {name}({}, {}) in",
            outs.0, outs.1, ins.0, ins.1
        );
    }

    fn call(&mut self, outs: &[Var], fname: &impl Display, args: &[Var]) {
        self.buf.push_str("let ");
        self.tuple(outs);
        let _ = write!(self.buf, " = {fname}");
        self.tuple(args);
        self.buf.push_str(" in");
    }

    fn header(&mut self, d: &target::FunDef) {
        let TargetFunType {
            quantified,
            constraints,
            params,
            results,
        } = &d.sig;
        let _ = write!(self.buf, "fun {}<", d.name);
        for (i, a) in quantified.iter().enumerate() {
            if i > 0 {
                self.buf.push_str(", ");
            }
            let _ = write!(self.buf, "{a}");
        }
        if !constraints.is_empty() {
            self.buf.push_str(" | ");
            for (i, (a, b)) in constraints.iter().enumerate() {
                if i > 0 {
                    self.buf.push_str(", ");
                }
                let _ = write!(self.buf, "{a}~{b}");
            }
        }
        self.buf.push_str(">(");
        for (i, x) in d.params.iter().enumerate() {
            if i > 0 {
                self.buf.push_str(", ");
            }
            match params.get(i) {
                Some(a) => {
                    let _ = write!(self.buf, "{x}: q({a})");
                }
                None => {
                    let _ = write!(self.buf, "{x}: q(?)");
                }
            }
        }
        self.buf.push_str(") -> ");
        let qs: Vec<String> = results.iter().map(|a: &Qidx| format!("q({a})")).collect();
        self.tuple(&qs);
        self.buf.push_str(" {");
    }
}

/// Renders a source program; `parse_source` reads it back to an equal AST.
pub fn print_source(p: &source::Program) -> String {
    let mut out = Out { buf: String::new() };
    for d in &p.defs {
        let _ = write!(out.buf, "fun {}", d.name);
        out.tuple(&d.params);
        out.buf.push_str(" {");
        out.newline(1);
        out.src(&d.body, 1);
        out.buf.push_str("\n}\n\n");
    }
    out.buf.push_str("main {");
    out.newline(1);
    out.src(&p.entry, 1);
    out.buf.push_str("\n}\n");
    out.buf
}

/// Renders a target program; `parse_target` reads it back to an equal AST.
/// A signature with fewer parameter types than parameters cannot be
/// written faithfully and prints `q(?)`, which does not parse.
pub fn print_target(p: &target::Program) -> String {
    let mut out = Out { buf: String::new() };
    for d in &p.defs {
        out.header(d);
        out.newline(1);
        out.tgt(&d.body, 1);
        out.buf.push_str("\n}\n\n");
    }
    out.buf.push_str("main {");
    out.newline(1);
    if !p.preamble.is_empty() {
        out.buf.push_str("qubits: ");
        for (i, (x, q)) in p.preamble.iter().enumerate() {
            if i > 0 {
                out.buf.push_str(", ");
            }
            let _ = write!(out.buf, "{x}@{q}");
        }
        out.buf.push(';');
        out.newline(1);
    }
    out.tgt(&p.entry, 1);
    out.buf.push_str("\n}\n");
    out.buf
}
