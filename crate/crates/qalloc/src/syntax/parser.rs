use std::collections::BTreeSet;

use qalloc_core::names::{FunName, Qidx, Span, Var};
use qalloc_core::types::{ConstraintSet, TargetFunType};
use qalloc_core::{source, target};

use super::lexer::{lex, Tok, Token};
use super::{ParseError, KEYWORDS, MAX_NESTING};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Lang {
    Source,
    Target,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    lang: Lang,
}

/// The two expression languages differ only in their leaves, so one
/// parser builds both through this trait.
trait Build: Sized {
    fn ret(vs: Vec<Var>, sp: Span) -> Self;
    fn cnot(outs: (Var, Var), ins: (Var, Var), body: Self, sp: Span) -> Self;
    fn h(out: Var, input: Var, body: Self, sp: Span) -> Self;
    fn call(outs: Vec<Var>, f: FunName, args: Vec<Var>, body: Self, sp: Span) -> Self;
    fn tuple_let(outs: Vec<Var>, rhs: Self, body: Self, sp: Span) -> Self;
    fn if_(c: Var, t: Self, e: Self, sp: Span) -> Self;
    /// `let x = init() in e` (source) or `init x; e` (target)
    fn init(x: Var, body: Self, sp: Span) -> Option<Self>;
    fn discard(x: Var, body: Self, sp: Span) -> Option<Self>;
    fn swap(outs: (Var, Var), ins: (Var, Var), body: Self, sp: Span) -> Option<Self>;
}

impl Build for source::Expr {
    fn ret(vs: Vec<Var>, sp: Span) -> Self {
        source::Expr::ret(vs).with_span(sp)
    }
    fn cnot(outs: (Var, Var), ins: (Var, Var), body: Self, sp: Span) -> Self {
        source::Expr::cnot(outs, ins, body).with_span(sp)
    }
    fn h(out: Var, input: Var, body: Self, sp: Span) -> Self {
        source::Expr::h(out, input, body).with_span(sp)
    }
    fn call(outs: Vec<Var>, f: FunName, args: Vec<Var>, body: Self, sp: Span) -> Self {
        source::Expr::call(outs, f, args, body).with_span(sp)
    }
    fn tuple_let(outs: Vec<Var>, rhs: Self, body: Self, sp: Span) -> Self {
        source::Expr::tuple_let(outs, rhs, body).with_span(sp)
    }
    fn if_(c: Var, t: Self, e: Self, sp: Span) -> Self {
        source::Expr::if_(c, t, e).with_span(sp)
    }
    fn init(x: Var, body: Self, sp: Span) -> Option<Self> {
        Some(source::Expr::init(x, body).with_span(sp))
    }
    fn discard(x: Var, body: Self, sp: Span) -> Option<Self> {
        Some(source::Expr::discard(x, body).with_span(sp))
    }
    fn swap(_: (Var, Var), _: (Var, Var), _: Self, _: Span) -> Option<Self> {
        None
    }
}

impl Build for target::Expr {
    fn ret(vs: Vec<Var>, sp: Span) -> Self {
        target::Expr::ret(vs).with_span(sp)
    }
    fn cnot(outs: (Var, Var), ins: (Var, Var), body: Self, sp: Span) -> Self {
        target::Expr::cnot(outs, ins, body).with_span(sp)
    }
    fn h(out: Var, input: Var, body: Self, sp: Span) -> Self {
        target::Expr::h(out, input, body).with_span(sp)
    }
    fn call(outs: Vec<Var>, f: FunName, args: Vec<Var>, body: Self, sp: Span) -> Self {
        target::Expr::call(outs, f, args, body).with_span(sp)
    }
    fn tuple_let(outs: Vec<Var>, rhs: Self, body: Self, sp: Span) -> Self {
        target::Expr::tuple_let(outs, rhs, body).with_span(sp)
    }
    fn if_(c: Var, t: Self, e: Self, sp: Span) -> Self {
        target::Expr::if_(c, t, e).with_span(sp)
    }
    fn init(x: Var, body: Self, sp: Span) -> Option<Self> {
        Some(target::Expr::init(x, body).with_span(sp))
    }
    fn discard(_: Var, _: Self, _: Span) -> Option<Self> {
        None
    }
    fn swap(outs: (Var, Var), ins: (Var, Var), body: Self, sp: Span) -> Option<Self> {
        Some(target::Expr::swap(outs, ins, body).with_span(sp))
    }
}

impl Parser {
    fn new(text: &str, lang: Lang) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            depth: 0,
            lang,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        let t = self.peek();
        Span::new(t.line, t.col)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::new(
            t.line,
            t.col,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error_here(
            format!("unexpected {}", self.peek().tok.describe()),
            expected,
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{}`", tok.symbol())]))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    fn raw_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    /// A variable or function name: not a keyword, not starting with a
    /// digit, and `%`-prefixed only in the target language.
    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        let (line, col) = (self.peek().line, self.peek().col);
        let s = self.raw_ident(what)?;
        let bad = |msg: String| ParseError::new(line, col, msg, vec![what.to_string()]);
        if KEYWORDS.contains(&s.as_str()) {
            return Err(bad(format!("`{s}` is a keyword")));
        }
        let body = s.strip_prefix('%').unwrap_or(&s);
        if body.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(bad(format!("`{s}` starts with a digit")));
        }
        if s.starts_with('%') && self.lang == Lang::Source {
            return Err(bad(format!(
                "`{s}`: the `%` prefix is reserved for generated names"
            )));
        }
        Ok(s)
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        self.name("variable").map(Var::from)
    }

    fn qidx(&mut self) -> Result<Qidx, ParseError> {
        self.raw_ident("qubit index").map(Qidx::from)
    }

    /// `a, b, c` (possibly empty) up to `close`, which is consumed.
    fn list<T>(
        &mut self,
        close: Tok,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        if self.peek().tok == close {
            self.advance();
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else if self.peek().tok == close {
                self.advance();
                return Ok(out);
            } else {
                let c = format!("`{}`", close.symbol());
                return Err(self.unexpected(&["`,`", &c]));
            }
        }
    }

    fn var_tuple(&mut self) -> Result<Vec<Var>, ParseError> {
        self.expect(Tok::LParen)?;
        self.list(Tok::RParen, Self::var)
    }

    fn pair(&mut self) -> Result<(Var, Var), ParseError> {
        self.expect(Tok::LParen)?;
        let a = self.var()?;
        self.expect(Tok::Comma)?;
        let b = self.var()?;
        self.expect(Tok::RParen)?;
        Ok((a, b))
    }

    fn block<E: Build>(&mut self) -> Result<E, ParseError> {
        self.expect(Tok::LBrace)?;
        let e = self.expr()?;
        self.expect(Tok::RBrace)?;
        Ok(e)
    }

    fn expr<E: Build>(&mut self) -> Result<E, ParseError> {
        if self.depth >= MAX_NESTING {
            return Err(self.error_here(
                format!("expression nested more than {MAX_NESTING} levels deep"),
                &[],
            ));
        }
        self.depth += 1;
        let e = self.expr_inner();
        self.depth -= 1;
        e
    }

    fn expr_inner<E: Build>(&mut self) -> Result<E, ParseError> {
        let sp = self.span();
        let starts: &[&str] = match self.lang {
            Lang::Source => &["`(`", "`{`", "`let`", "`discard`", "`if`"],
            Lang::Target => &["`(`", "`{`", "`let`", "`init`", "`if`"],
        };
        match self.peek().tok.clone() {
            Tok::LParen => {
                let vs = self.var_tuple()?;
                Ok(E::ret(vs, sp))
            }
            Tok::LBrace => self.block(),
            Tok::Ident(kw) => match kw.as_str() {
                "if" => {
                    self.advance();
                    let c = self.var()?;
                    self.keyword("then")?;
                    let t = self.block()?;
                    self.keyword("else")?;
                    let e = self.block()?;
                    Ok(E::if_(c, t, e, sp))
                }
                "discard" if self.lang == Lang::Source => {
                    self.advance();
                    let x = self.var()?;
                    self.expect(Tok::Semi)?;
                    let body = self.expr()?;
                    Ok(E::discard(x, body, sp).expect("source has discard"))
                }
                "init" if self.lang == Lang::Target => {
                    self.advance();
                    let x = self.var()?;
                    self.expect(Tok::Semi)?;
                    let body = self.expr()?;
                    Ok(E::init(x, body, sp).expect("target has init"))
                }
                "let" => {
                    self.advance();
                    self.let_rest(sp)
                }
                _ => Err(self.unexpected(starts)),
            },
            _ => Err(self.unexpected(starts)),
        }
    }

    fn let_rest<E: Build>(&mut self, sp: Span) -> Result<E, ParseError> {
        if self.peek().tok != Tok::LParen {
            // let x = init() in e | let y = h(x) in e
            let x = self.var()?;
            self.expect(Tok::Eq)?;
            if self.lang == Lang::Source && self.at_keyword("init") {
                self.advance();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                self.keyword("in")?;
                let body = self.expr()?;
                return Ok(E::init(x, body, sp).expect("source has init"));
            }
            if self.at_keyword("h") {
                self.advance();
                self.expect(Tok::LParen)?;
                let y = self.var()?;
                self.expect(Tok::RParen)?;
                self.keyword("in")?;
                let body = self.expr()?;
                return Ok(E::h(x, y, body, sp));
            }
            return Err(match self.lang {
                Lang::Source => self.unexpected(&["`init`", "`h`"]),
                Lang::Target => self.unexpected(&["`h`"]),
            });
        }
        let outs_at = self.span();
        let outs = self.var_tuple()?;
        self.expect(Tok::Eq)?;
        let head = match (&self.peek().tok, self.peek_at(1)) {
            (Tok::Ident(s), Tok::LParen) => Some(s.clone()),
            _ => None,
        };
        let Some(head) = head else {
            let rhs = self.expr()?;
            self.keyword("in")?;
            let body = self.expr()?;
            return Ok(E::tuple_let(outs, rhs, body, sp));
        };
        let two = |outs: &[Var]| -> Result<(Var, Var), ParseError> {
            match outs {
                [a, b] => Ok((a.clone(), b.clone())),
                _ => Err(ParseError::new(
                    outs_at.line,
                    outs_at.col,
                    format!("`{head}` binds exactly two variables"),
                    Vec::new(),
                )),
            }
        };
        match head.as_str() {
            "cnot" => {
                let outs = two(&outs)?;
                self.advance();
                let ins = self.pair()?;
                self.keyword("in")?;
                let body = self.expr()?;
                Ok(E::cnot(outs, ins, body, sp))
            }
            "swap" if self.lang == Lang::Target => {
                let outs = two(&outs)?;
                self.advance();
                let ins = self.pair()?;
                self.keyword("in")?;
                let body = self.expr()?;
                Ok(E::swap(outs, ins, body, sp).expect("target has swap"))
            }
            _ => {
                let f = FunName::from(self.name("function name")?);
                let args = self.var_tuple()?;
                self.keyword("in")?;
                let body = self.expr()?;
                Ok(E::call(outs, f, args, body, sp))
            }
        }
    }

    fn fun_name(&mut self, seen: &mut BTreeSet<FunName>) -> Result<(FunName, Span), ParseError> {
        let sp = self.span();
        let name = FunName::from(self.name("function name")?);
        if !seen.insert(name.clone()) {
            return Err(ParseError::new(
                sp.line,
                sp.col,
                format!("function `{name}` is defined twice"),
                Vec::new(),
            ));
        }
        Ok((name, sp))
    }

    fn source_program(&mut self) -> Result<source::Program, ParseError> {
        let mut defs = Vec::new();
        let mut seen = BTreeSet::new();
        while self.at_keyword("fun") {
            self.advance();
            let (name, sp) = self.fun_name(&mut seen)?;
            let params = self.var_tuple()?;
            let body = self.block()?;
            let mut d = source::FunDef::new(name, params, body);
            d.span = sp;
            defs.push(d);
        }
        if !self.at_keyword("main") {
            return Err(self.unexpected(&["`fun`", "`main`"]));
        }
        self.advance();
        let entry = self.block()?;
        self.expect(Tok::Eof)?;
        Ok(source::Program::new(defs, entry))
    }

    fn qtype(&mut self) -> Result<Qidx, ParseError> {
        self.keyword("q")?;
        self.expect(Tok::LParen)?;
        let a = self.qidx()?;
        self.expect(Tok::RParen)?;
        Ok(a)
    }

    /// `<a, b | a~b>`
    fn quantifiers(&mut self) -> Result<(Vec<Qidx>, ConstraintSet), ParseError> {
        self.expect(Tok::LAngle)?;
        let mut quantified = Vec::new();
        while let Tok::Ident(_) = self.peek().tok {
            quantified.push(self.qidx()?);
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        let mut phi = ConstraintSet::new();
        if self.peek().tok == Tok::Pipe {
            self.advance();
            let pairs = self.list(Tok::RAngle, |p| {
                let sp = p.span();
                let a = p.qidx()?;
                p.expect(Tok::Tilde)?;
                let b = p.qidx()?;
                Ok((sp, a, b))
            })?;
            for (sp, a, b) in pairs {
                phi.insert(a.clone(), b).map_err(|_| {
                    ParseError::new(
                        sp.line,
                        sp.col,
                        format!("constraint `{a}~{a}` is a self-loop"),
                        Vec::new(),
                    )
                })?;
            }
        } else {
            self.expect(Tok::RAngle)
                .map_err(|_| self.unexpected(&["`,`", "`|`", "`>`"]))?;
        }
        Ok((quantified, phi))
    }

    fn target_program(&mut self) -> Result<target::Program, ParseError> {
        let mut defs = Vec::new();
        let mut seen = BTreeSet::new();
        while self.at_keyword("fun") {
            self.advance();
            let (name, sp) = self.fun_name(&mut seen)?;
            let (quantified, constraints) = self.quantifiers()?;
            self.expect(Tok::LParen)?;
            let typed = self.list(Tok::RParen, |p| {
                let x = p.var()?;
                p.expect(Tok::Colon)?;
                Ok((x, p.qtype()?))
            })?;
            self.expect(Tok::Arrow)?;
            self.expect(Tok::LParen)?;
            let results = self.list(Tok::RParen, Self::qtype)?;
            let body = self.block()?;
            let (params, ptypes): (Vec<Var>, Vec<Qidx>) = typed.into_iter().unzip();
            defs.push(target::FunDef {
                name,
                sig: TargetFunType {
                    quantified,
                    constraints,
                    params: ptypes,
                    results,
                },
                params,
                body,
                span: sp,
            });
        }
        if !self.at_keyword("main") {
            return Err(self.unexpected(&["`fun`", "`main`"]));
        }
        self.advance();
        self.expect(Tok::LBrace)?;
        let mut preamble = Vec::new();
        if self.at_keyword("qubits") && *self.peek_at(1) == Tok::Colon {
            self.advance();
            self.advance();
            if self.peek().tok != Tok::Semi {
                loop {
                    let x = self.var()?;
                    self.expect(Tok::At)?;
                    preamble.push((x, self.qidx()?));
                    match self.peek().tok {
                        Tok::Comma => {
                            self.advance();
                        }
                        Tok::Semi => break,
                        _ => return Err(self.unexpected(&["`,`", "`;`"])),
                    }
                }
            }
            self.expect(Tok::Semi)?;
        }
        let entry = self.expr()?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Eof)?;
        Ok(target::Program {
            defs,
            preamble,
            entry,
        })
    }
}

/// Parses a source program.
pub fn parse_source(text: &str) -> Result<source::Program, ParseError> {
    Parser::new(text, Lang::Source)?.source_program()
}

/// Parses a target program, including the `qubits:` preamble of `main`.
pub fn parse_target(text: &str) -> Result<target::Program, ParseError> {
    Parser::new(text, Lang::Target)?.target_program()
}
