use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LAngle,
    RAngle,
    Comma,
    Semi,
    Colon,
    Eq,
    At,
    Tilde,
    Pipe,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::At => "@",
            Tok::Tilde => "~",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into tokens. `//` starts a comment that runs to the end of
/// the line. Identifiers are `[A-Za-z0-9_]+`, optionally prefixed by `%`.
pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '@' => Some(Tok::At),
            '~' => Some(Tok::Tilde),
            '|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = single {
            bump(&mut chars);
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        match c {
            '/' => {
                bump(&mut chars);
                if chars.peek() != Some(&'/') {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        "unexpected `/`",
                        vec!["`//`".into()],
                    ));
                }
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() != Some(&'>') {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        "unexpected `-`",
                        vec!["`->`".into()],
                    ));
                }
                bump(&mut chars);
                out.push(Token {
                    tok: Tok::Arrow,
                    line: tl,
                    col: tc,
                });
            }
            c if c == '%' || is_ident_char(c) => {
                let mut s = String::new();
                if c == '%' {
                    s.push('%');
                    bump(&mut chars);
                }
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                if s == "%" {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        "`%` must start an identifier",
                        vec!["identifier".into()],
                    ));
                }
                out.push(Token {
                    tok: Tok::Ident(s),
                    line: tl,
                    col: tc,
                });
            }
            other => {
                return Err(ParseError::new(
                    tl,
                    tc,
                    format!("unexpected character {other:?}"),
                    Vec::new(),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
