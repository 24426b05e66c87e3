//! Source positions and the tokenizer shared by the metamodel and
//! transformation front-ends.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based line/column position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A half-open source range.
///
/// Spans never take part in structural equality: two AST nodes that differ
/// only by where they were parsed from compare equal.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    /// Smallest span covering both.
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCTS: &[&str] = &[
    "->", "<-", ";", ":", ",", "(", ")", "{", "}", "!", ".", "|", "=",
];

/// Splits `src` into tokens. `comment` starts a comment running to end of line.
pub(crate) fn tokenize(src: &str, comment: &str) -> Result<Vec<Token>, (Pos, String)> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut rest = src;

    // advances over `n` bytes of `rest`, tracking line/col
    fn bump(rest: &mut &str, n: usize, line: &mut u32, col: &mut u32) {
        for ch in rest[..n].chars() {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *rest = &rest[n..];
    }

    while let Some(ch) = rest.chars().next() {
        if ch.is_whitespace() {
            bump(&mut rest, ch.len_utf8(), &mut line, &mut col);
            continue;
        }
        if rest.starts_with(comment) {
            let n = rest.find('\n').unwrap_or(rest.len());
            bump(&mut rest, n, &mut line, &mut col);
            continue;
        }
        let start = Pos::new(line, col);
        if ch.is_ascii_alphabetic() || ch == '_' {
            let n = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            let ident = rest[..n].to_string();
            bump(&mut rest, n, &mut line, &mut col);
            out.push(Token {
                tok: Tok::Ident(ident),
                span: Span::new(start, Pos::new(line, col)),
            });
            continue;
        }
        if ch.is_ascii_digit() {
            let n = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let value = rest[..n]
                .parse::<i64>()
                .map_err(|_| (start, format!("integer literal out of range: {}", &rest[..n])))?;
            bump(&mut rest, n, &mut line, &mut col);
            out.push(Token {
                tok: Tok::Int(value),
                span: Span::new(start, Pos::new(line, col)),
            });
            continue;
        }
        if ch == '\'' {
            let body = &rest[1..];
            let Some(close) = body.find(['\'', '\n']) else {
                return Err((start, "unterminated string literal".into()));
            };
            if body.as_bytes()[close] == b'\n' {
                return Err((start, "unterminated string literal".into()));
            }
            let text = body[..close].to_string();
            bump(&mut rest, close + 2, &mut line, &mut col);
            out.push(Token {
                tok: Tok::Str(text),
                span: Span::new(start, Pos::new(line, col)),
            });
            continue;
        }
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                bump(&mut rest, p.len(), &mut line, &mut col);
                out.push(Token {
                    tok: Tok::Punct(p),
                    span: Span::new(start, Pos::new(line, col)),
                });
            }
            None => return Err((start, format!("unexpected character `{ch}`"))),
        }
    }
    let end = Pos::new(line, col);
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(end, end),
    });
    Ok(out)
}

/// Cursor over a token stream with the usual expect/peek helpers.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.at].span
    }

    /// Span of the most recently consumed token.
    pub fn prev_span(&self) -> Span {
        self.toks[self.at.saturating_sub(1)].span
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn unexpected(&self, expected: &str) -> (Pos, String) {
        (
            self.span().start,
            format!("expected {expected}, found {}", self.peek()),
        )
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<Span, (Pos, String)> {
        if self.is_punct(p) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<Span, (Pos, String)> {
        if self.is_keyword(kw) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, Span), (Pos, String)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.next().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}
