use std::fmt;

use crate::error::{Error, Result};
use crate::matfun::ScalarFunction;

/// Integrand expression over inner functions `g1`…`g9`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// `gᵢ`, stored as `i` in `1..=9`.
    Inner(u8),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Apply(ScalarFunction, Box<Expr>),
}

impl Expr {
    pub fn inner(i: u8) -> Self {
        Expr::Inner(i)
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn apply(f: ScalarFunction, a: Expr) -> Self {
        Expr::Apply(f, Box::new(a))
    }

    /// Inner-function indices in order of first appearance.
    pub fn symbols(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<u8>) {
        match self {
            Expr::Const(_) => {}
            Expr::Inner(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Expr::Add(a, b) | Expr::Mul(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Expr::Neg(a) | Expr::Apply(_, a) => a.collect_symbols(out),
        }
    }

    fn is_sum(&self) -> bool {
        matches!(self, Expr::Add(..))
    }

    fn fmt_factor(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Add(..) | Expr::Mul(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Inner(i) => write!(f, "g{i}"),
            Expr::Add(a, b) => {
                write!(f, "{a}")?;
                match b.as_ref() {
                    Expr::Neg(inner) if !inner.is_sum() => write!(f, " - {inner}"),
                    Expr::Neg(inner) => write!(f, " - ({inner})"),
                    Expr::Add(..) => write!(f, " + ({b})"),
                    _ => write!(f, " + {b}"),
                }
            }
            Expr::Mul(a, b) => {
                if a.is_sum() {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str(" * ")?;
                b.fmt_factor(f)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_factor(f)
            }
            Expr::Apply(func, a) => write!(f, "{func}({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Comma,
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => toks.push((Tok::Plus, i)),
            b'-' => toks.push((Tok::Minus, i)),
            b'*' => toks.push((Tok::Star, i)),
            b'(' => toks.push((Tok::LParen, i)),
            b')' => toks.push((Tok::RParen, i)),
            b',' => toks.push((Tok::Comma, i)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                    pos: start,
                    message: format!("malformed number `{text}`"),
                })?;
                toks.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                // `.` is kept so that `pow2.5` is a single identifier
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().expect("in bounds");
                return Err(Error::Syntax {
                    pos: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    toks.push((Tok::End, src.len()));
    Ok(toks)
}

fn inner_index(name: &str) -> Option<u8> {
    let rest = name.strip_prefix('g')?;
    match rest.as_bytes() {
        [d @ b'1'..=b'9'] => Some(d - b'0'),
        _ => None,
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Error {
        Error::Syntax {
            pos: self.pos(),
            message: format!("expected {wanted}, found {}", describe(self.peek())),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::add(lhs, Expr::neg(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::mul(lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Const(x))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::neg(self.factor()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.pos();
                self.bump();
                if let Some(i) = inner_index(&name) {
                    return Ok(Expr::Inner(i));
                }
                let f = ScalarFunction::from_name(&name).ok_or_else(|| Error::UnknownIdentifier { name: name.clone(), pos })?;
                if *self.peek() != Tok::LParen {
                    return Err(self.unexpected(&format!("`(` after `{name}`")));
                }
                self.bump();
                if *self.peek() == Tok::RParen {
                    return Err(Error::Arity { name, pos });
                }
                let arg = self.expr()?;
                if *self.peek() == Tok::Comma {
                    return Err(Error::Arity { name, pos });
                }
                self.close()?;
                Ok(Expr::apply(f, arg))
            }
            _ => Err(self.unexpected("a number, identifier, `(` or `-`")),
        }
    }

    fn close(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parse an integrand expression.
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := factor ('*' factor)*
/// factor := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '-' factor
/// ```
pub fn parse(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    if *p.peek() == Tok::End {
        return Err(Error::Syntax {
            pos: 0,
            message: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}
