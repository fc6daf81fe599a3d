//! Recursive-descent parser for the field expression grammar:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)*
//! exponent:= ['+' | '-'] integer | '(' ['+' | '-'] integer ')'
//! primary := number | variable | func '(' sum ')' | '(' sum ')'
//! ```

use super::ast::{BinOp, Expr, UnaryOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool), // value, written as a plain integer literal
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'/' => out.push((Tok::Slash, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b'0'..=b'9' | b'.' => {
                let mut integer = true;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    if bytes[i] == b'.' {
                        integer = false;
                    }
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integer = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                out.push((Tok::Num(v, integer), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Maps an identifier to a 1-based variable index.
type Resolver<'a> = dyn Fn(&str, usize) -> Option<Result<usize>> + 'a;

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    resolve: &'a Resolver<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.bump() {
            Some((t, _)) if t == want => Ok(()),
            Some((_, o)) => Err(syntax(o, format!("expected {what}"))),
            None => Err(syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            // a negated literal becomes a negative constant, as the printer writes it
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let n = self.exponent()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        let sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        let n = match self.bump() {
            Some((Tok::Num(v, _), o)) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    return Err(syntax(o, "exponent must be an integer"));
                }
                sign * v as i32
            }
            Some((_, o)) => return Err(syntax(o, "exponent must be an integer literal")),
            None => return Err(syntax(self.end, "missing exponent")),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(n)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Some((Tok::Num(v, _), _)) => Ok(Expr::Const(v)),
            Some((Tok::LParen, _)) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((Tok::Ident(name), o)) => {
                if let Some(op) = UnaryOp::from_name(&name) {
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                match (self.resolve)(&name, o) {
                    Some(Ok(i)) => Ok(Expr::Var(i)),
                    Some(Err(e)) => Err(e),
                    None => Err(Error::UnknownIdentifier { name, offset: o }),
                }
            }
            Some((t, o)) => Err(syntax(o, format!("unexpected token {t:?}"))),
            None => Err(syntax(self.end, "unexpected end of input")),
        }
    }
}

fn parse_with(source: &str, resolve: &Resolver<'_>) -> Result<Expr> {
    let toks = lex(source)?;
    if toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: source.len(),
        resolve,
    };
    let e = p.sum()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.offset(), "trailing input"));
    }
    Ok(e)
}

/// Parse a chart field; variables are `x1 .. x{dim}`.
pub fn parse_expr(source: &str, dim: usize) -> Result<Expr> {
    parse_with(source, &|name, offset| {
        let digits = name.strip_prefix('x')?;
        let index: usize = digits.parse().ok()?;
        if index == 0 || index > dim {
            return Some(Err(Error::VariableOutOfRange { index, dim, offset }));
        }
        Some(Ok(index))
    })
}

/// Parse a function of the single variable `s` (used for custom phi).
pub fn parse_phi_expr(source: &str) -> Result<Expr> {
    parse_with(source, &|name, _| (name == "s").then_some(Ok(1)))
}
