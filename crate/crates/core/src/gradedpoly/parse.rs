//! Recursive-descent parser for polynomial text.
//!
//! Grammar (whitespace insignificant, `^` binds tightest, unary minus allowed):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INT)?
//! primary := INT | IDENT | '(' expr ')'
//! ```
//!
//! `/` is only admitted with a nonzero constant divisor, which also covers
//! rational literals such as `3/2`.

use super::{Polynomial, Rat, WeightedContext};
use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("expected {expected} at byte {offset}")]
    Expected { expected: &'static str, offset: usize },
    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error("divisor at byte {offset} is not a constant")]
    NonConstantDivisor { offset: usize },
    #[error("exponent at byte {offset} is too large")]
    ExponentTooLarge { offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => {
                    self.pos += 1;
                }
                '+' => {
                    self.pos += 1;
                    out.push((Tok::Plus, start));
                }
                '-' => {
                    self.pos += 1;
                    out.push((Tok::Minus, start));
                }
                '*' => {
                    self.pos += 1;
                    out.push((Tok::Star, start));
                }
                '/' => {
                    self.pos += 1;
                    out.push((Tok::Slash, start));
                }
                '^' => {
                    self.pos += 1;
                    out.push((Tok::Caret, start));
                }
                '(' => {
                    self.pos += 1;
                    out.push((Tok::LParen, start));
                }
                ')' => {
                    self.pos += 1;
                    out.push((Tok::RParen, start));
                }
                '0'..='9' => {
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Int(text.parse().unwrap()), start));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Ident(text.to_string()), start));
                }
                _ => return Err(ParseError::UnexpectedChar { ch: c, offset: start }),
            }
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a WeightedContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(_, o)| o)
            .unwrap_or(usize::MAX)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    let offset = self.offset();
                    self.bump();
                    let rhs = self.unary()?;
                    let c = rhs
                        .as_constant()
                        .ok_or(ParseError::NonConstantDivisor { offset })?;
                    if c.is_zero() {
                        return Err(ParseError::DivisionByZero { offset });
                    }
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let offset = self.offset();
            match self.bump() {
                Some((Tok::Int(n), _)) => {
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| ParseError::ExponentTooLarge { offset })?;
                    Ok(base.pow(e))
                }
                Some((_, o)) => Err(ParseError::Expected {
                    expected: "a non-negative integer exponent",
                    offset: o,
                }),
                None => Err(ParseError::UnexpectedEnd),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial, ParseError> {
        match self.bump() {
            Some((Tok::Int(n), _)) => Ok(Polynomial::constant(
                self.ctx.nvars(),
                Rat::from_integer(n),
            )),
            Some((Tok::Ident(name), offset)) => match self.ctx.var_index(&name) {
                Some(i) => Ok(Polynomial::variable(self.ctx.nvars(), i)),
                None => Err(ParseError::UnknownVariable { name, offset }),
            },
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, o)) => Err(ParseError::Expected {
                        expected: "`)`",
                        offset: o,
                    }),
                    None => Err(ParseError::UnexpectedEnd),
                }
            }
            Some((_, o)) => Err(ParseError::Expected {
                expected: "a number, variable or `(`",
                offset: o,
            }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

/// Parses polynomial text into the canonical sparse representation.
pub fn parse_polynomial(source: &str, ctx: &WeightedContext) -> Result<Polynomial, ParseError> {
    let toks = Lexer {
        src: source.as_bytes(),
        pos: 0,
    }
    .tokens()?;
    let mut p = Parser { toks, pos: 0, ctx };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        let (_, o) = p.toks[p.pos];
        return Err(ParseError::Expected {
            expected: "end of input",
            offset: o,
        });
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::super::WeightedContext;
    use super::*;

    fn ctx() -> WeightedContext {
        WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap()
    }

    #[test]
    fn ring_identity() {
        let c = ctx();
        let p = parse_polynomial("(x+y)*(x-y)", &c).unwrap();
        let q = parse_polynomial("x^2 - y^2", &c).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn coefficient_arithmetic() {
        let c = ctx();
        let p = parse_polynomial("3/2*x^2*y - x^2*y/2", &c).unwrap();
        assert_eq!(p, parse_polynomial("x^2*y", &c).unwrap());
    }

    #[test]
    fn unknown_variable() {
        let c = ctx();
        let err = parse_polynomial("x + z", &c).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownVariable {
                name: "z".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn error_offsets_and_misc() {
        let c = ctx();
        assert!(matches!(
            parse_polynomial("x + $", &c),
            Err(ParseError::UnexpectedChar { offset: 4, .. })
        ));
        assert!(matches!(
            parse_polynomial("x / y", &c),
            Err(ParseError::NonConstantDivisor { .. })
        ));
        assert!(matches!(
            parse_polynomial("x / 0", &c),
            Err(ParseError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse_polynomial("x ^", &c),
            Err(ParseError::UnexpectedEnd)
        ));
        // unary minus and parenthesized exponent base
        let p = parse_polynomial("-x^2 + (x+y)^2", &c).unwrap();
        let q = parse_polynomial("2*x*y + y^2", &c).unwrap();
        assert_eq!(p, q);
    }
}
