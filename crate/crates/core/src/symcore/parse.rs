//! Infix text form of expressions: `+ - * / ^`, the functions
//! `sin cos exp ln sqrt`, identifiers `[A-Za-z_][A-Za-z0-9_]*`, integer
//! literals (exact) and decimal literals (floating point).

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use super::expr::{Expr, Func, Node, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i128),
    Float(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            let mut is_float = false;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                is_float = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    is_float = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("bad number `{text}`"),
                })?)
            } else {
                Tok::Int(text.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("integer literal `{text}` out of range"),
                })?)
            };
            out.push((start, tok));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else {
            return Err(ParseError { offset: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            terms.push(if c == '-' { Expr::raw_mul(vec![Expr::int(-1), t]) } else { t });
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::raw_add(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let f = self.unary()?;
            factors.push(if c == '/' { Expr::raw_pow(f, -Rational::one()) } else { f });
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::raw_mul(factors) })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::raw_mul(vec![Expr::int(-1), self.unary()?]))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            let exponent = self.unary()?.simplify();
            return match exponent.as_rational() {
                Some(r) => Ok(Expr::raw_pow(base, r)),
                None => Err(ParseError {
                    offset: at,
                    message: format!("exponent must be a rational constant, got `{exponent}`"),
                }),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Int(n) => Ok(Expr::from_rational(Rational::from_integer(n))),
            Tok::Float(x) => Ok(Expr::float(x)),
            Tok::Ident(name) => {
                if let (Some(f), Some(Tok::LParen)) = (Func::from_name(&name), self.peek()) {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::raw_func(f, arg))
                } else {
                    Ok(Expr::sym(&name))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Op(c) => {
                self.pos -= 1;
                self.err(format!("unexpected operator `{c}`"))
            }
            Tok::RParen => {
                self.pos -= 1;
                self.err("unexpected `)`")
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected `)`"),
        }
    }
}

/// Parse infix text into a canonical expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, len: src.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e.simplify())
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_float(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x:?}")
}

/// Whether `e` prints as a single token that can take a `^` or sit in a
/// product without parentheses.
fn is_atomic(e: &Expr) -> bool {
    match e.node() {
        Node::Sym(_) | Node::Func(..) => true,
        Node::Num(r) => r.is_integer() && !r.is_negative(),
        Node::Float(x) => *x >= 0.0 && !format!("{x:?}").contains('e'),
        _ => false,
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Add(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() && !r.is_negative() {
        write_rational(f, r)
    } else {
        f.write_str("(")?;
        write_rational(f, r)?;
        f.write_str(")")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(r) => write_rational(f, r),
            Node::Float(x) => write_float(f, *x),
            Node::Sym(s) => f.write_str(s),
            Node::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{t}")?;
                    } else if t.is_negative() {
                        write!(f, " - {}", -t)?;
                    } else {
                        write!(f, " + {t}")?;
                    }
                }
                Ok(())
            }
            Node::Mul(fs) => {
                let mut rest: &[Expr] = fs;
                if fs[0].is_constant() {
                    rest = &fs[1..];
                    let minus_one = fs[0].as_rational().is_some_and(|r| r == -Rational::one());
                    if minus_one {
                        f.write_str("-")?;
                    } else {
                        write!(f, "{}", fs[0])?;
                        if !rest.is_empty() {
                            f.write_str("*")?;
                        }
                    }
                }
                for (i, x) in rest.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write_factor(f, x)?;
                }
                Ok(())
            }
            Node::Pow(b, e) => {
                if is_atomic(b) {
                    write!(f, "{b}")?;
                } else {
                    write!(f, "({b})")?;
                }
                f.write_str("^")?;
                write_exponent(f, e)
            }
            Node::Func(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse("-x^2 + 2*x*y - y/2").unwrap();
        assert_eq!(e.to_string(), "-1/2*y - x^2 + 2*x*y");
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn negative_and_fractional_exponents() {
        let e = parse("q^-1 + sqrt(q)").unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e);
        assert!(e.to_string().contains("q^(-1)"));
        assert!(e.to_string().contains("q^(1/2)"));
    }

    #[test]
    fn float_literals() {
        let e = parse("1e-3*x + 0.5").unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse("x + * y").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(parse("x^y").is_err());
        assert!(parse("sin(x").is_err());
        assert!(parse("x $ y").is_err());
    }

    #[test]
    fn function_names_need_parentheses() {
        let e = parse("exp * 2").unwrap();
        assert_eq!(e, Expr::int(2) * Expr::sym("exp"));
    }
}
