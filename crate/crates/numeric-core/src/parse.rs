//! Text mini-language: `exp(-z) + 2*z`, `z + sin(2*pi*z) + 0.0127464`.
//!
//! Grammar: sums and differences of products; `/` is allowed only by a
//! constant; `^` takes a non-negative integer; `i`, `pi` and `e` are
//! constants; `exp`, `sin`, `cos`, `sinh`, `cosh` are functions.
//! Juxtaposition such as `2z` multiplies.

use crate::{Complex, EntireExpr};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected {found} at offset {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdent { pos: usize, name: String },
    #[error("division by a non-constant expression at offset {pos}")]
    NonConstantDivisor { pos: usize },
    #[error("exponent must be a non-negative integer at offset {pos}")]
    BadExponent { pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let ch = b[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            // exponent part, only if followed by a digit (so `2e` stays `2*e`)
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ParseError::Unexpected {
                pos: start,
                found: format!("number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if ch == '*' && i + 1 < b.len() && b[i + 1] == b'*' {
            out.push((i, Tok::Op('^')));
            i += 2;
        } else if "+-*/^()".contains(ch) {
            out.push((i, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(ParseError::Unexpected {
                pos: i,
                found: format!("character `{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let found = match self.peek() {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        };
        ParseError::Unexpected { pos: self.pos(), found }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn sum(&mut self) -> Result<EntireExpr, ParseError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc + self.product()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Num(_) | Tok::Ident(_) | Tok::Op('('))
    }

    fn product(&mut self) -> Result<EntireExpr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    match d.as_const() {
                        Some(c) => acc = acc * EntireExpr::constant(Complex::new(1.0, 0.0) / c),
                        None => return Err(ParseError::NonConstantDivisor { pos }),
                    }
                }
                _ if self.starts_atom() => acc = acc * self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<EntireExpr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<EntireExpr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    Ok(EntireExpr::powi(base, v as u32))
                }
                _ => Err(ParseError::BadExponent { pos }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<EntireExpr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(EntireExpr::real(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "z" => Ok(EntireExpr::var()),
                    "i" => Ok(EntireExpr::constant(Complex::new(0.0, 1.0))),
                    "pi" => Ok(EntireExpr::real(std::f64::consts::PI)),
                    "e" => Ok(EntireExpr::real(std::f64::consts::E)),
                    "exp" | "sin" | "cos" | "sinh" | "cosh" => {
                        self.expect('(')?;
                        let a = self.sum()?;
                        self.expect(')')?;
                        Ok(apply_fn(&name, a))
                    }
                    _ => Err(ParseError::UnknownIdent { pos, name }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn apply_fn(name: &str, a: EntireExpr) -> EntireExpr {
    let half = EntireExpr::real(0.5);
    match name {
        "exp" => EntireExpr::exp(a),
        "sin" => EntireExpr::sin(a),
        "cos" => EntireExpr::cos(a),
        "sinh" => half * (EntireExpr::exp(a.clone()) - EntireExpr::exp(-a)),
        "cosh" => half * (EntireExpr::exp(a.clone()) + EntireExpr::exp(-a)),
        _ => unreachable!("caller checked the name"),
    }
}

impl FromStr for EntireExpr {
    type Err = ParseError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut lx = Lexer { toks: lex(src)?, at: 0 };
        let e = lx.sum()?;
        if *lx.peek() != Tok::End {
            return Err(lx.unexpected());
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn p(s: &str) -> EntireExpr {
        s.parse().unwrap()
    }

    #[test]
    fn baker_first_component() {
        let e = p("exp(-z) + 2*z");
        let z = c(0.3, 0.4);
        assert!((e.eval(z) - ((-z).exp() + 2.0 * z)).norm() < 1e-15);
    }

    #[test]
    fn constants_fold() {
        assert_eq!(p("1.5+2i").as_const(), Some(c(1.5, 2.0)));
        assert_eq!(p("2*pi/4").as_const(), Some(c(std::f64::consts::FRAC_PI_2, 0.0)));
        assert_eq!(p("1e-3").as_const(), Some(c(1e-3, 0.0)));
    }

    #[test]
    fn implicit_product_and_power() {
        let e = p("3z^2 - z");
        assert!((e.eval(c(2.0, 0.0)) - c(10.0, 0.0)).norm() < 1e-14);
        assert!((p("-z^2").eval(c(3.0, 0.0)) - c(-9.0, 0.0)).norm() < 1e-14);
        assert!((p("2e").eval(c(0.0, 0.0)).re - 2.0 * std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!("1/z".parse::<EntireExpr>(), Err(ParseError::NonConstantDivisor { .. })));
        assert!(matches!("foo(z)".parse::<EntireExpr>(), Err(ParseError::UnknownIdent { .. })));
        assert!(matches!("z^-1".parse::<EntireExpr>(), Err(ParseError::BadExponent { .. })));
        assert!("(z".parse::<EntireExpr>().is_err());
        assert!("z z)".parse::<EntireExpr>().is_err());
    }
}
