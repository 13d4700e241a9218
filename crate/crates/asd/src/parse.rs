//! Recursive-descent parser for arithmetic expressions over a declared
//! variable set.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' signed-integer)?
//! base   := integer | identifier | '(' expr ')'
//! ```
//!
//! Every expression is evaluated exactly in the rational function field;
//! conversions to polynomials or pole-variable fractions happen afterwards.
//! The typeset minus U+2212 is accepted anywhere '-' is.

use crate::algebra::fraction::ExpandableFraction;
use crate::algebra::mpoly::MPoly;
use crate::algebra::ratfun::RatFun;
use crate::algebra::scalar::Scalar;
use crate::error::{Error, Result};

pub fn parse_ratfun(src: &str, vars: &[&str]) -> Result<RatFun> {
    let mut p = Parser::new(src, vars);
    let value = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.fail("unexpected trailing input"));
    }
    Ok(value)
}

/// Parse an expression that must evaluate to a polynomial.
pub fn parse_polynomial(src: &str, vars: &[&str]) -> Result<MPoly> {
    let value = parse_ratfun(src, vars)?;
    value.to_mpoly().ok_or_else(|| {
        Error::parse(format!("expression `{src}` is not a polynomial"))
    })
}

/// Parse an expression whose poles are confined to `pole_var`.
pub fn parse_fraction(src: &str, vars: &[&str], pole_var: &str) -> Result<ExpandableFraction> {
    parse_ratfun(src, vars)?.to_fraction(pole_var)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, vars: &'a [&'a str]) -> Self {
        Parser { chars: src.chars().collect(), pos: 0, vars, src }
    }

    fn fail(&self, msg: &str) -> Error {
        Error::parse(format!(
            "{msg} at offset {} in `{}`",
            self.pos, self.src
        ))
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_minus(c: char) -> bool {
        c == '-' || c == '\u{2212}'
    }

    fn expr(&mut self) -> Result<RatFun> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(c) if Self::is_minus(c) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFun> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = acc.div(&rhs).map_err(|_| self.fail("division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFun> {
        if matches!(self.peek(), Some(c) if Self::is_minus(c)) {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.eat('^') {
            let e = self.signed_integer()?;
            return base.pow_i(e).map_err(|_| self.fail("zero raised to a negative power"));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<RatFun> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.fail("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits()?;
                let value: Scalar = digits
                    .parse()
                    .map_err(|e: Error| Error::parse(format!("bad integer literal: {e}")))?;
                Ok(RatFun::from_scalar(value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.identifier();
                if self.vars.iter().any(|v| *v == name) {
                    Ok(RatFun::var(&name))
                } else {
                    Err(Error::UnknownVariable { name })
                }
            }
            Some(_) => Err(self.fail("expected a number, variable, or `(`")),
            None => Err(self.fail("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.fail("expected digits"));
        }
        if matches!(self.chars.get(self.pos), Some('.')) {
            return Err(self.fail("decimal literals are not supported; use exact fractions"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn identifier(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn signed_integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let mut neg = false;
        let mut parenthesized = false;
        if self.eat('(') {
            parenthesized = true;
        }
        if matches!(self.peek(), Some(c) if Self::is_minus(c)) {
            self.pos += 1;
            neg = true;
        }
        let digits = self.digits()?;
        if parenthesized && !self.eat(')') {
            return Err(self.fail("expected `)` after exponent"));
        }
        let v: i64 = digits
            .parse()
            .map_err(|_| self.fail("exponent out of range"))?;
        Ok(if neg { -v } else { v })
    }
}
