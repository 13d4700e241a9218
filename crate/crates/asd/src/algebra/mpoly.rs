//! Sparse multivariate polynomials over `Scalar`.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so iteration order, `Display`, and `Ord` are all
//! canonical. Every constructor and operation finishes by pruning zero
//! coefficients and unused variables; two polynomials are equal iff their
//! normal forms are structurally equal.
//!
//! Variable names are ordered "naturally": an alphabetic prefix compared as
//! text, then a numeric suffix compared as a number, so `t2 < t10`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Exponent vector. Ordered by total degree, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Natural variable order: alphabetic stem, then numeric suffix as a number.
pub fn var_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.chars().rev().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 || digits == s.len() {
            return (s, None);
        }
        let at = s.len() - digits;
        match s[at..].parse() {
            Ok(n) => (&s[..at], Some(n)),
            Err(_) => (s, None),
        }
    }
    let (pa, na) = split(a);
    let (pb, nb) = split(b);
    pa.cmp(pb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MPoly {
    vars: Vec<String>,
    terms: BTreeMap<Mono, Scalar>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly { vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(Vec::new()), c);
        }
        MPoly { vars: Vec::new(), terms }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Scalar::from_int(n))
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono(vec![1]), Scalar::one());
        MPoly { vars: vec![name.to_string()], terms }
    }

    /// `c * name^k`.
    pub fn monomial(name: &str, k: u32, c: Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        if k == 0 {
            return Self::constant(c);
        }
        let mut terms = BTreeMap::new();
        terms.insert(Mono(vec![k]), c);
        MPoly { vars: vec![name.to_string()], terms }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().total_degree() == 0)
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate (exponents, coefficient) pairs in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    /// Total degree; None for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    pub fn degree_in(&self, var: &str) -> Option<u32> {
        let idx = self.vars.iter().position(|v| v == var)?;
        self.terms.keys().map(|m| m.0[idx]).max()
    }

    /// Smallest exponent of `var` across terms; None for the zero polynomial.
    /// A polynomial not mentioning `var` has valuation 0.
    pub fn valuation_in(&self, var: &str) -> Option<u32> {
        if self.terms.is_empty() {
            return None;
        }
        match self.vars.iter().position(|v| v == var) {
            Some(idx) => self.terms.keys().map(|m| m.0[idx]).min(),
            None => Some(0),
        }
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        // Prune variables that no term uses, keeping exponent vectors aligned.
        let n = self.vars.len();
        let mut used = vec![false; n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
        self.vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let old = std::mem::take(&mut self.terms);
        for (m, c) in old {
            let slim = Mono(keep.iter().map(|&i| m.0[i]).collect());
            self.terms.insert(slim, c);
        }
    }

    /// Rewrite both polynomials over the union of their variables.
    fn unified(&self, other: &Self) -> (Vec<String>, BTreeMap<Mono, Scalar>, BTreeMap<Mono, Scalar>) {
        let mut all: Vec<String> = self.vars.clone();
        for v in &other.vars {
            if !all.contains(v) {
                all.push(v.clone());
            }
        }
        all.sort_by(|a, b| var_cmp(a, b));
        let remap = |p: &MPoly| -> BTreeMap<Mono, Scalar> {
            let positions: Vec<usize> = p
                .vars
                .iter()
                .map(|v| all.iter().position(|w| w == v).unwrap())
                .collect();
            p.terms
                .iter()
                .map(|(m, c)| {
                    let mut e = vec![0u32; all.len()];
                    for (i, &exp) in m.0.iter().enumerate() {
                        e[positions[i]] = exp;
                    }
                    (Mono(e), c.clone())
                })
                .collect()
        };
        (all.clone(), remap(self), remap(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (vars, mut a, b) = self.unified(other);
        for (m, c) in b {
            match a.get_mut(&m) {
                Some(existing) => *existing += &c,
                None => {
                    a.insert(m, c);
                }
            }
        }
        let mut out = MPoly { vars, terms: a };
        out.canonicalize();
        out
    }

    pub fn neg(&self) -> Self {
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return MPoly::zero();
        }
        let (vars, a, b) = self.unified(other);
        let mut terms: BTreeMap<Mono, Scalar> = BTreeMap::new();
        for (ma, ca) in &a {
            for (mb, cb) in &b {
                let m = Mono(ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect());
                let prod = ca * cb;
                match terms.get_mut(&m) {
                    Some(existing) => *existing += &prod,
                    None => {
                        terms.insert(m, prod);
                    }
                }
            }
        }
        let mut out = MPoly { vars, terms };
        out.canonicalize();
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = MPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, var: &str) -> Self {
        let idx = match self.vars.iter().position(|v| v == var) {
            Some(i) => i,
            None => return MPoly::zero(),
        };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[idx] = e - 1;
            terms.insert(Mono(exps), c * &Scalar::from_int(e as i64));
        }
        let mut out = MPoly { vars: self.vars.clone(), terms };
        out.canonicalize();
        out
    }

    /// Substitute scalars for some variables; untouched variables remain.
    pub fn eval_partial(&self, bindings: &BTreeMap<String, Scalar>) -> Self {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = Vec::with_capacity(self.vars.len());
            let mut kept_vars = Vec::with_capacity(self.vars.len());
            for (i, v) in self.vars.iter().enumerate() {
                match bindings.get(v) {
                    Some(val) => coeff *= &val.pow(m.0[i]),
                    None => {
                        kept_vars.push(v.clone());
                        exps.push(m.0[i]);
                    }
                }
            }
            let mut term = MPoly { vars: kept_vars, terms: BTreeMap::new() };
            term.terms.insert(Mono(exps), coeff);
            term.canonicalize();
            out = out.add(&term);
        }
        out
    }

    /// Full evaluation. Errors if a variable is missing from the bindings.
    pub fn eval(&self, bindings: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        for v in &self.vars {
            if !bindings.contains_key(v) && self.degree_in(v).unwrap_or(0) > 0 {
                return Err(Error::UnknownVariable { name: v.clone() });
            }
        }
        let res = self.eval_partial(bindings);
        res.as_constant().ok_or_else(|| Error::UnknownVariable {
            name: res.vars.first().cloned().unwrap_or_default(),
        })
    }

    /// Substitute polynomials for some variables.
    pub fn substitute(&self, bindings: &BTreeMap<String, MPoly>) -> Self {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut term = MPoly::constant(c.clone());
            for (i, v) in self.vars.iter().enumerate() {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                match bindings.get(v) {
                    Some(p) => term = term.mul(&p.pow(e)),
                    None => term = term.mul(&MPoly::var(v).pow(e)),
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Coefficient of `var^k`, as a polynomial in the remaining variables.
    pub fn coefficient_of(&self, var: &str, k: u32) -> Self {
        let idx = match self.vars.iter().position(|v| v == var) {
            Some(i) => i,
            None => {
                return if k == 0 { self.clone() } else { MPoly::zero() };
            }
        };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.0[idx] != k {
                continue;
            }
            let mut exps = m.0.clone();
            exps[idx] = 0;
            terms.insert(Mono(exps), c.clone());
        }
        let mut out = MPoly { vars: self.vars.clone(), terms };
        out.canonicalize();
        out
    }

    /// Exact division by `var^k`. Errors if some term has a smaller exponent.
    pub fn divide_by_var_pow(&self, var: &str, k: u32) -> Result<Self> {
        if k == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::shape(format!("cannot divide by {var}^{k}: variable absent")))?;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.0[idx] < k {
                return Err(Error::shape(format!(
                    "cannot divide by {var}^{k}: term with exponent {}",
                    m.0[idx]
                )));
            }
            let mut exps = m.0.clone();
            exps[idx] -= k;
            terms.insert(Mono(exps), c.clone());
        }
        let mut out = MPoly { vars: self.vars.clone(), terms };
        out.canonicalize();
        Ok(out)
    }

    pub fn mul_var_pow(&self, var: &str, k: u32) -> Self {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        self.mul(&MPoly::var(var).pow(k))
    }

    /// Leading coefficient in graded-lex order.
    pub fn leading_coeff(&self) -> Scalar {
        self.terms.values().next_back().cloned().unwrap_or_else(Scalar::zero)
    }

    /// Constant term (coefficient of the empty monomial).
    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Mono(vec![0; self.vars.len()])).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Rename a variable. Errors if the target name is already in use.
    pub fn rename_var(&self, from: &str, to: &str) -> Result<Self> {
        if !self.vars.iter().any(|v| v == from) {
            return Ok(self.clone());
        }
        if self.vars.iter().any(|v| v == to) {
            return Err(Error::shape(format!("rename {from}->{to}: target in use")));
        }
        let mut bindings = BTreeMap::new();
        bindings.insert(from.to_string(), MPoly::var(to));
        Ok(self.substitute(&bindings))
    }

    /// Max total degree over the listed variables, per term, maximized.
    pub fn max_degree_over(&self, set: &BTreeSet<String>) -> u32 {
        let idxs: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| set.contains(*v))
            .map(|(i, _)| i)
            .collect();
        self.terms
            .keys()
            .map(|m| idxs.iter().map(|&i| m.0[i]).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Per-term (degree over `a`, degree over `b`) pairs with coefficients,
    /// for degree-bound checks.
    pub fn split_degrees(
        &self,
        a: &BTreeSet<String>,
        b: &BTreeSet<String>,
    ) -> Vec<(u32, u32, Scalar, Mono)> {
        let ia: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| a.contains(*v))
            .map(|(i, _)| i)
            .collect();
        let ib: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| b.contains(*v))
            .map(|(i, _)| i)
            .collect();
        self.terms
            .iter()
            .map(|(m, c)| {
                (
                    ia.iter().map(|&i| m.0[i]).sum::<u32>(),
                    ib.iter().map(|&i| m.0[i]).sum::<u32>(),
                    c.clone(),
                    m.clone(),
                )
            })
            .collect()
    }

    /// Render one exponent vector of this polynomial as `x1^2*x2`.
    pub fn mono_string(&self, m: &Mono) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            if e == 1 {
                parts.push(self.vars[i].clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.vars[i], e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mono = self.mono_string(m);
            let is_const = mono == "1";
            let mag = c.abs();
            let mag_str = if mag.is_one() && !is_const {
                String::new()
            } else if is_const {
                mag.to_string()
            } else {
                format!("{mag}*")
            };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if is_const {
                write!(f, "{mag_str}")?;
            } else {
                write!(f, "{mag_str}{mono}")?;
            }
        }
        Ok(())
    }
}

impl serde::Serialize for MPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
