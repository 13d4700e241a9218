//! Dense univariate polynomials over `Scalar`, with exact factorization over
//! the rationals at small degree.
//!
//! The factorization route is: primitive integer form, Yun squarefree
//! decomposition, complete rational-root extraction, then degree 2 and 3
//! certified irreducible by the absence of rational roots, and degree >= 4
//! split (or certified) by a bounded Kronecker divisor search. Anything the
//! bounds cannot certify returns `FactorizationInconclusive` rather than a
//! guess.
//!
//! Irrational eigenvalues are reported as `AlgebraicTag`s: the monic
//! irreducible minimal polynomial plus a conjugacy-class index. No embedding
//! into the complex numbers is ever chosen.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mpoly::MPoly;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Max integer magnitude we will enumerate divisors for, and max number of
/// interpolation candidates per Kronecker stage.
const DIVISOR_LIMIT: u64 = 1_000_000_000_000;
const CANDIDATE_LIMIT: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UPoly {
    /// coeffs[i] is the coefficient of s^i; no trailing zeros.
    coeffs: Vec<Scalar>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = UPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn x() -> Self {
        UPoly { coeffs: vec![Scalar::zero(), Scalar::one()] }
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mut p = UPoly { coeffs };
        p.trim();
        p
    }

    /// Monic linear factor s - root.
    pub fn linear(root: &Scalar) -> Self {
        UPoly { coeffs: vec![-root, Scalar::one()] }
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn leading(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(&self.coeff(i) + &other.coeff(i));
        }
        UPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        UPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut coeffs = vec![Scalar::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += &(a * b);
            }
        }
        UPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        UPoly::from_coeffs(self.coeffs.iter().map(|k| k * c).collect())
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = UPoly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, at: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * at) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return UPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &Scalar::from_int(i as i64))
            .collect();
        UPoly::from_coeffs(coeffs)
    }

    /// Quotient and remainder; divisor must be nonzero.
    pub fn divrem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.degree().unwrap();
        let lead = divisor.leading();
        let mut rem = self.clone();
        let mut quot = vec![Scalar::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = &rem.leading() / &lead;
            let shift = rd - dd;
            quot[shift] = factor.clone();
            // rem -= factor * s^shift * divisor
            let mut sub = vec![Scalar::zero(); shift];
            sub.extend(divisor.coeffs.iter().map(|c| c * &factor));
            rem = rem.sub(&UPoly::from_coeffs(sub));
        }
        Ok((UPoly::from_coeffs(quot), rem))
    }

    pub fn divides(&self, other: &Self) -> bool {
        match other.divrem(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        self.scale(&lead.recip().expect("nonzero leading coefficient"))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor in gcd loop");
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Yun squarefree decomposition: pairs (squarefree factor, multiplicity),
    /// with the leading coefficient dropped (all parts monic).
    pub fn squarefree_decomposition(&self) -> Vec<(UPoly, usize)> {
        let f = self.monic();
        if f.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let df = f.derivative();
        let g = f.gcd(&df);
        let mut b = f.divrem(&g).unwrap().0;
        let mut c = df.divrem(&g).unwrap().0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1usize;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.divrem(&a).unwrap().0;
            c = d.divrem(&a).unwrap().0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Primitive integer coefficient vector (content removed, leading positive).
    fn primitive_int(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            let d = c.denom();
            let g = num_integer::Integer::gcd(&lcm, d);
            lcm = &lcm / &g * d;
        }
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let mut content = BigInt::zero();
        for v in &ints {
            content = num_integer::Integer::gcd(&content, v);
        }
        if !content.is_zero() {
            for v in &mut ints {
                *v /= &content;
            }
        }
        if ints.last().map(|v| v.is_negative()).unwrap_or(false) {
            for v in &mut ints {
                *v = -v.clone();
            }
        }
        ints
    }

    /// All distinct rational roots, found by the rational root theorem on the
    /// primitive integer form. Complete, or an error if divisor enumeration
    /// exceeds its budget.
    pub fn rational_roots(&self) -> Result<Vec<Scalar>> {
        if self.is_zero() {
            return Err(Error::unsupported("roots of the zero polynomial"));
        }
        let mut ints = self.primitive_int();
        let mut roots = Vec::new();
        // Strip zero roots first.
        let mut zero_root = false;
        while ints.first().map(|v| v.is_zero()).unwrap_or(false) {
            ints.remove(0);
            zero_root = true;
        }
        if zero_root {
            roots.push(Scalar::zero());
        }
        if ints.len() <= 1 {
            return Ok(roots);
        }
        let a0 = ints.first().unwrap().clone();
        let an = ints.last().unwrap().clone();
        let ps = divisors(&a0).ok_or_else(|| Error::FactorizationInconclusive {
            detail: format!("constant term {a0} too large to enumerate divisors"),
        })?;
        let qs = divisors(&an).ok_or_else(|| Error::FactorizationInconclusive {
            detail: format!("leading term {an} too large to enumerate divisors"),
        })?;
        for p in &ps {
            for q in &qs {
                for sign in [1i64, -1] {
                    let cand = Scalar::from_big(num_rational::BigRational::new(
                        p * BigInt::from(sign),
                        q.clone(),
                    ));
                    if self.eval(&cand).is_zero() && !roots.contains(&cand) {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        Ok(roots)
    }

    /// Factor into monic irreducibles over the rationals.
    pub fn factor(&self) -> Result<Factorization> {
        if self.is_zero() {
            return Err(Error::unsupported("factor of the zero polynomial"));
        }
        let lead = self.leading();
        let mut factors: Vec<(UPoly, usize)> = Vec::new();
        for (part, mult) in self.squarefree_decomposition() {
            for irred in factor_squarefree(&part)? {
                merge_factor(&mut factors, irred, mult);
            }
        }
        factors.sort_by(|a, b| {
            a.0.degree()
                .cmp(&b.0.degree())
                .then_with(|| a.0.cmp(&b.0))
        });
        // Reassembly check: the factorization must multiply back exactly.
        let mut prod = UPoly::constant(lead.clone());
        for (f, m) in &factors {
            prod = prod.mul(&f.pow(*m));
        }
        if prod != *self {
            return Err(Error::FactorizationInconclusive {
                detail: "reassembly mismatch".to_string(),
            });
        }
        Ok(Factorization { lead, factors })
    }

    /// Eigenvalue-style root report: rational roots with multiplicity, plus
    /// tagged conjugacy classes for irreducible factors of degree >= 2.
    pub fn roots(&self) -> Result<RootReport> {
        let fact = self.factor()?;
        let mut rational = Vec::new();
        let mut tagged = Vec::new();
        let mut tag_index = 0usize;
        for (f, m) in fact.factors {
            if f.degree() == Some(1) {
                rational.push((-f.coeff(0), m));
            } else {
                tagged.push((AlgebraicTag { min_poly: f, index: tag_index }, m));
                tag_index += 1;
            }
        }
        rational.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(RootReport { rational, tagged })
    }

    pub fn to_mpoly(&self, var: &str) -> MPoly {
        let mut out = MPoly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            out = out.add(&MPoly::monomial(var, i as u32, c.clone()));
        }
        out
    }
}

fn merge_factor(factors: &mut Vec<(UPoly, usize)>, f: UPoly, mult: usize) {
    for (g, m) in factors.iter_mut() {
        if *g == f {
            *m += mult;
            return;
        }
    }
    factors.push((f, mult));
}

/// Positive divisors of |n|, or None if |n| exceeds the enumeration budget.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let abs = n.abs();
    let v = abs.to_u64()?;
    if v == 0 || v > DIVISOR_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= v {
        if v % d == 0 {
            small.push(BigInt::from(d));
            if d != v / d {
                large.push(BigInt::from(v / d));
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    Some(small)
}

/// Factor a monic squarefree polynomial into monic irreducibles.
fn factor_squarefree(p: &UPoly) -> Result<Vec<UPoly>> {
    let deg = p.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        return Ok(vec![p.monic()]);
    }
    // Strip rational roots completely.
    let roots = p.rational_roots()?;
    let mut rest = p.monic();
    let mut out = Vec::new();
    for r in roots {
        let lin = UPoly::linear(&r);
        let (q, rem) = rest.divrem(&lin)?;
        debug_assert!(rem.is_zero());
        rest = q;
        out.push(lin);
    }
    let d = rest.degree().unwrap_or(0);
    match d {
        0 => {}
        1 => unreachable!("degree-1 remainder would have a rational root"),
        2 | 3 => out.push(rest), // no rational root implies irreducible here
        _ => out.extend(kronecker_factor(&rest)?),
    }
    Ok(out)
}

/// Split a monic squarefree integer-primitive polynomial of degree >= 4 with
/// no rational roots, by Kronecker interpolation. Returns monic irreducible
/// pieces or certifies irreducibility by exhausting candidate factors.
fn kronecker_factor(p: &UPoly) -> Result<Vec<UPoly>> {
    let n = p.degree().unwrap();
    let ints = p.primitive_int();
    let pz = UPoly::from_coeffs(ints.iter().map(|v| big_to_scalar(v)).collect());
    for d in 2..=n / 2 {
        // Evaluation points 0, 1, -1, 2, -2, ...
        let mut pts = Vec::with_capacity(d + 1);
        let mut k = 0i64;
        while pts.len() < d + 1 {
            pts.push(k);
            if k > 0 {
                k = -k;
            } else {
                k = -k + 1;
            }
        }
        let values: Vec<Scalar> = pts.iter().map(|&pt| pz.eval(&Scalar::from_int(pt))).collect();
        let mut div_sets: Vec<Vec<Scalar>> = Vec::with_capacity(pts.len());
        let mut total: u64 = 1;
        for (i, v) in values.iter().enumerate() {
            let base = divisors(&v.numer().clone()).ok_or_else(|| {
                Error::FactorizationInconclusive {
                    detail: format!("evaluation value {v} too large for divisor search"),
                }
            })?;
            let mut set = Vec::new();
            for b in base {
                set.push(big_to_scalar(&b));
                // Fixing the first point's divisor sign halves the search;
                // a factor or its negation always survives.
                if i > 0 {
                    set.push(big_to_scalar(&(-b)));
                }
            }
            total = total.saturating_mul(set.len() as u64);
            div_sets.push(set);
        }
        if total > CANDIDATE_LIMIT {
            return Err(Error::FactorizationInconclusive {
                detail: format!("degree-{d} Kronecker stage needs {total} candidates"),
            });
        }
        let mut idx = vec![0usize; div_sets.len()];
        loop {
            let sample: Vec<Scalar> = idx.iter().zip(&div_sets).map(|(&i, s)| s[i].clone()).collect();
            if let Some(cand) = interpolate(&pts, &sample) {
                if cand.degree() == Some(d) && cand.divides(&pz) {
                    let (q, _) = pz.divrem(&cand)?;
                    let mut out = factor_squarefree(&cand.monic())?;
                    out.extend(factor_squarefree(&q.monic())?);
                    return Ok(out);
                }
            }
            // Odometer increment.
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    // Exhausted all degree-d candidates; try next degree.
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < div_sets[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    Ok(vec![p.monic()])
}

fn big_to_scalar(v: &BigInt) -> Scalar {
    Scalar::from_big(num_rational::BigRational::from_integer(v.clone()))
}

/// Lagrange interpolation; None if the points are degenerate.
fn interpolate(pts: &[i64], values: &[Scalar]) -> Option<UPoly> {
    let mut acc = UPoly::zero();
    for (i, &xi) in pts.iter().enumerate() {
        let mut basis = UPoly::one();
        let mut denom = Scalar::one();
        for (j, &xj) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&UPoly::linear(&Scalar::from_int(xj)));
            denom *= &Scalar::from_int(xi - xj);
        }
        if denom.is_zero() {
            return None;
        }
        acc = acc.add(&basis.scale(&(&values[i] / &denom)));
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub lead: Scalar,
    /// Monic irreducible factors with multiplicities, sorted by degree then
    /// coefficients.
    pub factors: Vec<(UPoly, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootReport {
    pub rational: Vec<(Scalar, usize)>,
    pub tagged: Vec<(AlgebraicTag, usize)>,
}

/// An irrational eigenvalue class: its monic irreducible minimal polynomial
/// and which conjugacy class it is, with no root chosen.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlgebraicTag {
    pub min_poly: UPoly,
    pub index: usize,
}

impl fmt::Display for AlgebraicTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "algebraic#{}[{}]", self.index, self.min_poly)
    }
}

/// A spectral value: exact rational, or a tagged conjugacy class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpectralValue {
    Rational(Scalar),
    Algebraic(AlgebraicTag),
}

impl SpectralValue {
    pub fn is_zero(&self) -> bool {
        match self {
            SpectralValue::Rational(c) => c.is_zero(),
            // The minimal polynomial of a tag is irreducible of degree >= 2,
            // so zero is never among its roots.
            SpectralValue::Algebraic(_) => false,
        }
    }

    pub fn as_rational(&self) -> Option<&Scalar> {
        match self {
            SpectralValue::Rational(c) => Some(c),
            SpectralValue::Algebraic(_) => None,
        }
    }
}

impl fmt::Display for SpectralValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralValue::Rational(c) => write!(f, "{c}"),
            SpectralValue::Algebraic(t) => write!(f, "{t}"),
        }
    }
}

impl serde::Serialize for SpectralValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
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
            match i {
                0 => write!(f, "{mag}")?,
                1 => {
                    if mag.is_one() {
                        write!(f, "s")?;
                    } else {
                        write!(f, "{mag}*s")?;
                    }
                }
                _ => {
                    if mag.is_one() {
                        write!(f, "s^{i}")?;
                    } else {
                        write!(f, "{mag}*s^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
