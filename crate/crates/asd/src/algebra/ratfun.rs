//! Rational functions: fractions of multivariate polynomials with exact
//! arithmetic and lightweight normalization.
//!
//! Equality is decided by cross multiplication, so the representative does
//! not need to be fully reduced. Normalization cancels shared monomial
//! content, runs a true gcd in the univariate case, and scales the
//! denominator's leading coefficient to one so Display output is stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::field::Field;
use super::mpoly::MPoly;
use super::scalar::Scalar;
use super::upoly::UPoly;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RatFun {
    num: MPoly,
    den: MPoly,
}

impl RatFun {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mut f = RatFun { num, den };
        f.normalize();
        Ok(f)
    }

    pub fn from_mpoly(p: MPoly) -> Self {
        RatFun { num: p, den: MPoly::one() }
    }

    pub fn from_scalar(c: Scalar) -> Self {
        Self::from_mpoly(MPoly::constant(c))
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_scalar(Scalar::from_int(v))
    }

    pub fn var(name: &str) -> Self {
        Self::from_mpoly(MPoly::var(name))
    }

    pub fn zero() -> Self {
        Self::from_mpoly(MPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_mpoly(MPoly::one())
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = MPoly::one();
            return;
        }
        // Shared monomial content.
        let vars: BTreeSet<String> = self
            .num
            .vars()
            .iter()
            .chain(self.den.vars().iter())
            .cloned()
            .collect();
        for v in &vars {
            let a = self.num.valuation_in(v).unwrap_or(0);
            let b = self.den.valuation_in(v).unwrap_or(0);
            let k = a.min(b);
            if k > 0 {
                self.num = self.num.divide_by_var_pow(v, k).expect("content bound");
                self.den = self.den.divide_by_var_pow(v, k).expect("content bound");
            }
        }
        // Full cancellation when everything lives in one variable.
        let vars: BTreeSet<String> = self
            .num
            .vars()
            .iter()
            .chain(self.den.vars().iter())
            .cloned()
            .collect();
        if vars.len() == 1 && !self.den.is_constant() {
            let v = vars.iter().next().unwrap();
            let un = to_upoly(&self.num, v);
            let ud = to_upoly(&self.den, v);
            let g = un.gcd(&ud);
            if g.degree().unwrap_or(0) > 0 {
                let qn = un.divrem(&g).expect("gcd divides").0;
                let qd = ud.divrem(&g).expect("gcd divides").0;
                self.num = qn.to_mpoly(v);
                self.den = qd.to_mpoly(v);
            }
        }
        // Deterministic representative: leading denominator coefficient one.
        let lead = self.den.leading_coeff();
        if !lead.is_one() {
            let inv = lead.recip().expect("nonzero denominator");
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let mut f = RatFun { num, den: self.den.mul(&other.den) };
        f.normalize();
        f
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut f = RatFun {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        };
        f.normalize();
        f
    }

    pub fn inv(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mut f = RatFun { num: self.den.clone(), den: self.num.clone() };
        f.normalize();
        Ok(f)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut f = RatFun { num: self.num.scale(c), den: self.den.clone() };
        f.normalize();
        f
    }

    pub fn pow_i(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = RatFun::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn derivative(&self, wrt: &str) -> Self {
        let num = self
            .num
            .derivative(wrt)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(wrt)));
        let mut f = RatFun { num, den: self.den.mul(&self.den) };
        f.normalize();
        f
    }

    /// `var`-adic valuation: order of vanishing (negative for a pole). None
    /// for the zero function.
    pub fn valuation_in(&self, var: &str) -> Option<i64> {
        let a = self.num.valuation_in(var)? as i64;
        let b = self.den.valuation_in(var).unwrap_or(0) as i64;
        Some(a - b)
    }

    pub fn eval(&self, bindings: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        let d = self.den.eval(bindings)?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(&self.num.eval(bindings)? / &d)
    }

    pub fn eval_partial(&self, bindings: &BTreeMap<String, Scalar>) -> Result<Self> {
        RatFun::new(
            self.num.eval_partial(bindings),
            self.den.eval_partial(bindings),
        )
    }

    /// The polynomial this value equals, if the reduced denominator is a
    /// constant.
    pub fn to_mpoly(&self) -> Option<MPoly> {
        if self.den.is_constant() {
            let c = self.den.as_constant().expect("constant denominator");
            Some(self.num.scale(&c.recip().expect("nonzero denominator")))
        } else {
            None
        }
    }

    /// Reshape as a fraction with poles only along `var`; fails when the
    /// denominator is not a power of `var` times a unit.
    pub fn to_fraction(&self, var: &str) -> Result<super::fraction::ExpandableFraction> {
        super::fraction::ExpandableFraction::new(var, self.num.clone(), self.den.clone())
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.num
            .vars()
            .iter()
            .chain(self.den.vars().iter())
            .cloned()
            .collect()
    }
}

fn to_upoly(p: &MPoly, var: &str) -> UPoly {
    let deg = p.degree_in(var).unwrap_or(0);
    let coeffs = (0..=deg)
        .map(|k| {
            let c = p.coefficient_of(var, k);
            c.as_constant().expect("univariate coefficient is constant")
        })
        .collect();
    UPoly::from_coeffs(coeffs)
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFun {}

impl Field for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn one() -> Self {
        RatFun::one()
    }
    fn from_int(v: i64) -> Self {
        RatFun::from_int(v)
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        RatFun::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RatFun::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RatFun::mul(self, other)
    }
    fn neg(&self) -> Self {
        RatFun::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        RatFun::inv(self)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            let c = self.den.as_constant().expect("constant denominator");
            if c.is_one() {
                return write!(f, "{}", self.num);
            }
        }
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl serde::Serialize for RatFun {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(vars: &[&str], s: &str) -> MPoly {
        crate::parse::parse_polynomial(s, vars).unwrap()
    }

    fn rf(num: &str, den: &str, vars: &[&str]) -> RatFun {
        RatFun::new(poly(vars, num), poly(vars, den)).unwrap()
    }

    #[test]
    fn univariate_gcd_cancels() {
        // (x^2 - 1)/(x - 1) reduces to x + 1.
        let f = rf("x^2 - 1", "x - 1", &["x"]);
        assert_eq!(f.to_mpoly().unwrap(), poly(&["x"], "x + 1"));
    }

    #[test]
    fn monomial_content_cancels() {
        let f = rf("x1^2*x2", "x1*x2^2", &["x1", "x2"]);
        assert_eq!(f.num().to_string(), "x1");
        assert_eq!(f.den().to_string(), "x2");
    }

    #[test]
    fn field_identities() {
        let a = rf("x1 + 1", "x2", &["x1", "x2"]);
        let b = rf("x2 - 1", "x1", &["x1", "x2"]);
        let sum = a.add(&b);
        assert_eq!(sum.sub(&b), a);
        let prod = a.mul(&b);
        assert_eq!(prod.div(&b).unwrap(), a);
        assert_eq!(a.mul(&a.inv().unwrap()), RatFun::one());
    }

    #[test]
    fn valuation_counts_pole_order() {
        let f = rf("x2^3 + x1*x2^4", "x1^2*x2", &["x1", "x2"]);
        assert_eq!(f.valuation_in("x2"), Some(2));
        assert_eq!(f.valuation_in("x1"), Some(-2));
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dx (1/x) = -1/x^2
        let f = rf("1", "x", &["x"]);
        let d = f.derivative("x");
        assert_eq!(d, rf("-1", "x^2", &["x"]));
    }

    #[test]
    fn eval_detects_denominator_zero() {
        let f = rf("1", "x - 1", &["x"]);
        let mut at = BTreeMap::new();
        at.insert("x".to_string(), Scalar::one());
        assert!(matches!(f.eval(&at), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn equality_ignores_representative() {
        let a = rf("2*x1", "2*x2", &["x1", "x2"]);
        let b = rf("x1", "x2", &["x1", "x2"]);
        assert_eq!(a, b);
    }
}
