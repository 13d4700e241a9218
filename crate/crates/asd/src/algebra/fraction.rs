//! Fractions with a distinguished pole variable, in the shape
//! `num / (var^pole * den)` where `den` has constant term one.
//!
//! This is the shape every coefficient in the specialization pipeline takes:
//! a polynomial numerator over a power of the divisor coordinate times a unit.
//! The constructor normalizes so that `den` has constant term exactly one and
//! the numerator carries no power of the pole variable; `pole` may be any
//! integer (negative means a net multiple of the variable).
//!
//! Laurent expansion lives in `series::expand_fraction` (single variable) and
//! `series::expand_multi` (joint expansion in a set of variables).

use std::fmt;

use super::mpoly::MPoly;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandableFraction {
    var: String,
    pole: i64,
    num: MPoly,
    den: MPoly,
}

impl ExpandableFraction {
    /// Build `num_poly / den_poly` with poles only along `var`. Fails with
    /// `NotExpandable` if, after pulling the `var`-content out of the
    /// denominator, its constant term is zero.
    pub fn new(var: &str, num_poly: MPoly, den_poly: MPoly) -> Result<Self> {
        if den_poly.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let k = den_poly.valuation_in(var).unwrap_or(0) as i64;
        let rest = den_poly.divide_by_var_pow(var, k as u32)?;
        let c = rest.constant_term();
        if c.is_zero() {
            return Err(Error::NotExpandable {
                detail: format!(
                    "denominator {rest} has no constant term after removing {var}^{k}"
                ),
            });
        }
        let inv = c.recip()?;
        let mut f = ExpandableFraction {
            var: var.to_string(),
            pole: k,
            num: num_poly.scale(&inv),
            den: rest.scale(&inv),
        };
        f.normalize();
        Ok(f)
    }

    pub fn from_mpoly(var: &str, p: MPoly) -> Self {
        let mut f = ExpandableFraction {
            var: var.to_string(),
            pole: 0,
            num: p,
            den: MPoly::one(),
        };
        f.normalize();
        f
    }

    pub fn from_scalar(var: &str, c: Scalar) -> Self {
        Self::from_mpoly(var, MPoly::constant(c))
    }

    pub fn zero(var: &str) -> Self {
        Self::from_mpoly(var, MPoly::zero())
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.pole = 0;
            self.den = MPoly::one();
            return;
        }
        if let Some(v) = self.num.valuation_in(&self.var) {
            if v > 0 {
                self.num = self.num.divide_by_var_pow(&self.var, v).expect("valuation bound");
                self.pole -= v as i64;
            }
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    /// Pole order in the distinguished variable; negative means the value is
    /// divisible by that power of the variable.
    pub fn pole(&self) -> i64 {
        self.pole
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

    pub fn den_is_one(&self) -> bool {
        self.den.is_constant()
    }

    /// The value as a polynomial, when the denominator is trivial and the
    /// pole is not positive.
    pub fn to_mpoly(&self) -> Option<MPoly> {
        if !self.den_is_one() {
            return None;
        }
        if self.pole > 0 {
            return None;
        }
        Some(self.num.mul_var_pow(&self.var, (-self.pole) as u32))
    }

    fn check_same_var(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::shape(format!(
                "mixed pole variables {} and {}",
                self.var, other.var
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        let p = self.pole.max(other.pole);
        let lift = |f: &Self| -> MPoly {
            f.num.mul_var_pow(&f.var, (p - f.pole) as u32)
        };
        let num = lift(self).mul(&other.den).add(&lift(other).mul(&self.den));
        let mut out = ExpandableFraction {
            var: self.var.clone(),
            pole: p,
            num,
            den: self.den.mul(&other.den),
        };
        out.normalize();
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        let mut out = ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole + other.pole,
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        };
        out.normalize();
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole,
            num: self.num.scale(c),
            den: self.den.clone(),
        };
        out.normalize();
        out
    }

    pub fn mul_mpoly(&self, p: &MPoly) -> Self {
        let mut out = ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole,
            num: self.num.mul(p),
            den: self.den.clone(),
        };
        out.normalize();
        out
    }

    /// Multiply by var^k (k may be negative).
    pub fn shift(&self, k: i64) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole - k,
            num: self.num.clone(),
            den: self.den.clone(),
        }
    }

    /// Partial derivative with respect to any variable.
    pub fn derivative(&self, wrt: &str) -> Self {
        // d/dz [ n v^{-p} d^{-1} ] with v the pole variable:
        //   (n' d v - [z = v] p n d - n d' v) / (v^{p+1} d^2)
        let v = MPoly::var(&self.var);
        let mut num = self.num.derivative(wrt).mul(&self.den).mul(&v);
        if wrt == self.var {
            num = num.sub(&self.num.mul(&self.den).scale(&Scalar::from_int(self.pole)));
        }
        num = num.sub(&self.num.mul(&self.den.derivative(wrt)).mul(&v));
        let mut out = ExpandableFraction {
            var: self.var.clone(),
            pole: self.pole + 1,
            num,
            den: self.den.mul(&self.den),
        };
        out.normalize();
        out
    }

    /// Exact equality of values, by cross multiplication.
    pub fn value_eq(&self, other: &Self) -> bool {
        if self.var != other.var {
            return self.is_zero() && other.is_zero();
        }
        let p = self.pole.max(other.pole);
        let a = self
            .num
            .mul_var_pow(&self.var, (p - self.pole) as u32)
            .mul(&other.den);
        let b = other
            .num
            .mul_var_pow(&other.var, (p - other.pole) as u32)
            .mul(&self.den);
        a == b
    }

    /// Substitute scalar values for some of the variables other than the pole
    /// variable, keeping the fraction shape.
    pub fn eval_partial(&self, values: &std::collections::BTreeMap<String, Scalar>) -> Result<Self> {
        if values.contains_key(&self.var) {
            return Err(Error::bad_parameters(
                "cannot substitute the pole variable of a fraction".to_string(),
            ));
        }
        let mut out = ExpandableFraction::new(
            &self.var,
            self.num.eval_partial(values),
            self.den.eval_partial(values),
        )?;
        // new() only sees the pole content of the evaluated denominator;
        // reapply the pole carried by this fraction.
        out.pole += self.pole;
        out.normalize();
        Ok(out)
    }
}

impl fmt::Display for ExpandableFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            return write!(f, "0");
        }
        let num = if self.pole < 0 {
            self.num.mul_var_pow(&self.var, (-self.pole) as u32)
        } else {
            self.num.clone()
        };
        if self.pole <= 0 && self.den_is_one() {
            return write!(f, "{num}");
        }
        write!(f, "({num}) / (")?;
        let mut need_star = false;
        if self.pole > 0 {
            if self.pole == 1 {
                write!(f, "{}", self.var)?;
            } else {
                write!(f, "{}^{}", self.var, self.pole)?;
            }
            need_star = true;
        }
        if !self.den_is_one() {
            if need_star {
                write!(f, " * ")?;
            }
            write!(f, "({})", self.den)?;
        } else if !need_star {
            write!(f, "1")?;
        }
        write!(f, ")")
    }
}

impl serde::Serialize for ExpandableFraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn poly(vars: &[&str], s: &str) -> MPoly {
        crate::parse::parse_polynomial(s, vars).unwrap()
    }

    #[test]
    fn constructor_normalizes_unit_constant() {
        let num = poly(&["x1", "x2"], "x1");
        let den = poly(&["x1", "x2"], "2*x2^2 + 4*x2^3");
        let f = ExpandableFraction::new("x2", num, den).unwrap();
        assert_eq!(f.pole(), 2);
        assert_eq!(f.den().to_string(), "2*x2 + 1");
        assert_eq!(f.num().to_string(), "1/2*x1");
    }

    #[test]
    fn rejects_mixed_pole() {
        let num = MPoly::one();
        let den = poly(&["x1", "x2"], "x1*x2");
        assert!(matches!(
            ExpandableFraction::new("x2", num, den),
            Err(Error::NotExpandable { .. })
        ));
    }

    #[test]
    fn arithmetic_cross_checks() {
        let one_over = |k: i64| {
            ExpandableFraction::new("t", MPoly::one(), MPoly::var("t").pow(k as u32)).unwrap()
        };
        // 1/t + 1/t^2 = (t + 1)/t^2
        let s = one_over(1).add(&one_over(2)).unwrap();
        let expected = ExpandableFraction::new(
            "t",
            poly(&["t"], "t + 1"),
            poly(&["t"], "t^2"),
        )
        .unwrap();
        assert!(s.value_eq(&expected));
        // (1/t) * (1/t) = 1/t^2
        assert!(one_over(1).mul(&one_over(1)).unwrap().value_eq(&one_over(2)));
    }

    #[test]
    fn derivative_of_inverse_power() {
        // d/dt t^{-2} = -2 t^{-3}
        let f = ExpandableFraction::new("t", MPoly::one(), MPoly::var("t").pow(2)).unwrap();
        let d = f.derivative("t");
        let expected = ExpandableFraction::new(
            "t",
            MPoly::constant(Scalar::from_int(-2)),
            MPoly::var("t").pow(3),
        )
        .unwrap();
        assert!(d.value_eq(&expected));
    }

    #[test]
    fn derivative_with_unit_denominator() {
        // d/dt [1/(1+t)] = -1/(1+t)^2
        let f = ExpandableFraction::new("t", MPoly::one(), poly(&["t"], "1 + t")).unwrap();
        let d = f.derivative("t");
        let expected = ExpandableFraction::new(
            "t",
            MPoly::constant(Scalar::from_int(-1)),
            poly(&["t"], "t^2 + 2*t + 1"),
        )
        .unwrap();
        assert!(d.value_eq(&expected));
    }

    #[test]
    fn eval_partial_keeps_pole() {
        let f = ExpandableFraction::new(
            "x2",
            poly(&["x1", "x2"], "x1 + 1"),
            poly(&["x1", "x2"], "x2 * (1 + x1*x2)"),
        )
        .unwrap();
        let mut vals = BTreeMap::new();
        vals.insert("x1".to_string(), Scalar::from_int(3));
        let g = f.eval_partial(&vals).unwrap();
        assert_eq!(g.pole(), 1);
        assert_eq!(g.num().to_string(), "4");
        assert_eq!(g.den().to_string(), "3*x2 + 1");
    }
}
