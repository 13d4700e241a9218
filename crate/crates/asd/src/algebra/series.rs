//! Truncated Laurent series in one distinguished variable, with polynomial
//! coefficients in the remaining variables, plus joint expansion of a
//! fraction in a whole set of variables.
//!
//! Soundness convention: a series knows its coefficients exactly for all
//! exponents strictly below `order`. Arithmetic propagates the largest order
//! that stays exact, so a computed coefficient is never silently wrong; a
//! too-small truncation shows up as a missing range, not a bad value.

use std::collections::{BTreeMap, BTreeSet};

use super::fraction::ExpandableFraction;
use super::mpoly::MPoly;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    var: String,
    /// Exponents strictly below this are exact.
    order: i64,
    /// Nonzero coefficients only, all keys < order.
    coeffs: BTreeMap<i64, MPoly>,
}

impl TruncatedSeries {
    pub fn zero(var: &str, order: i64) -> Self {
        TruncatedSeries { var: var.to_string(), order, coeffs: BTreeMap::new() }
    }

    pub fn from_mpoly(var: &str, p: &MPoly, order: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        let top = p.degree_in(var).unwrap_or(0) as i64;
        for k in 0..=top {
            if k >= order {
                break;
            }
            let c = p.coefficient_of(var, k as u32);
            if !c.is_zero() {
                coeffs.insert(k, c);
            }
        }
        TruncatedSeries { var: var.to_string(), order, coeffs }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coefficient(&self, k: i64) -> MPoly {
        self.coeffs.get(&k).cloned().unwrap_or_else(MPoly::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&i64, &MPoly)> {
        self.coeffs.iter()
    }

    /// Lowest exponent with a nonzero tracked coefficient; `order` when all
    /// tracked coefficients vanish (the sound lower bound for the tail).
    pub fn valuation_bound(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(self.order)
    }

    pub fn is_zero_tracked(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn set(&mut self, k: i64, c: MPoly) {
        if k >= self.order {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        TruncatedSeries {
            var: self.var.clone(),
            order,
            coeffs: self.coeffs.iter().filter(|(&k, _)| k < order).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    fn check_same_var(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::shape(format!(
                "mixed series variables {} and {}",
                self.var, other.var
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        let order = self.order.min(other.order);
        let mut out = TruncatedSeries::zero(&self.var, order);
        let keys: BTreeSet<i64> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        for k in keys {
            out.set(k, self.coefficient(k).add(&other.coefficient(k)));
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            var: self.var.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        // Unknown tail of self (exponent >= order) meets other at valuation
        // v2, so products are reliable strictly below order1 + v2, and
        // symmetrically.
        let order = (self.order + other.valuation_bound())
            .min(other.order + self.valuation_bound());
        let mut out = TruncatedSeries::zero(&self.var, order);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k = k1 + k2;
                if k >= order {
                    continue;
                }
                out.set(k, out.coefficient(k).add(&c1.mul(c2)));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, p: &MPoly) -> Self {
        let mut out = TruncatedSeries::zero(&self.var, self.order);
        for (k, c) in &self.coeffs {
            out.set(*k, c.mul(p));
        }
        out
    }

    /// Multiply by var^k.
    pub fn shift(&self, k: i64) -> Self {
        TruncatedSeries {
            var: self.var.clone(),
            order: self.order + k,
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// d/d(var): exponents drop by one; term order - 1 stays unknown, so the
    /// result is exact below order - 1.
    pub fn derivative_main(&self) -> Self {
        let mut out = TruncatedSeries::zero(&self.var, self.order - 1);
        for (k, c) in &self.coeffs {
            if *k == 0 {
                continue;
            }
            out.set(k - 1, c.scale(&Scalar::from_int(*k)));
        }
        out
    }

    /// Derivative with respect to a coefficient variable.
    pub fn derivative_other(&self, wrt: &str) -> Self {
        let mut out = TruncatedSeries::zero(&self.var, self.order);
        for (k, c) in &self.coeffs {
            out.set(*k, c.derivative(wrt));
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&MPoly) -> MPoly) -> Self {
        let mut out = TruncatedSeries::zero(&self.var, self.order);
        for (k, c) in &self.coeffs {
            out.set(*k, f(c));
        }
        out
    }
}

/// Laurent-expand a fraction in its pole variable, exact strictly below
/// `order`. Requires the denominator unit to be constant when the pole
/// variable is set to zero; otherwise the coefficients would not be
/// polynomials in the remaining variables.
pub fn expand_fraction(f: &ExpandableFraction, order: i64) -> Result<TruncatedSeries> {
    let var = f.var().to_string();
    let den = f.den();
    if !den.eval_partial(&unit_point(&var)).is_constant() {
        return Err(Error::NotExpandable {
            detail: format!(
                "denominator {den} is not a unit in the {var}-adic sense"
            ),
        });
    }
    // den = 1 - e with every term of e divisible by var.
    let e = MPoly::one().sub(den);
    // 1/den = sum e^m; e^m has valuation >= m in var.
    let inner_order = order + f.pole();
    let mut inv = TruncatedSeries::zero(&var, inner_order);
    if inner_order > 0 {
        let e_series = TruncatedSeries::from_mpoly(&var, &e, inner_order);
        let mut power = TruncatedSeries::from_mpoly(&var, &MPoly::one(), inner_order);
        let mut m = 0i64;
        loop {
            inv = inv.add(&power)?;
            m += 1;
            if m >= inner_order {
                break;
            }
            power = power.mul(&e_series)?.truncate(inner_order);
            if power.is_zero_tracked() {
                break;
            }
        }
        // All the truncations above were at inner_order from exact inputs.
        inv = TruncatedSeries {
            var: var.clone(),
            order: inner_order,
            coeffs: inv.coefficients().map(|(k, c)| (*k, c.clone())).collect(),
        };
    }
    let num = TruncatedSeries::from_mpoly(&var, f.num(), inner_order);
    let prod = num.mul(&inv)?;
    let mut out = prod.shift(-f.pole());
    // num and 1/den are exact below inner_order by construction, so the
    // product is exact below inner_order too; record the full guarantee.
    out = TruncatedSeries {
        var,
        order: order.max(out.order()),
        coeffs: out
            .coefficients()
            .filter(|(&k, _)| k < order)
            .map(|(k, c)| (*k, c.clone()))
            .collect(),
    };
    Ok(out.truncate(order))
}

fn unit_point(var: &str) -> BTreeMap<String, Scalar> {
    let mut m = BTreeMap::new();
    m.insert(var.to_string(), Scalar::zero());
    m
}

/// Jointly expand a fraction in a set of variables: the result maps the
/// exponent vector (in the sorted order of `tvars`) to its coefficient, a
/// polynomial in the remaining variables. Exact for all terms whose total
/// degree in `tvars` is at most `window` (counting the pole as negative
/// degree). Requires every non-constant term of the denominator unit to
/// involve at least one of `tvars`.
pub fn expand_multi(
    f: &ExpandableFraction,
    tvars: &BTreeSet<String>,
    window: i64,
) -> Result<BTreeMap<Vec<i64>, MPoly>> {
    if !tvars.contains(f.var()) {
        return Err(Error::bad_parameters(format!(
            "pole variable {} must be part of the expansion set",
            f.var()
        )));
    }
    let den = f.den();
    let e = MPoly::one().sub(den);
    let has_tfree_term = e.terms().any(|(mono, _)| {
        e.vars()
            .iter()
            .enumerate()
            .all(|(vi, v)| !tvars.contains(v) || mono.0[vi] == 0)
    });
    if has_tfree_term {
        // Some term of 1 - den avoids all expansion variables entirely, so
        // inverting would produce non-polynomial coefficients.
        return Err(Error::NotExpandable {
            detail: format!(
                "denominator {den} has unit part not supported on the expansion variables"
            ),
        });
    }
    // Safe bound: e^m has t-degree >= m.
    let degree_cap = window + f.pole().max(0);
    let mut inv = MPoly::one();
    let mut power = MPoly::one();
    let mut m = 0i64;
    while m < degree_cap {
        power = truncate_tdeg(&power.mul(&e), tvars, degree_cap);
        if power.is_zero() {
            break;
        }
        inv = inv.add(&power);
        m += 1;
    }
    let full = truncate_tdeg(&f.num().mul(&inv), tvars, degree_cap);
    // Split by exponent vector over tvars.
    let names: Vec<String> = tvars.iter().cloned().collect();
    let pole_idx = names.iter().position(|v| v == f.var()).expect("pole in set");
    let mut table: BTreeMap<Vec<i64>, MPoly> = BTreeMap::new();
    for (mono, coeff) in full.terms() {
        let mut key = vec![0i64; names.len()];
        let mut rest = MPoly::constant(coeff.clone());
        for (vi, vname) in full.vars().iter().enumerate() {
            let exp = mono.0[vi];
            if exp == 0 {
                continue;
            }
            if let Some(pos) = names.iter().position(|t| t == vname) {
                key[pos] = exp as i64;
            } else {
                rest = rest.mul(&MPoly::var(vname).pow(exp));
            }
        }
        key[pole_idx] -= f.pole();
        let entry = table.remove(&key).unwrap_or_else(MPoly::zero).add(&rest);
        if !entry.is_zero() {
            table.insert(key, entry);
        }
    }
    // Drop terms beyond the exactness window.
    table.retain(|key, _| key.iter().sum::<i64>() <= window);
    Ok(table)
}

fn truncate_tdeg(p: &MPoly, tvars: &BTreeSet<String>, cap: i64) -> MPoly {
    let mut out = MPoly::zero();
    for (mono, coeff) in p.terms() {
        let mut deg = 0i64;
        for (vi, vname) in p.vars().iter().enumerate() {
            if tvars.contains(vname) {
                deg += mono.0[vi] as i64;
            }
        }
        if deg <= cap {
            let mut term = MPoly::constant(coeff.clone());
            for (vi, vname) in p.vars().iter().enumerate() {
                if mono.0[vi] > 0 {
                    term = term.mul(&MPoly::var(vname).pow(mono.0[vi]));
                }
            }
            out = out.add(&term);
        }
    }
    out
}
