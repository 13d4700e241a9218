//! The specialization chart and the spectrum of linear forms it produces.
//!
//! The chart carries two substitutions into a thickened tube around the
//! divisor: the moving point x_k = t_k + t_n^a y_k (with the divisor
//! coordinate scaled as x_n = t_n(1 + y_n t_n^a)) and the base point
//! x_k = t_k. Twisting a pole exponent by the difference of its two
//! pullbacks and reading the constant t_n-coefficient over a divisor point
//! yields an exact linear form in y_1..y_n; `as_spectrum` assembles those
//! forms across all summand pairs of a normalized model, with every killed
//! cross pair certified through the one-variable vanishing computation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::fraction::ExpandableFraction;
use crate::algebra::mpoly::MPoly;
use crate::algebra::scalar::Scalar;
use crate::algebra::series::{expand_fraction, TruncatedSeries};
use crate::algebra::upoly::SpectralValue;
use crate::connection::ElementaryModel;
use crate::error::{Error, Result};
use crate::vfiltration;

/// Coordinates for one specialization step: original coordinates x, base
/// coordinates t, fiber coordinates y, and the scaling exponent a.
#[derive(Debug, Clone)]
pub struct DilatationChart {
    x_vars: Vec<String>,
    t_vars: Vec<String>,
    y_vars: Vec<String>,
    a: u32,
}

impl DilatationChart {
    pub fn new(x_vars: &[String], a: u32) -> Result<Self> {
        let n = x_vars.len();
        if n == 0 {
            return Err(Error::bad_parameters("at least one coordinate required".to_string()));
        }
        if a == 0 {
            return Err(Error::bad_parameters("scaling exponent must be positive".to_string()));
        }
        let t_vars: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
        let y_vars: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
        for x in x_vars {
            if t_vars.contains(x) || y_vars.contains(x) {
                return Err(Error::bad_parameters(format!(
                    "coordinate name {x} collides with a chart coordinate"
                )));
            }
        }
        let chart = DilatationChart { x_vars: x_vars.to_vec(), t_vars, y_vars, a };
        // Identity check: the divisor image factors as t_n * u with
        // u = 1 + t_n^a y_n.
        let tn = MPoly::var(chart.divisor_t());
        let u = chart.unit_factor(1);
        let image = chart.p1_map()[chart.x_vars.last().unwrap()].clone();
        if image != tn.mul(&u) {
            return Err(Error::shape("chart identity failed".to_string()));
        }
        Ok(chart)
    }

    pub fn dimension(&self) -> usize {
        self.x_vars.len()
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn t_vars(&self) -> &[String] {
        &self.t_vars
    }

    pub fn y_vars(&self) -> &[String] {
        &self.y_vars
    }

    /// The base coordinate along which expansions happen.
    pub fn divisor_t(&self) -> &str {
        self.t_vars.last().unwrap()
    }

    /// u^k = (1 + t_n^a y_n)^k.
    pub fn unit_factor(&self, k: u32) -> MPoly {
        let n = self.dimension();
        let tn_a = MPoly::monomial(&self.t_vars[n - 1], self.a, Scalar::one());
        MPoly::one()
            .add(&tn_a.mul(&MPoly::var(&self.y_vars[n - 1])))
            .pow(k)
    }

    /// Moving-point substitution: x_k -> t_k + t_n^a y_k for k < n and
    /// x_n -> t_n + t_n^{a+1} y_n.
    fn p1_map(&self) -> BTreeMap<String, MPoly> {
        let n = self.dimension();
        let mut map = BTreeMap::new();
        for k in 0..n {
            let perturb_order = if k + 1 == n { self.a + 1 } else { self.a };
            let base = MPoly::var(&self.t_vars[k]);
            let bump = MPoly::monomial(self.divisor_t(), perturb_order, Scalar::one())
                .mul(&MPoly::var(&self.y_vars[k]));
            map.insert(self.x_vars[k].clone(), base.add(&bump));
        }
        map
    }

    /// Base-point substitution: x_k -> t_k.
    fn p2_map(&self) -> BTreeMap<String, MPoly> {
        self.x_vars
            .iter()
            .zip(&self.t_vars)
            .map(|(x, t)| (x.clone(), MPoly::var(t)))
            .collect()
    }

    /// Moving-point substitution over a fixed divisor point: the base
    /// coordinates t_1..t_{n-1} become numbers.
    fn p1_point_map(&self, point: &[Scalar]) -> BTreeMap<String, MPoly> {
        let n = self.dimension();
        let mut map = BTreeMap::new();
        for k in 0..n {
            let perturb_order = if k + 1 == n { self.a + 1 } else { self.a };
            let base = if k + 1 == n {
                MPoly::var(self.divisor_t())
            } else {
                MPoly::constant(point[k].clone())
            };
            let bump = MPoly::monomial(self.divisor_t(), perturb_order, Scalar::one())
                .mul(&MPoly::var(&self.y_vars[k]));
            map.insert(self.x_vars[k].clone(), base.add(&bump));
        }
        map
    }

    fn p2_point_map(&self, point: &[Scalar]) -> BTreeMap<String, MPoly> {
        let n = self.dimension();
        let mut map = BTreeMap::new();
        for k in 0..n {
            let image = if k + 1 == n {
                MPoly::var(self.divisor_t())
            } else {
                MPoly::constant(point[k].clone())
            };
            map.insert(self.x_vars[k].clone(), image);
        }
        map
    }

    fn check_fraction(&self, f: &ExpandableFraction) -> Result<()> {
        let divisor = self.x_vars.last().unwrap();
        if f.var() != divisor {
            return Err(Error::shape(format!(
                "fraction has pole variable {}, chart divisor is {divisor}",
                f.var()
            )));
        }
        Ok(())
    }

    /// Pull a fraction back along a substitution map, carrying the extra
    /// unit power of u that the divisor image produces.
    fn pull(
        &self,
        f: &ExpandableFraction,
        map: &BTreeMap<String, MPoly>,
        with_unit: bool,
        order: i64,
    ) -> Result<TruncatedSeries> {
        expand_fraction(&self.pull_fraction(f, map, with_unit)?, order)
    }

    fn pull_fraction(
        &self,
        f: &ExpandableFraction,
        map: &BTreeMap<String, MPoly>,
        with_unit: bool,
    ) -> Result<ExpandableFraction> {
        self.check_fraction(f)?;
        let pole = f.pole();
        let mut num = f.num().substitute(map);
        let mut den = f.den().substitute(map);
        if with_unit {
            // x_n^pole = t_n^pole u^pole: the unit power joins whichever side
            // keeps exponents positive.
            if pole >= 0 {
                den = den.mul(&self.unit_factor(pole as u32));
            } else {
                num = num.mul(&self.unit_factor((-pole) as u32));
            }
        }
        Ok(ExpandableFraction::new(self.divisor_t(), num, den)?.shift(-pole))
    }

    /// Series of the moving-point pullback in the base coordinate.
    pub fn pull_p1(&self, f: &ExpandableFraction, order: i64) -> Result<TruncatedSeries> {
        self.pull(f, &self.p1_map(), true, order)
    }

    /// Exact moving-point pullback as a fraction in the base coordinate.
    pub fn pull_fraction_p1(&self, f: &ExpandableFraction) -> Result<ExpandableFraction> {
        self.pull_fraction(f, &self.p1_map(), true)
    }

    /// Series of the base-point pullback.
    pub fn pull_p2(&self, f: &ExpandableFraction, order: i64) -> Result<TruncatedSeries> {
        self.pull(f, &self.p2_map(), false, order)
    }

    /// The twist exponent: moving-point pullback minus base-point pullback.
    pub fn twist_series(&self, f: &ExpandableFraction, order: i64) -> Result<TruncatedSeries> {
        self.pull_p1(f, order)?.sub(&self.pull_p2(f, order)?)
    }

    /// Default expansion order: deep enough for every check downstream, with
    /// slack to detect drift.
    pub fn default_truncation(&self, pole: i64) -> i64 {
        pole.max(1) * (self.a as i64 + 2) + 4
    }

    /// The linear form in y_1..y_n carried by the twist of one exponent over
    /// a divisor point.
    pub fn fiber_linear_form(
        &self,
        f: &ExpandableFraction,
        point: &[Scalar],
    ) -> Result<LinearForm> {
        let order = self.default_truncation(f.pole());
        self.fiber_linear_form_at(f, point, order)
    }

    pub fn fiber_linear_form_at(
        &self,
        f: &ExpandableFraction,
        point: &[Scalar],
        order: i64,
    ) -> Result<LinearForm> {
        self.check_fraction(f)?;
        let n = self.dimension();
        if point.len() != n - 1 {
            return Err(Error::bad_parameters(format!(
                "divisor point must have {} coordinates",
                n - 1
            )));
        }
        let pole = f.pole();
        if (self.a as i64) < pole {
            return Err(Error::PoleTooHigh { pole_order: pole, a: self.a as i64 });
        }
        let order = order.max(1);
        let moving = self
            .pull(f, &self.p1_point_map(point), true, order)
            .map_err(|e| match e {
                Error::NotExpandable { detail } => Error::bad_parameters(format!(
                    "point meets the polar locus of the regular factor: {detail}"
                )),
                other => other,
            })?;
        let base = self.pull(f, &self.p2_point_map(point), false, order)?;
        let twist = moving.sub(&base)?;
        // The twist of a single exponent is regular once a covers the pole.
        if let Some((e, _)) = twist.coefficients().next() {
            if *e < 0 {
                return Err(Error::shape(format!(
                    "twist unexpectedly polar at order {e}"
                )));
            }
        }
        let coeffs = classify_fiber_coefficient(&twist.coefficient(0), &self.y_vars)?;
        Ok(LinearForm {
            coeffs: coeffs.into_iter().map(SpectralValue::Rational).collect(),
            multiplicity: 1,
        })
    }
}

/// Extract the y-coefficients of a fiber value, insisting that it is an
/// honest linear form: any monomial of y-degree two or more is the
/// counterexample witness the pipeline exists to find.
fn classify_fiber_coefficient(c0: &MPoly, y_vars: &[String]) -> Result<Vec<Scalar>> {
    let mut coeffs = vec![Scalar::zero(); y_vars.len()];
    let vars = c0.vars().to_vec();
    let y_index: Vec<Option<usize>> = vars
        .iter()
        .map(|v| y_vars.iter().position(|y| y == v))
        .collect();
    for (mono, c) in c0.terms() {
        let mut y_degree = 0u32;
        let mut which = None;
        for (slot, e) in mono.0.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            match y_index[slot] {
                Some(k) => {
                    y_degree += e;
                    which = Some(k);
                }
                None => {
                    return Err(Error::shape(format!(
                        "fiber coefficient mentions base variable {}",
                        vars[slot]
                    )));
                }
            }
        }
        match y_degree {
            0 => {
                return Err(Error::shape(
                    "fiber coefficient has a constant term; the two pullbacks disagree at y = 0"
                        .to_string(),
                ));
            }
            1 => coeffs[which.unwrap()] += c,
            _ => {
                let monomial = vars
                    .iter()
                    .zip(&mono.0)
                    .filter(|(_, e)| **e > 0)
                    .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                    .collect::<Vec<_>>()
                    .join("*");
                return Err(Error::NonLinearWitness {
                    monomial,
                    detail: format!("coefficient {c} at y-degree {y_degree}"),
                });
            }
        }
    }
    Ok(coeffs)
}

/// A linear form in the fiber coordinates, with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LinearForm {
    /// Coefficients of y_1..y_n.
    pub coeffs: Vec<SpectralValue>,
    pub multiplicity: usize,
}

impl std::fmt::Display for LinearForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let name = format!("y{}", k + 1);
            match c {
                SpectralValue::Rational(r) => {
                    let mag = r.abs();
                    let sign = r < &Scalar::zero();
                    if first {
                        if sign {
                            write!(f, "-")?;
                        }
                    } else if sign {
                        write!(f, " - ")?;
                    } else {
                        write!(f, " + ")?;
                    }
                    if mag == Scalar::one() {
                        write!(f, "{name}")?;
                    } else {
                        write!(f, "{mag}*{name}")?;
                    }
                }
                SpectralValue::Algebraic(tag) => {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "({tag})*{name}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

/// A cross pair removed by an exponent difference that stays polar at the
/// point, with its vanishing certificate.
#[derive(Debug, Clone, Serialize)]
pub struct KilledPair {
    pub class_i: usize,
    pub class_j: usize,
    pub multiplicity: usize,
    /// Deepest pole order of the difference surviving evaluation.
    pub polar_order: i64,
    /// Its coefficient at the point.
    pub witness_coefficient: Scalar,
    /// The one-variable computation confirmed a constant annihilator.
    pub annihilator_constant: bool,
}

/// A cross pair whose exponent difference degenerates at the point; the
/// classification is recorded, never resolved.
#[derive(Debug, Clone, Serialize)]
pub struct TurningPointFlag {
    pub class_i: usize,
    pub class_j: usize,
    pub multiplicity: usize,
    pub detail: String,
}

/// Everything the specialization produces over one divisor point.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub a: u32,
    pub point: Vec<Scalar>,
    pub generic_rank: i64,
    pub classes: usize,
    pub total_pairs: usize,
    pub surviving: Vec<LinearForm>,
    pub killed: Vec<KilledPair>,
    pub flags: Vec<TurningPointFlag>,
}

impl SpectrumReport {
    pub fn surviving_weight(&self) -> usize {
        self.surviving.iter().map(|f| f.multiplicity).sum()
    }

    pub fn killed_weight(&self) -> usize {
        self.killed.iter().map(|k| k.multiplicity).sum()
    }

    pub fn flagged_weight(&self) -> usize {
        self.flags.iter().map(|t| t.multiplicity).sum()
    }
}

/// Specialize a model at scaling exponent a over a divisor point: one linear
/// form (with multiplicity) per diagonal pair of normalized classes, killed
/// or flagged cross pairs, and a full multiplicity accounting.
pub fn as_spectrum(
    model: &ElementaryModel,
    a: u32,
    point: &[Scalar],
    truncation: Option<i64>,
) -> Result<SpectrumReport> {
    let normalized = model.normalize()?;
    let rho = normalized.katz_generic_rank().as_integer()?;
    if rho == 0 {
        return Err(Error::bad_parameters(
            "model is regular along the divisor; nothing to specialize".to_string(),
        ));
    }
    if (a as i64) < rho {
        return Err(Error::RankTooSmall { a: a as i64, rho: rho.to_string() });
    }
    let chart = DilatationChart::new(normalized.vars(), a)?;
    if point.len() + 1 != chart.dimension() {
        return Err(Error::bad_parameters(format!(
            "divisor point must have {} coordinates",
            chart.dimension() - 1
        )));
    }
    let bindings: BTreeMap<String, Scalar> = normalized
        .vars()
        .iter()
        .zip(point)
        .map(|(v, p)| (v.clone(), p.clone()))
        .collect();

    let classes = normalized.summands();
    let mut merged: BTreeMap<Vec<SpectralValue>, usize> = BTreeMap::new();
    let mut killed = Vec::new();
    let mut flags = Vec::new();
    for (i, si) in classes.iter().enumerate() {
        for (j, sj) in classes.iter().enumerate() {
            let mult = si.reg.rank() * sj.reg.rank();
            if i == j {
                let order = truncation.unwrap_or_else(|| chart.default_truncation(si.phi.pole()));
                let form = chart.fiber_linear_form_at(&si.phi, point, order)?;
                *merged.entry(form.coeffs).or_insert(0) += mult;
                continue;
            }
            let theta = si.phi.sub(&sj.phi)?;
            let polar = normalized.polar_part(&theta)?;
            let mut evaluated: Vec<(u32, Scalar)> = Vec::new();
            for (k, coeff) in &polar {
                let value = coeff.eval(&bindings)?;
                if !value.is_zero() {
                    evaluated.push((*k as u32, value));
                }
            }
            if evaluated.is_empty() {
                flags.push(TurningPointFlag {
                    class_i: i,
                    class_j: j,
                    multiplicity: mult,
                    detail: "exponent difference loses its pole at this point".to_string(),
                });
                continue;
            }
            let certified = vfiltration::psi_vanishes_for_polar(&evaluated)?;
            if !certified {
                return Err(Error::shape(
                    "one-variable vanishing certificate failed on a polar difference".to_string(),
                ));
            }
            let (order, coeff) = evaluated.last().unwrap().clone();
            killed.push(KilledPair {
                class_i: i,
                class_j: j,
                multiplicity: mult,
                polar_order: order as i64,
                witness_coefficient: coeff,
                annihilator_constant: certified,
            });
        }
    }
    let surviving: Vec<LinearForm> = merged
        .into_iter()
        .map(|(coeffs, multiplicity)| LinearForm { coeffs, multiplicity })
        .collect();
    let total_rank: usize = classes.iter().map(|s| s.reg.rank()).sum();
    let report = SpectrumReport {
        a,
        point: point.to_vec(),
        generic_rank: rho,
        classes: classes.len(),
        total_pairs: total_rank * total_rank,
        surviving,
        killed,
        flags,
    };
    let accounted =
        report.surviving_weight() + report.killed_weight() + report.flagged_weight();
    if accounted != report.total_pairs {
        return Err(Error::shape(format!(
            "pair accounting mismatch: {accounted} of {} pairs",
            report.total_pairs
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{RegularPart, Summand};
    use crate::parse::parse_fraction;

    fn names(vars: &[&str]) -> Vec<String> {
        vars.iter().map(|s| s.to_string()).collect()
    }

    fn scalar(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn rank_one(vars: &[&str], phi: &str) -> ElementaryModel {
        let v = names(vars);
        let f = parse_fraction(phi, vars, vars.last().unwrap()).unwrap();
        ElementaryModel::new(v, vec![Summand { phi: f, reg: RegularPart::trivial() }]).unwrap()
    }

    #[test]
    fn pullback_of_simple_pole() {
        let chart = DilatationChart::new(&names(&["x1", "x2"]), 1).unwrap();
        let phi = parse_fraction("1/x2", &["x1", "x2"], "x2").unwrap();
        let s = chart.pull_p1(&phi, 2).unwrap();
        // 1/(t2 (1 + y2 t2)) = t2^{-1} - y2 + y2^2 t2 - ...
        assert_eq!(s.coefficient(-1), MPoly::one());
        assert_eq!(s.coefficient(0), MPoly::var("y2").neg());
        assert_eq!(s.coefficient(1), MPoly::var("y2").mul(&MPoly::var("y2")));
        let base = chart.pull_p2(&phi, 2).unwrap();
        assert_eq!(base.coefficient(-1), MPoly::one());
        assert_eq!(base.coefficient(0), MPoly::zero());
    }

    #[test]
    fn twist_is_regular_when_a_covers_the_pole() {
        let chart = DilatationChart::new(&names(&["x1", "x2"]), 1).unwrap();
        let phi = parse_fraction("1/x2", &["x1", "x2"], "x2").unwrap();
        let t = chart.twist_series(&phi, 3).unwrap();
        assert!(t.coefficients().all(|(e, _)| *e >= 0));
        assert_eq!(t.coefficient(0), MPoly::var("y2").neg());
    }

    #[test]
    fn fiber_form_of_simple_pole_is_minus_yn() {
        let chart = DilatationChart::new(&names(&["x1", "x2"]), 1).unwrap();
        let phi = parse_fraction("1/x2", &["x1", "x2"], "x2").unwrap();
        let form = chart.fiber_linear_form(&phi, &[scalar(3)]).unwrap();
        assert_eq!(form.to_string(), "-y2");
    }

    /// Independent oracle: for f / x_n^r the fiber form over (x', 0) is
    /// sum_{i<n} df/dx_i (x', 0) y_i - r f(x', 0) y_n, by hand-differentiating
    /// the polynomial.
    fn oracle_form(
        vars: &[&str],
        f: &MPoly,
        r: u32,
        point: &[Scalar],
    ) -> Vec<Scalar> {
        let n = vars.len();
        let mut bindings: BTreeMap<String, Scalar> = vars
            .iter()
            .take(n - 1)
            .map(|v| v.to_string())
            .zip(point.iter().cloned())
            .collect();
        bindings.insert(vars[n - 1].to_string(), Scalar::zero());
        let mut out = Vec::new();
        for v in vars.iter().take(n - 1) {
            out.push(f.derivative(v).eval(&bindings).unwrap());
        }
        let fval = f.eval(&bindings).unwrap();
        out.push(-(&Scalar::from_int(r as i64) * &fval));
        out
    }

    #[test]
    fn fiber_form_matches_differentiation_oracle() {
        let vars = ["x1", "x2", "x3"];
        // f = x1^2 + 3 x1 x2 - x2^2 x3 + 5
        let f = parse_fraction("x1^2 + 3*x1*x2 - x2^2*x3 + 5", &vars, "x3")
            .unwrap()
            .to_mpoly()
            .unwrap();
        for r in [1u32, 2] {
            let phi = ExpandableFraction::from_mpoly("x3", f.clone()).shift(-(r as i64));
            for point in [&[scalar(1), scalar(2)], &[scalar(0), scalar(-1)]] {
                let chart = DilatationChart::new(&names(&vars), r).unwrap();
                let form = chart.fiber_linear_form(&phi, point).unwrap();
                let expect = oracle_form(&vars, &f, r, point);
                let got: Vec<Scalar> = form
                    .coeffs
                    .iter()
                    .map(|c| c.as_rational().unwrap().clone())
                    .collect();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn fiber_form_vanishes_above_the_pole() {
        let vars = ["x1", "x2"];
        let phi = parse_fraction("(x1 + 2)/x2", &vars, "x2").unwrap();
        let chart = DilatationChart::new(&names(&vars), 2).unwrap();
        let form = chart.fiber_linear_form(&phi, &[scalar(1)]).unwrap();
        assert_eq!(form.to_string(), "0");
    }

    #[test]
    fn pole_above_scaling_exponent_is_refused() {
        let vars = ["x1", "x2"];
        let phi = parse_fraction("1/x2^3", &vars, "x2").unwrap();
        let chart = DilatationChart::new(&names(&vars), 2).unwrap();
        let err = chart.fiber_linear_form(&phi, &[scalar(1)]).unwrap_err();
        assert!(matches!(err, Error::PoleTooHigh { pole_order: 3, a: 2 }));
    }

    #[test]
    fn nonlinear_coefficient_is_a_witness() {
        let c0 = MPoly::var("y1").mul(&MPoly::var("y2"));
        let err = classify_fiber_coefficient(&c0, &names(&["y1", "y2"])).unwrap_err();
        match err {
            Error::NonLinearWitness { monomial, .. } => assert_eq!(monomial, "y1*y2"),
            other => panic!("expected witness, got {other}"),
        }
    }

    #[test]
    fn spectrum_of_two_distinct_exponents() {
        let vars = ["x1", "x2"];
        let v = names(&vars);
        let s1 = Summand {
            phi: parse_fraction("1/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let s2 = Summand {
            phi: parse_fraction("2/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let model = ElementaryModel::new(v, vec![s1, s2]).unwrap();
        let report = as_spectrum(&model, 1, &[scalar(1)], None).unwrap();
        assert_eq!(report.total_pairs, 4);
        assert_eq!(report.surviving_weight(), 2);
        assert_eq!(report.killed_weight(), 2);
        assert!(report.flags.is_empty());
        assert!(report.killed.iter().all(|k| k.annihilator_constant));
        // The diagonal forms scale with the exponents: -y2 and -2 y2.
        let rendered: Vec<String> =
            report.surviving.iter().map(|f| f.to_string()).collect();
        assert_eq!(rendered, vec!["-2*y2".to_string(), "-y2".to_string()]);
    }

    #[test]
    fn turning_point_is_flagged_not_resolved() {
        let vars = ["x1", "x2"];
        let v = names(&vars);
        let s1 = Summand {
            phi: parse_fraction("x1/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let s2 = Summand {
            phi: parse_fraction("2*x1/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let model = ElementaryModel::new(v, vec![s1, s2]).unwrap();
        // At x1 = 0 the difference x1/x2 loses its pole: flagged.
        let at_zero = as_spectrum(&model, 1, &[scalar(0)], None).unwrap();
        assert_eq!(at_zero.flagged_weight(), 2);
        assert!(at_zero.killed.is_empty());
        // At x1 = 1 it stays polar: killed.
        let at_one = as_spectrum(&model, 1, &[scalar(1)], None).unwrap();
        assert_eq!(at_one.killed_weight(), 2);
        assert!(at_one.flags.is_empty());
    }

    #[test]
    fn merged_classes_share_one_form() {
        // Exponents with equal principal parts collapse to one class of
        // rank 2, so all four pairs survive on the diagonal.
        let vars = ["x1", "x2"];
        let v = names(&vars);
        let s1 = Summand {
            phi: parse_fraction("1/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let s2 = Summand {
            phi: parse_fraction("1/x2 + x1", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let model = ElementaryModel::new(v, vec![s1, s2]).unwrap();
        let report = as_spectrum(&model, 1, &[scalar(2)], None).unwrap();
        assert_eq!(report.classes, 1);
        assert_eq!(report.surviving_weight(), 4);
        assert_eq!(report.total_pairs, 4);
    }

    #[test]
    fn small_scaling_exponent_is_refused() {
        let model = rank_one(&["x1", "x2"], "1/x2^2");
        let err = as_spectrum(&model, 1, &[scalar(1)], None).unwrap_err();
        assert!(matches!(err, Error::RankTooSmall { a: 1, .. }));
    }

    #[test]
    fn regular_model_is_refused() {
        let model = rank_one(&["x1", "x2"], "x1 + x2");
        let err = as_spectrum(&model, 1, &[scalar(1)], None).unwrap_err();
        assert!(matches!(err, Error::BadParameters { .. }));
    }

    #[test]
    fn truncation_slack_does_not_change_the_twist() {
        let vars = ["x1", "x2"];
        let phi = parse_fraction("(x1^2 - 3)/x2^2", &vars, "x2").unwrap();
        let chart = DilatationChart::new(&names(&vars), 2).unwrap();
        let n = chart.default_truncation(phi.pole());
        let tight = chart.twist_series(&phi, n).unwrap();
        let slack = chart.twist_series(&phi, n + 4).unwrap();
        for (e, c) in tight.coefficients() {
            assert_eq!(&slack.coefficient(*e), c);
        }
    }

    #[test]
    fn single_coordinate_chart() {
        let vars = ["x1"];
        let phi = parse_fraction("1/x1", &vars, "x1").unwrap();
        let chart = DilatationChart::new(&names(&vars), 1).unwrap();
        let form = chart.fiber_linear_form(&phi, &[]).unwrap();
        assert_eq!(form.to_string(), "-y1");
    }

    #[test]
    fn spectrum_weights_ranked_classes() {
        let vars = ["x1", "x2"];
        let v = names(&vars);
        let reg2 = RegularPart::new(crate::algebra::matrix::Matrix::from_int_rows(&[
            &[0, 1],
            &[0, 0],
        ]))
        .unwrap();
        let s1 = Summand {
            phi: parse_fraction("1/x2", &vars, "x2").unwrap(),
            reg: reg2,
        };
        let s2 = Summand {
            phi: parse_fraction("-1/x2", &vars, "x2").unwrap(),
            reg: RegularPart::trivial(),
        };
        let model = ElementaryModel::new(v, vec![s1, s2]).unwrap();
        let report = as_spectrum(&model, 1, &[scalar(1)], None).unwrap();
        assert_eq!(report.total_pairs, 9);
        assert_eq!(report.surviving_weight(), 5); // 2^2 + 1
        assert_eq!(report.killed_weight(), 4); // 2*1 both ways
    }
}
