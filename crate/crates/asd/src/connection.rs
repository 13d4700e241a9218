//! Connections on affine n-space with poles along the hyperplane cut out by
//! the last coordinate.
//!
//! Two presentations coexist. An `ElementaryModel` is a direct sum of
//! twists E^phi tensored with a regular part given by a constant residue
//! matrix. A `MatrixConnection` is the raw form: one coefficient matrix per
//! coordinate, entries rational with poles confined to the divisor
//! coordinate. The generic slope (`katz_generic_rank`) is the largest pole
//! order for elementary models, and is computed through a cyclic vector and
//! the Newton polygon of the resulting scalar operator for matrix
//! connections.

use std::collections::BTreeMap;

use crate::algebra::fraction::ExpandableFraction;
use crate::algebra::matrix::Matrix;
use crate::algebra::mpoly::MPoly;
use crate::algebra::ratfun::RatFun;
use crate::algebra::scalar::Scalar;
use crate::algebra::series::expand_fraction;
use crate::error::{Error, Result};

/// Regular singular factor: the constant residue matrix of a logarithmic
/// connection along the divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularPart {
    residue: Matrix<Scalar>,
}

impl RegularPart {
    pub fn new(residue: Matrix<Scalar>) -> Result<Self> {
        residue.require_square()?;
        if residue.rows() == 0 {
            return Err(Error::shape("regular part must have positive rank".to_string()));
        }
        Ok(RegularPart { residue })
    }

    pub fn trivial() -> Self {
        RegularPart { residue: Matrix::zero(1, 1) }
    }

    pub fn rank(&self) -> usize {
        self.residue.rows()
    }

    pub fn residue(&self) -> &Matrix<Scalar> {
        &self.residue
    }

    /// Contravariant dual: negated transpose.
    pub fn dual(&self) -> Self {
        RegularPart { residue: self.residue.transpose().neg() }
    }

    /// Tensor with another regular part: residues add across the product.
    pub fn tensor(&self, other: &Self) -> Self {
        RegularPart {
            residue: self
                .residue
                .kron_sum(&other.residue)
                .expect("square residues"),
        }
    }

    /// Block direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.rank() + other.rank();
        let mut m = Matrix::zero(n, n);
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                m.set(i, j, self.residue.get(i, j).clone());
            }
        }
        for i in 0..other.rank() {
            for j in 0..other.rank() {
                m.set(self.rank() + i, self.rank() + j, other.residue.get(i, j).clone());
            }
        }
        RegularPart { residue: m }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub phi: ExpandableFraction,
    pub reg: RegularPart,
}

/// Direct sum of elementary twists with regular factors, over coordinates
/// `vars` with the last one cutting out the divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryModel {
    vars: Vec<String>,
    summands: Vec<Summand>,
}

impl ElementaryModel {
    pub fn new(vars: Vec<String>, summands: Vec<Summand>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::bad_parameters("at least one coordinate required".to_string()));
        }
        let divisor = vars.last().unwrap().clone();
        for s in &summands {
            if s.phi.var() != divisor {
                return Err(Error::bad_parameters(format!(
                    "summand pole variable {} is not the divisor coordinate {divisor}",
                    s.phi.var()
                )));
            }
            // Laurent coefficients of phi must be polynomial in the
            // remaining coordinates; probing one coefficient runs the full
            // unit check.
            expand_fraction(&s.phi, 1 - s.phi.pole())?;
            for v in s.phi.num().vars().iter().chain(s.phi.den().vars().iter()) {
                if !vars.contains(v) {
                    return Err(Error::UnknownVariable { name: v.clone() });
                }
            }
        }
        if summands.is_empty() {
            return Err(Error::bad_parameters("empty model".to_string()));
        }
        Ok(ElementaryModel { vars, summands })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn divisor_var(&self) -> &str {
        self.vars.last().unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn total_rank(&self) -> usize {
        self.summands.iter().map(|s| s.reg.rank()).sum()
    }

    /// Principal part of a twist exponent: pairs (k, coefficient) meaning
    /// coefficient * divisor^{-k}, k >= 1, sorted by k.
    pub fn polar_part(&self, phi: &ExpandableFraction) -> Result<Vec<(i64, MPoly)>> {
        let series = expand_fraction(phi, 0)?;
        let mut out: Vec<(i64, MPoly)> = series
            .coefficients()
            .map(|(e, c)| (-e, c.clone()))
            .collect();
        out.sort_by_key(|(k, _)| *k);
        Ok(out)
    }

    pub fn dual(&self) -> Self {
        ElementaryModel {
            vars: self.vars.clone(),
            summands: self
                .summands
                .iter()
                .map(|s| Summand { phi: s.phi.neg(), reg: s.reg.dual() })
                .collect(),
        }
    }

    /// Largest pole order among the twists, clamped at zero.
    pub fn katz_generic_rank(&self) -> KatzRank {
        let rho = self
            .summands
            .iter()
            .map(|s| s.phi.pole().max(0))
            .max()
            .unwrap_or(0);
        KatzRank::from_scalar(Scalar::from_int(rho))
    }

    /// Merge summands whose twists share a principal part. The class keeps
    /// the first member's full exponent (twists differing by a function
    /// regular along the divisor specialize identically) and direct-sums the
    /// regular parts in input order.
    pub fn normalize(&self) -> Result<Self> {
        let mut classes: Vec<(Vec<(i64, MPoly)>, Summand)> = Vec::new();
        for s in &self.summands {
            let key = self.polar_part(&s.phi)?;
            if let Some((_, merged)) = classes.iter_mut().find(|(k, _)| *k == key) {
                merged.reg = merged.reg.direct_sum(&s.reg);
            } else {
                classes.push((key, s.clone()));
            }
        }
        Ok(ElementaryModel {
            vars: self.vars.clone(),
            summands: classes.into_iter().map(|(_, s)| s).collect(),
        })
    }

    /// Fiberwise Hom(second, first): one summand per pair, with exponent
    /// difference and tensor-with-dual regular part, then normalized.
    pub fn hom_model(m1: &Self, m2: &Self) -> Result<Self> {
        if m1.vars != m2.vars {
            return Err(Error::bad_parameters(
                "hom requires models over the same coordinates".to_string(),
            ));
        }
        let mut summands = Vec::new();
        for s1 in &m1.summands {
            for s2 in &m2.summands {
                summands.push(Summand {
                    phi: s1.phi.sub(&s2.phi)?,
                    reg: s1.reg.tensor(&s2.reg.dual()),
                });
            }
        }
        ElementaryModel::new(m1.vars.clone(), summands)?.normalize()
    }

    /// Recentre the coordinates along the divisor at the given point:
    /// x_i -> x_i + p_i for i < n. The divisor coordinate is untouched.
    pub fn translate(&self, point: &[Scalar]) -> Result<Self> {
        if point.len() != self.vars.len() - 1 {
            return Err(Error::bad_parameters(format!(
                "point must have {} coordinates",
                self.vars.len() - 1
            )));
        }
        let mut map = BTreeMap::new();
        for (v, p) in self.vars.iter().zip(point) {
            map.insert(
                v.clone(),
                MPoly::var(v).add(&MPoly::constant(p.clone())),
            );
        }
        let divisor = self.divisor_var();
        let mut summands = Vec::new();
        for s in &self.summands {
            let num = s.phi.num().substitute(&map);
            let den = s.phi.den().substitute(&map);
            let mut phi = ExpandableFraction::new(divisor, num, den)?;
            phi = phi.shift(-s.phi.pole());
            summands.push(Summand { phi, reg: s.reg.clone() });
        }
        ElementaryModel::new(self.vars.clone(), summands)
    }
}

/// Raw connection: coefficient matrices A_1..A_n over rational functions
/// with poles confined to the divisor coordinate.
#[derive(Debug, Clone)]
pub struct MatrixConnection {
    vars: Vec<String>,
    mats: Vec<Matrix<RatFun>>,
}

impl MatrixConnection {
    pub fn new(vars: Vec<String>, mats: Vec<Matrix<RatFun>>) -> Result<Self> {
        if vars.is_empty() || mats.len() != vars.len() {
            return Err(Error::bad_parameters(
                "need one coefficient matrix per coordinate".to_string(),
            ));
        }
        let rank = mats[0].rows();
        let divisor = vars.last().unwrap();
        for m in &mats {
            m.require_square()?;
            if m.rows() != rank {
                return Err(Error::shape("coefficient matrices of mixed rank".to_string()));
            }
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    // Confirms poles are confined to the divisor coordinate.
                    m.get(i, j).to_fraction(divisor)?;
                }
            }
        }
        Ok(MatrixConnection { vars, mats })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn divisor_var(&self) -> &str {
        self.vars.last().unwrap()
    }

    pub fn rank(&self) -> usize {
        self.mats[0].rows()
    }

    pub fn matrices(&self) -> &[Matrix<RatFun>] {
        &self.mats
    }

    /// Zero exactly when d + sum A_i dx_i is flat. Returns the first pair
    /// (i, j) whose curvature component does not vanish.
    pub fn check_integrability(&self) -> Result<Option<(usize, usize)>> {
        let n = self.vars.len();
        for i in 0..n {
            for j in i + 1..n {
                let di_aj = self.mats[j].try_map(|f| Ok(f.derivative(&self.vars[i])))?;
                let dj_ai = self.mats[i].try_map(|f| Ok(f.derivative(&self.vars[j])))?;
                let bracket = self.mats[i]
                    .mul(&self.mats[j])?
                    .sub(&self.mats[j].mul(&self.mats[i])?)?;
                let curv = di_aj.sub(&dj_ai)?.add(&bracket)?;
                if !curv.is_zero() {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// Generic slope along the divisor via a cyclic vector for the
    /// one-variable system over the parameter field, then the largest
    /// Newton-polygon slope of the scalar operator.
    pub fn katz_generic_rank(&self) -> Result<KatzRank> {
        if let Some((i, j)) = self.check_integrability()? {
            return Err(Error::bad_parameters(format!(
                "connection is not integrable: curvature in directions {i}, {j}"
            )));
        }
        let r = self.rank();
        let an = &self.mats[self.vars.len() - 1];
        let divisor = self.divisor_var().to_string();
        let apply = |v: &Vec<RatFun>| -> Vec<RatFun> {
            let mut out = an.mul_vec(v).expect("square system");
            for (k, entry) in out.iter_mut().enumerate() {
                *entry = entry.add(&v[k].derivative(&divisor));
            }
            out
        };
        let mut attempts = 0usize;
        for cand in cyclic_candidates(r, &divisor) {
            if attempts == 25 {
                break;
            }
            attempts += 1;
            // Iterated derivatives w, Dw, D^2 w, ...
            let mut iterates = vec![cand.clone()];
            for _ in 0..r {
                let last = iterates.last().unwrap();
                iterates.push(apply(last));
            }
            let basis_mat = Matrix::from_rows(iterates[..r].to_vec())?.transpose();
            if basis_mat.rank() < r {
                continue;
            }
            let coeffs = basis_mat
                .solve(&iterates[r])?
                .expect("full-rank system is consistent");
            // D^r w = sum coeffs[k] D^k w, so the monic scalar operator has
            // a_k = -coeffs[k].
            let mut best: Option<Scalar> = None;
            for (k, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let v = c
                    .valuation_in(&divisor)
                    .expect("nonzero coefficient has a valuation");
                // Slope contribution of the theta-form coefficient.
                let gap = (r - k) as i64;
                let slope = Scalar::from_pair(-v - gap, gap)?;
                if best.as_ref().map(|b| slope > *b).unwrap_or(true) {
                    best = Some(slope);
                }
            }
            let rho = best
                .filter(|b| b > &Scalar::zero())
                .unwrap_or_else(Scalar::zero);
            return Ok(KatzRank::from_scalar(rho));
        }
        Err(Error::CyclicVectorFailure { attempts })
    }

    /// Reconstruct the elementary model of a rank-one connection d + d(phi)
    /// plus a constant residue term along the divisor. Fails with
    /// `Unsupported` when the entries do not integrate to such a shape.
    pub fn to_elementary_rank_one(&self) -> Result<ElementaryModel> {
        if self.rank() != 1 {
            return Err(Error::unsupported(
                "elementary reconstruction only implemented for rank one".to_string(),
            ));
        }
        let divisor = self.divisor_var().to_string();
        let n = self.vars.len();
        let entries: Vec<ExpandableFraction> = self
            .mats
            .iter()
            .map(|m| m.get(0, 0).to_fraction(&divisor))
            .collect::<Result<_>>()?;
        for e in &entries {
            if !e.den_is_one() {
                return Err(Error::unsupported(
                    "rank-one reconstruction needs pure Laurent coefficients".to_string(),
                ));
            }
        }
        // Integrate the divisor-direction coefficient in the divisor
        // variable, splitting off the logarithmic term as the residue.
        let an = &entries[n - 1];
        let series = expand_fraction(an, an_poly_bound(an))?;
        let mut phi = ExpandableFraction::zero(&divisor);
        let mut residue = Scalar::zero();
        for (e, c) in series.coefficients() {
            if *e == -1 {
                let Some(cst) = c.as_constant() else {
                    return Err(Error::unsupported(
                        "logarithmic coefficient must be constant for a regular residue"
                            .to_string(),
                    ));
                };
                residue = cst;
                continue;
            }
            let denom = Scalar::from_int(e + 1);
            let term = ExpandableFraction::from_mpoly(&divisor, c.scale(&denom.recip()?))
                .shift(e + 1);
            phi = phi.add(&term)?;
        }
        // Verify every coordinate direction against d(phi).
        for (i, var) in self.vars.iter().enumerate() {
            let expected = phi.derivative(var);
            let mut target = entries[i].clone();
            if i == n - 1 && !residue.is_zero() {
                let log_term = ExpandableFraction::from_scalar(&divisor, residue.clone())
                    .shift(-1);
                target = target.sub(&log_term)?;
            }
            if !expected.value_eq(&target) {
                return Err(Error::unsupported(format!(
                    "coefficient in direction {var} is not the gradient of a Laurent exponent"
                )));
            }
        }
        let reg = RegularPart::new(Matrix::new(1, 1, vec![residue])?)?;
        ElementaryModel::new(self.vars.clone(), vec![Summand { phi, reg }])
    }
}

/// Truncation comfortably past the polynomial tail of a Laurent entry.
fn an_poly_bound(f: &ExpandableFraction) -> i64 {
    f.num().degree_in(f.var()).unwrap_or(0) as i64 + 2
}

/// Deterministic cyclic vector candidates: coordinate vectors, prefix sums,
/// geometric combinations with small integers, and divisor-variable mixes.
fn cyclic_candidates(r: usize, divisor: &str) -> Vec<Vec<RatFun>> {
    let mut out = Vec::new();
    for i in 0..r {
        let mut v = vec![RatFun::zero(); r];
        v[i] = RatFun::one();
        out.push(v);
    }
    for len in 2..=r {
        let mut v = vec![RatFun::zero(); r];
        for entry in v.iter_mut().take(len) {
            *entry = RatFun::one();
        }
        out.push(v);
    }
    for base in 2..5i64 {
        let mut v = Vec::with_capacity(r);
        let mut c = Scalar::one();
        for _ in 0..r {
            v.push(RatFun::from_scalar(c.clone()));
            c = &c * &Scalar::from_int(base);
        }
        out.push(v);
    }
    for shift in 0..3i64 {
        let t = RatFun::var(divisor);
        let mut v = Vec::with_capacity(r);
        let mut acc = RatFun::one();
        for k in 0..r {
            v.push(acc.add(&RatFun::from_int(shift * k as i64)));
            acc = acc.mul(&t);
        }
        out.push(v);
    }
    out
}

/// Generic slope and its integrality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatzRank {
    pub rho: Scalar,
    pub integral: bool,
}

impl KatzRank {
    pub fn from_scalar(rho: Scalar) -> Self {
        let integral = rho.is_integer();
        KatzRank { rho, integral }
    }

    /// The slope as a plain integer, when it is one.
    pub fn as_integer(&self) -> Result<i64> {
        if !self.integral {
            return Err(Error::NonIntegerRank { rho: self.rho.to_string() });
        }
        self.rho
            .to_i64()
            .ok_or_else(|| Error::NonIntegerRank { rho: self.rho.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_fraction, parse_ratfun};

    fn xvars(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn rank_one_exp(n: usize, phi_src: &str) -> ElementaryModel {
        let vars = xvars(n);
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let phi = parse_fraction(phi_src, &names, names[n - 1]).unwrap();
        ElementaryModel::new(vars, vec![Summand { phi, reg: RegularPart::trivial() }]).unwrap()
    }

    #[test]
    fn katz_rank_is_pole_order() {
        assert_eq!(
            rank_one_exp(2, "1/x2").katz_generic_rank().rho,
            Scalar::from_int(1)
        );
        assert_eq!(
            rank_one_exp(2, "x1/x2^2").katz_generic_rank().rho,
            Scalar::from_int(2)
        );
        assert_eq!(
            rank_one_exp(2, "x1 + 3").katz_generic_rank().rho,
            Scalar::zero()
        );
    }

    #[test]
    fn dual_is_an_involution() {
        let m = rank_one_exp(2, "x1/x2^2");
        assert_eq!(m.dual().dual(), m);
        assert_eq!(m.dual().katz_generic_rank(), m.katz_generic_rank());
    }

    #[test]
    fn dual_negates_residue() {
        let reg = RegularPart::new(Matrix::new(
            1,
            1,
            vec![Scalar::from_pair(1, 2).unwrap()],
        ).unwrap())
        .unwrap();
        assert_eq!(
            reg.dual().residue().get(0, 0),
            &Scalar::from_pair(-1, 2).unwrap()
        );
    }

    #[test]
    fn hom_of_twist_with_itself_is_trivial() {
        let m = rank_one_exp(2, "1/x2");
        let h = ElementaryModel::hom_model(&m, &m).unwrap();
        assert_eq!(h.summands().len(), 1);
        assert!(h.summands()[0].phi.is_zero());
        assert_eq!(h.total_rank(), 1);
    }

    #[test]
    fn hom_of_two_twists_merges_zero_class() {
        let vars = xvars(2);
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let mk = |src: &str| parse_fraction(src, &names, "x2").unwrap();
        let m = ElementaryModel::new(
            vars.clone(),
            vec![
                Summand { phi: mk("1/x2"), reg: RegularPart::trivial() },
                Summand { phi: mk("2/x2"), reg: RegularPart::trivial() },
            ],
        )
        .unwrap();
        let h = ElementaryModel::hom_model(&m, &m).unwrap();
        // Pairs give exponents {0, 0, 1/x2, -1/x2}: three classes, the zero
        // class of rank two.
        assert_eq!(h.summands().len(), 3);
        assert_eq!(h.total_rank(), 4);
        let zero_class = h.summands().iter().find(|s| s.phi.is_zero()).unwrap();
        assert_eq!(zero_class.reg.rank(), 2);
    }

    #[test]
    fn normalize_merges_by_principal_part() {
        let vars = xvars(2);
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let mk = |src: &str| parse_fraction(src, &names, "x2").unwrap();
        let m = ElementaryModel::new(
            vars.clone(),
            vec![
                Summand { phi: mk("1/x2"), reg: RegularPart::trivial() },
                Summand { phi: mk("1/x2 + x1"), reg: RegularPart::trivial() },
            ],
        )
        .unwrap();
        let n = m.normalize().unwrap();
        assert_eq!(n.summands().len(), 1);
        assert_eq!(n.summands()[0].reg.rank(), 2);
        let again = n.normalize().unwrap();
        assert_eq!(again.summands().len(), 1);
        assert_eq!(again.total_rank(), 2);
    }

    fn gradient_connection(n: usize, phi_src: &str) -> MatrixConnection {
        let vars = xvars(n);
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let phi = parse_ratfun(phi_src, &names).unwrap();
        let mats = vars
            .iter()
            .map(|v| Matrix::new(1, 1, vec![phi.derivative(v)]).unwrap())
            .collect();
        MatrixConnection::new(vars, mats).unwrap()
    }

    #[test]
    fn gradient_connections_are_integrable() {
        let m = gradient_connection(2, "x1/x2^2");
        assert_eq!(m.check_integrability().unwrap(), None);
    }

    #[test]
    fn constant_noncommuting_pair_fails_integrability() {
        let vars = xvars(2);
        let e12 = Matrix::from_rows(vec![
            vec![RatFun::zero(), RatFun::one()],
            vec![RatFun::zero(), RatFun::zero()],
        ])
        .unwrap();
        let e21 = e12.transpose();
        let m = MatrixConnection::new(vars, vec![e12, e21]).unwrap();
        assert_eq!(m.check_integrability().unwrap(), Some((0, 1)));
    }

    #[test]
    fn matrix_katz_rank_matches_pole_order() {
        let m = gradient_connection(2, "x1/x2^2");
        let k = m.katz_generic_rank().unwrap();
        assert_eq!(k.rho, Scalar::from_int(2));
        assert!(k.integral);

        let reg = gradient_connection(2, "x1*x2 + x1^2");
        assert_eq!(reg.katz_generic_rank().unwrap().rho, Scalar::zero());
    }

    #[test]
    fn rank_one_reconstruction_round_trips() {
        let m = gradient_connection(2, "x1/x2^2");
        let e = m.to_elementary_rank_one().unwrap();
        assert_eq!(e.summands().len(), 1);
        let expected = rank_one_exp(2, "x1/x2^2");
        assert!(e.summands()[0].phi.value_eq(&expected.summands()[0].phi));
        assert_eq!(e.katz_generic_rank().rho, Scalar::from_int(2));
    }

    #[test]
    fn rank_one_reconstruction_reads_residue() {
        // d + d(1/x2) + (1/2) dx2/x2
        let vars = xvars(2);
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let a1 = Matrix::new(1, 1, vec![RatFun::zero()]).unwrap();
        let a2 = Matrix::new(
            1,
            1,
            vec![parse_ratfun("-1/x2^2 + 1/(2*x2)", &names).unwrap()],
        )
        .unwrap();
        let m = MatrixConnection::new(vars.clone(), vec![a1, a2]).unwrap();
        let e = m.to_elementary_rank_one().unwrap();
        let s = &e.summands()[0];
        assert_eq!(s.reg.residue().get(0, 0), &Scalar::from_pair(1, 2).unwrap());
        let expected = parse_fraction("1/x2", &names, "x2").unwrap();
        assert!(s.phi.value_eq(&expected));
    }
}
