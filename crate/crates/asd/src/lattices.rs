//! Lattice normal forms along the divisor: strip sections, Deligne and
//! Malgrange lattices, ramified pullbacks, and stability certificates for
//! the rescaled derivations.
//!
//! A lattice here is a free module over functions regular along the divisor,
//! spanned by divisor-power rescalings of the summand basis of an elementary
//! model. The two constructions provided are the Deligne lattice of a
//! regular part (residue eigenvalues moved into a chosen strip) and the
//! Malgrange lattice of an elementary model (exponential factors trivialized
//! summandwise, regular parts handled by the Deligne construction on a
//! ramified cover, then averaged back down).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::fraction::ExpandableFraction;
use crate::algebra::mpoly::MPoly;
use crate::algebra::scalar::Scalar;
use crate::connection::{ElementaryModel, RegularPart, Summand};
use crate::error::{Error, Result};
use crate::props::{shifted_action_data, LatticeActionData};
use crate::vfiltration::floor_scalar;

/// A section of the projection from scalars to scalars modulo one: the
/// half-open strip `[offset, offset + 1)`. The default strip starts at zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauSection {
    offset: Scalar,
}

impl Default for TauSection {
    fn default() -> Self {
        TauSection { offset: Scalar::zero() }
    }
}

impl TauSection {
    pub fn new(offset: Scalar) -> Self {
        TauSection { offset }
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    /// The representative of `e` modulo one lying inside the strip.
    pub fn representative(&self, e: &Scalar) -> Result<Scalar> {
        let m = self.integer_shift(e)?;
        Ok(e + &Scalar::from_int(m))
    }

    /// The unique integer `m` with `e + m` inside the strip; this is the
    /// divisor-power exponent of the basis rescaling that realizes the
    /// representative.
    pub fn integer_shift(&self, e: &Scalar) -> Result<i64> {
        Ok(-floor_scalar(&(e - &self.offset))?)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

/// Indices of the residue matrix grouped by the support graph of its
/// off-diagonal entries. Basis vectors in one group must be rescaled by the
/// same divisor power, or the rescaled residue stops being constant.
fn residue_components(res: &crate::algebra::matrix::Matrix<Scalar>) -> Vec<Vec<usize>> {
    let m = res.rows();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && !res.get(i, j).is_zero() {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// The single eigenvalue of a residue block. Blocks mixing distinct
/// eigenvalue classes cannot be rescaled exactly with one power, so they are
/// rejected; irrational eigenvalues have no strip representative.
fn component_eigenvalue(
    res: &crate::algebra::matrix::Matrix<Scalar>,
    comp: &[usize],
) -> Result<Scalar> {
    if comp.len() == 1 {
        return Ok(res.get(comp[0], comp[0]).clone());
    }
    let size = comp.len();
    let mut data = Vec::with_capacity(size * size);
    for &i in comp {
        for &j in comp {
            data.push(res.get(i, j).clone());
        }
    }
    let sub = crate::algebra::matrix::Matrix::new(size, size, data)?;
    let report = sub.char_poly()?.roots()?;
    if let Some((tag, _)) = report.tagged.first() {
        return Err(Error::IrrationalEigenvalue { min_poly: tag.min_poly.to_string() });
    }
    if report.rational.len() != 1 {
        return Err(Error::unsupported(
            "residue block couples distinct eigenvalue classes; \
             change to a block-adapted basis first",
        ));
    }
    Ok(report.rational[0].0.clone())
}

/// Divisor-power exponents and section eigenvalues for the Deligne lattice
/// of a regular part, computed on the degree-`p` cover and averaged back to
/// integral exponents. For `p = 1` this is the plain strip normalization.
fn deligne_exponents(
    reg: &RegularPart,
    tau: &TauSection,
    p: u32,
) -> Result<(Vec<i64>, Vec<Scalar>)> {
    let res = reg.residue();
    let mut exponents = vec![0i64; reg.rank()];
    let mut eigenvalues = vec![Scalar::zero(); reg.rank()];
    for comp in residue_components(res) {
        let e = component_eigenvalue(res, &comp)?;
        let cover = &e * &Scalar::from_int(p as i64);
        let m_cover = tau.integer_shift(&cover)?;
        let m = ceil_div(m_cover, p as i64);
        for &q in &comp {
            exponents[q] = m;
            eigenvalues[q] = &e + &Scalar::from_int(m);
        }
    }
    Ok((exponents, eigenvalues))
}

/// A free lattice spanned by divisor-power rescalings of the summand basis:
/// basis vector `q` is the divisor coordinate raised to `exponents[q]` times
/// the model's `q`-th generator. `eigenvalues[q]` is the logarithmic
/// eigenvalue of the regular factor on that section.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    model: ElementaryModel,
    exponents: Vec<i64>,
    eigenvalues: Vec<Scalar>,
}

impl Lattice {
    pub fn model(&self) -> &ElementaryModel {
        &self.model
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn eigenvalues(&self) -> &[Scalar] {
        &self.eigenvalues
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn basis_labels(&self) -> Vec<String> {
        let xn = self.model.divisor_var();
        self.exponents
            .iter()
            .enumerate()
            .map(|(q, m)| match m {
                0 => format!("e{q}"),
                1 => format!("{xn}*e{q}"),
                m => format!("{xn}^{m}*e{q}"),
            })
            .collect()
    }

    /// The lattice rescaled globally by the inverse `k0`-th divisor power.
    pub fn twist(&self, k0: i64) -> Self {
        Lattice {
            model: self.model.clone(),
            exponents: self.exponents.iter().map(|m| m - k0).collect(),
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|e| e - &Scalar::from_int(k0))
                .collect(),
        }
    }

    /// Twist exponent whose rescaling generates the ambient module over the
    /// differential operators: one more than the largest integral section
    /// eigenvalue, and at least zero.
    pub fn dgen_twist(&self) -> i64 {
        let mut k0 = 0i64;
        for e in &self.eigenvalues {
            if e.is_integer() {
                if let Some(n) = e.to_i64() {
                    k0 = k0.max(n + 1);
                }
            }
        }
        k0
    }

    /// Exact matrices of the weight-`a` rescaled derivations on the lattice
    /// basis, in the synthesis input format: the divisor direction carries
    /// one extra divisor power.
    pub fn action_data(&self, a: i64) -> Result<LatticeActionData> {
        let shifts: Vec<i64> = self.exponents.iter().map(|m| -m).collect();
        shifted_action_data(&self.model, a, &shifts)
    }
}

/// The Deligne lattice of a regular part: the unique rescaling of each
/// residue block moving its eigenvalue into the strip. The underlying model
/// is the regular connection itself, presented on one variable.
pub fn deligne_lattice(reg: &RegularPart, tau: &TauSection) -> Result<Lattice> {
    let (exponents, eigenvalues) = deligne_exponents(reg, tau, 1)?;
    let model = ElementaryModel::new(
        vec!["t".to_string()],
        vec![Summand { phi: ExpandableFraction::zero("t"), reg: reg.clone() }],
    )?;
    Ok(Lattice { model, exponents, eigenvalues })
}

/// Pullback along the degree-`p` cover ramified over the divisor: the
/// divisor coordinate is replaced by its `p`-th power inside every
/// exponential factor, and residues scale by `p`.
pub fn ramified_pullback(model: &ElementaryModel, p: u32) -> Result<ElementaryModel> {
    if p == 0 {
        return Err(Error::bad_parameters("ramification index must be positive"));
    }
    let xn = model.divisor_var().to_string();
    let mut map = BTreeMap::new();
    map.insert(xn.clone(), MPoly::var(&xn).pow(p));
    let mut summands = Vec::with_capacity(model.summands().len());
    for s in model.summands() {
        let base = ExpandableFraction::new(
            &xn,
            s.phi.num().substitute(&map),
            s.phi.den().substitute(&map),
        )?;
        let phi = base.shift(-(p as i64) * s.phi.pole());
        let reg = RegularPart::new(s.reg.residue().scale(&Scalar::from_int(p as i64)))?;
        summands.push(Summand { phi, reg });
    }
    ElementaryModel::new(model.vars().to_vec(), summands)
}

/// The Malgrange lattice of an elementary model: each exponential factor is
/// trivialized by the summand generator, and the regular factor contributes
/// its Deligne rescaling computed on the degree-`p` cover, averaged back to
/// the sub-basis with integral divisor exponents.
pub fn malgrange_lattice(
    model: &ElementaryModel,
    tau: &TauSection,
    p: u32,
) -> Result<Lattice> {
    if p == 0 {
        return Err(Error::bad_parameters("ramification index must be positive"));
    }
    let mut exponents = Vec::with_capacity(model.total_rank());
    let mut eigenvalues = Vec::with_capacity(model.total_rank());
    for s in model.summands() {
        let (mut e, mut v) = deligne_exponents(&s.reg, tau, p)?;
        exponents.append(&mut e);
        eigenvalues.append(&mut v);
    }
    Ok(Lattice { model: model.clone(), exponents, eigenvalues })
}

/// One verified entry of a rescaled-derivation matrix on the lattice basis.
#[derive(Debug, Clone, Serialize)]
pub struct ActionReceipt {
    pub operator: String,
    pub source: usize,
    pub target: usize,
    pub coefficient: String,
}

/// A stability certificate: every rescaled derivation carries the lattice
/// into itself, with the complete list of nonzero matrix entries.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub weight: i64,
    pub receipts: Vec<ActionReceipt>,
    pub dgen_twist: i64,
}

fn operator_label(xn: &str, power: i64, direction: &str) -> String {
    match power {
        0 => format!("d/d{direction}"),
        1 => format!("{xn}*d/d{direction}"),
        k => format!("{xn}^{k}*d/d{direction}"),
    }
}

fn effective_pole(f: &ExpandableFraction) -> i64 {
    let val = f.num().valuation_in(f.var()).unwrap_or(0) as i64;
    f.pole() - val
}

/// The coefficient the derivation must produce, recomputed directly from
/// the model data: the exponential derivative on the diagonal, plus the
/// logarithmic and residue terms in the divisor direction, all carried to
/// the rescaled basis in one shift at the end.
fn expected_coefficient(
    model: &ElementaryModel,
    exponents: &[i64],
    i: usize,
    q: usize,
    u: usize,
    weight: i64,
) -> Result<ExpandableFraction> {
    let n = model.dimension();
    let xn = model.divisor_var();
    let mut offset = 0usize;
    for s in model.summands() {
        let r = s.reg.rank();
        if q < offset || q >= offset + r {
            offset += r;
            continue;
        }
        if u < offset || u >= offset + r {
            return Ok(ExpandableFraction::zero(xn));
        }
        let b = q - offset;
        let c = u - offset;
        let delta: i64 = if i == n - 1 { 1 } else { 0 };
        let mut f = if b == c {
            s.phi.derivative(&model.vars()[i])
        } else {
            ExpandableFraction::zero(xn)
        };
        if i == n - 1 {
            let mut res = s.reg.residue().get(c, b).clone();
            if b == c {
                res = &res + &Scalar::from_int(exponents[q]);
            }
            if !res.is_zero() {
                f = f.add(&ExpandableFraction::from_scalar(xn, res).shift(-1))?;
            }
        }
        return Ok(f.shift(weight + delta + exponents[q] - exponents[u]));
    }
    Err(Error::shape(format!("basis index {q} out of range")))
}

/// Verifies that the weight-`rho` rescaled derivations preserve the lattice:
/// the divisor coordinate to the power `rho + 1` times the divisor
/// derivative, and to the power `rho` times each transverse derivative. Each
/// nonzero matrix entry is recomputed independently and must be regular
/// along the divisor; the first polar entry aborts with a witness.
pub fn check_stability(lattice: &Lattice, rho: i64) -> Result<StabilityReport> {
    if rho < 0 {
        return Err(Error::bad_parameters("derivation weight must be nonnegative"));
    }
    let model = lattice.model();
    let n = model.dimension();
    let m = lattice.rank();
    let xn = model.divisor_var();
    let data = lattice.action_data(rho)?;
    let mut receipts = Vec::new();
    for i in 0..n {
        let delta: i64 = if i == n - 1 { 1 } else { 0 };
        let op = operator_label(xn, rho + delta, &model.vars()[i]);
        for q in 0..m {
            for u in 0..m {
                let f = data.coefficient(i, q, u);
                if f.is_zero() {
                    continue;
                }
                let expected =
                    expected_coefficient(model, lattice.exponents(), i, q, u, rho)?;
                if !expected.value_eq(f) {
                    return Err(Error::shape(
                        "action receipt failed independent recomputation",
                    ));
                }
                if effective_pole(f) > 0 {
                    return Err(Error::StabilityFailure {
                        operator: op.clone(),
                        basis_index: q,
                        coefficient: f.to_string(),
                    });
                }
                receipts.push(ActionReceipt {
                    operator: op.clone(),
                    source: q,
                    target: u,
                    coefficient: f.to_string(),
                });
            }
        }
    }
    Ok(StabilityReport { weight: rho, receipts, dgen_twist: lattice.dgen_twist() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrix::Matrix;
    use crate::parse::parse_fraction;
    use crate::props::synthesize_ha;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn rat(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn residue(rows: &[&[&str]]) -> RegularPart {
        let m = rows.len();
        let mut data = Vec::new();
        for row in rows {
            assert_eq!(row.len(), m);
            for entry in *row {
                data.push(rat(entry));
            }
        }
        RegularPart::new(Matrix::new(m, m, data).unwrap()).unwrap()
    }

    fn exp_model(phi_src: &str, reg: RegularPart) -> ElementaryModel {
        let phi = parse_fraction(phi_src, &["x1", "x2"], "x2").unwrap();
        ElementaryModel::new(names(&["x1", "x2"]), vec![Summand { phi, reg }]).unwrap()
    }

    #[test]
    fn strip_representatives_land_in_default_window() {
        let tau = TauSection::default();
        assert_eq!(tau.representative(&rat("5/2")).unwrap(), rat("1/2"));
        assert_eq!(tau.integer_shift(&rat("5/2")).unwrap(), -2);
        assert_eq!(tau.representative(&rat("0")).unwrap(), rat("0"));
        assert_eq!(tau.integer_shift(&rat("0")).unwrap(), 0);
        assert_eq!(tau.representative(&rat("3/2")).unwrap(), rat("1/2"));
        assert_eq!(tau.integer_shift(&rat("3/2")).unwrap(), -1);
        assert_eq!(tau.representative(&rat("-1/3")).unwrap(), rat("2/3"));
        assert_eq!(tau.integer_shift(&rat("-1/3")).unwrap(), 1);
    }

    #[test]
    fn strip_section_is_periodic_and_shifts_by_integers() {
        let tau = TauSection::new(rat("-1/2"));
        for src in ["0", "1/2", "-1/2", "7/3", "-13/4"] {
            let e = rat(src);
            let rep = tau.representative(&e).unwrap();
            let rep_next = tau.representative(&(&e + &Scalar::one())).unwrap();
            assert_eq!(rep, rep_next);
            let diff = &rep - &e;
            assert!(diff.is_integer());
            assert!(!(&rep - &rat("-1/2")).is_negative());
            assert!((&rep - &rat("1/2")).is_negative());
        }
    }

    #[test]
    fn deligne_moves_half_integer_residue_two_steps_down() {
        let lat = deligne_lattice(&residue(&[&["5/2"]]), &TauSection::default()).unwrap();
        assert_eq!(lat.exponents(), &[-2]);
        assert_eq!(lat.eigenvalues(), &[rat("1/2")]);
        assert_eq!(lat.basis_labels(), vec!["t^-2*e0".to_string()]);
    }

    #[test]
    fn deligne_fixes_in_strip_residue() {
        let lat = deligne_lattice(&residue(&[&["0"]]), &TauSection::default()).unwrap();
        assert_eq!(lat.exponents(), &[0]);
        assert_eq!(lat.eigenvalues(), &[Scalar::zero()]);
    }

    #[test]
    fn deligne_shifts_eigenvalues_independently() {
        let lat = deligne_lattice(
            &residue(&[&["0", "0"], &["0", "3/2"]]),
            &TauSection::default(),
        )
        .unwrap();
        assert_eq!(lat.exponents(), &[0, -1]);
        assert_eq!(lat.eigenvalues(), &[rat("0"), rat("1/2")]);
    }

    #[test]
    fn deligne_keeps_jordan_blocks_together() {
        let lat = deligne_lattice(
            &residue(&[&["5/2", "1"], &["0", "5/2"]]),
            &TauSection::default(),
        )
        .unwrap();
        assert_eq!(lat.exponents(), &[-2, -2]);
        assert_eq!(lat.eigenvalues(), &[rat("1/2"), rat("1/2")]);
    }

    #[test]
    fn deligne_respects_custom_strip() {
        let tau = TauSection::new(rat("-1/2"));
        let lat = deligne_lattice(&residue(&[&["1/2"]]), &tau).unwrap();
        assert_eq!(lat.exponents(), &[-1]);
        assert_eq!(lat.eigenvalues(), &[rat("-1/2")]);
    }

    #[test]
    fn deligne_rejects_mixed_eigenvalue_block() {
        let err = deligne_lattice(
            &residue(&[&["0", "1"], &["0", "3/2"]]),
            &TauSection::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }

    #[test]
    fn deligne_rejects_irrational_eigenvalues() {
        let err = deligne_lattice(
            &residue(&[&["0", "-1"], &["1", "0"]]),
            &TauSection::default(),
        )
        .unwrap_err();
        match err {
            Error::IrrationalEigenvalue { min_poly } => {
                assert!(min_poly.contains("s^2 + 1"));
            }
            other => panic!("expected irrational eigenvalue error, got {other:?}"),
        }
    }

    #[test]
    fn deligne_exponent_is_the_unique_strip_shift() {
        let tau = TauSection::default();
        for src in ["5/2", "0", "3/2", "-7/3", "4"] {
            let e = rat(src);
            let lat = deligne_lattice(
                &RegularPart::new(Matrix::new(1, 1, vec![e.clone()]).unwrap()).unwrap(),
                &tau,
            )
            .unwrap();
            let m = lat.exponents()[0];
            assert_eq!(&e + &Scalar::from_int(m), tau.representative(&e).unwrap());
        }
    }

    #[test]
    fn ramified_pullback_squares_the_pole() {
        let model = exp_model("1/x2", RegularPart::trivial());
        let pulled = ramified_pullback(&model, 2).unwrap();
        let expected = parse_fraction("1/x2^2", &["x1", "x2"], "x2").unwrap();
        assert!(pulled.summands()[0].phi.value_eq(&expected));
    }

    #[test]
    fn ramified_pullback_scales_residues() {
        let model = exp_model("0", residue(&[&["5/2"]]));
        let pulled = ramified_pullback(&model, 2).unwrap();
        assert_eq!(pulled.summands()[0].reg.residue().get(0, 0), &rat("5"));
    }

    #[test]
    fn ramified_pullback_keeps_transverse_coefficients() {
        let model = exp_model("x1^2/x2^3", RegularPart::trivial());
        let pulled = ramified_pullback(&model, 2).unwrap();
        let expected = parse_fraction("x1^2/x2^6", &["x1", "x2"], "x2").unwrap();
        assert!(pulled.summands()[0].phi.value_eq(&expected));
    }

    #[test]
    fn ramified_pullback_at_degree_one_is_identity() {
        let model = exp_model("1/x2^2", residue(&[&["1/3"]]));
        let pulled = ramified_pullback(&model, 1).unwrap();
        assert!(pulled.summands()[0].phi.value_eq(&model.summands()[0].phi));
        assert_eq!(pulled.summands()[0].reg, model.summands()[0].reg);
        assert!(ramified_pullback(&model, 0).is_err());
    }

    #[test]
    fn malgrange_trivializes_unramified_exponential() {
        let model = exp_model("1/x2", RegularPart::trivial());
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        assert_eq!(lat.exponents(), &[0]);
        assert_eq!(lat.basis_labels(), vec!["e0".to_string()]);
    }

    #[test]
    fn malgrange_applies_deligne_to_regular_factor() {
        let model = exp_model("1/x2", residue(&[&["5/2"]]));
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        assert_eq!(lat.exponents(), &[-2]);
        assert_eq!(lat.eigenvalues(), &[rat("1/2")]);
    }

    #[test]
    fn malgrange_cover_degree_does_not_change_integral_models() {
        let model = exp_model("1/x2", residue(&[&["5/2"]]));
        let tau = TauSection::default();
        let base = malgrange_lattice(&model, &tau, 1).unwrap();
        for p in [2, 3, 5] {
            let lat = malgrange_lattice(&model, &tau, p).unwrap();
            assert_eq!(lat.exponents(), base.exponents());
        }
    }

    #[test]
    fn malgrange_handles_summands_independently() {
        let phi1 = parse_fraction("1/x2", &["x1", "x2"], "x2").unwrap();
        let phi2 = parse_fraction("0", &["x1", "x2"], "x2").unwrap();
        let model = ElementaryModel::new(
            names(&["x1", "x2"]),
            vec![
                Summand { phi: phi1, reg: residue(&[&["5/2"]]) },
                Summand { phi: phi2, reg: residue(&[&["0"]]) },
            ],
        )
        .unwrap();
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        assert_eq!(lat.exponents(), &[-2, 0]);
    }

    #[test]
    fn twist_rescales_exponents_and_eigenvalues() {
        let lat = deligne_lattice(&residue(&[&["5/2"]]), &TauSection::default()).unwrap();
        let twisted = lat.twist(2);
        assert_eq!(twisted.exponents(), &[-4]);
        assert_eq!(twisted.eigenvalues(), &[rat("-3/2")]);
    }

    #[test]
    fn dgen_twist_clears_integral_eigenvalues() {
        let zero = deligne_lattice(&residue(&[&["0"]]), &TauSection::default()).unwrap();
        assert_eq!(zero.dgen_twist(), 1);
        let half = deligne_lattice(&residue(&[&["5/2"]]), &TauSection::default()).unwrap();
        assert_eq!(half.dgen_twist(), 0);
        let mixed = deligne_lattice(
            &residue(&[&["0", "0"], &["0", "3/2"]]),
            &TauSection::default(),
        )
        .unwrap();
        assert_eq!(mixed.dgen_twist(), 1);
    }

    #[test]
    fn stability_certificate_for_unramified_exponential() {
        let model = exp_model("1/x2", RegularPart::trivial());
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        let rho = model.katz_generic_rank().as_integer().unwrap();
        assert_eq!(rho, 1);
        let report = check_stability(&lat, rho).unwrap();
        assert_eq!(report.receipts.len(), 1);
        let receipt = &report.receipts[0];
        assert_eq!(receipt.operator, "x2^2*d/dx2");
        assert_eq!((receipt.source, receipt.target), (0, 0));
        assert_eq!(receipt.coefficient, "-1");
    }

    #[test]
    fn stability_fails_below_the_generic_slope() {
        let model = exp_model("1/x2", RegularPart::trivial());
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        let err = check_stability(&lat, 0).unwrap_err();
        match err {
            Error::StabilityFailure { operator, basis_index, coefficient } => {
                assert_eq!(operator, "x2*d/dx2");
                assert_eq!(basis_index, 0);
                assert!(coefficient.contains("x2"));
            }
            other => panic!("expected stability failure, got {other:?}"),
        }
    }

    #[test]
    fn deligne_lattice_is_stable_at_weight_zero() {
        let lat = deligne_lattice(&residue(&[&["5/2"]]), &TauSection::default()).unwrap();
        let report = check_stability(&lat, 0).unwrap();
        assert_eq!(report.receipts.len(), 1);
        assert_eq!(report.receipts[0].operator, "t*d/dt");
        assert_eq!(report.receipts[0].coefficient, "1/2");
    }

    #[test]
    fn jordan_block_deligne_lattice_keeps_nilpotent_part() {
        let lat = deligne_lattice(
            &residue(&[&["0", "1"], &["0", "0"]]),
            &TauSection::default(),
        )
        .unwrap();
        let report = check_stability(&lat, 0).unwrap();
        let cross: Vec<_> = report
            .receipts
            .iter()
            .filter(|r| r.source != r.target)
            .collect();
        assert_eq!(cross.len(), 1);
        assert_eq!((cross[0].source, cross[0].target), (1, 0));
        assert_eq!(cross[0].coefficient, "1");
    }

    #[test]
    fn malgrange_lattices_are_stable_at_the_generic_slope() {
        let models = vec![
            exp_model("1/x2", residue(&[&["5/2"]])),
            exp_model("1/x2^2", RegularPart::trivial()),
            exp_model("x1/x2^3", residue(&[&["0", "1"], &["0", "0"]])),
        ];
        for model in models {
            let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
            let rho = model.katz_generic_rank().as_integer().unwrap();
            let report = check_stability(&lat, rho).unwrap();
            assert_eq!(report.weight, rho);
            assert!(!report.receipts.is_empty());
        }
    }

    #[test]
    fn stability_fails_one_step_below_on_irregular_models() {
        let model = exp_model("1/x2^2", RegularPart::trivial());
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        assert!(check_stability(&lat, 2).is_ok());
        let err = check_stability(&lat, 1).unwrap_err();
        assert!(matches!(err, Error::StabilityFailure { .. }));
    }

    #[test]
    fn action_data_feeds_the_synthesis_verifier() {
        let model = exp_model("1/x2", residue(&[&["5/2"]]));
        let lat = malgrange_lattice(&model, &TauSection::default(), 1).unwrap();
        let data = lat.action_data(1).unwrap();
        assert_eq!(data.shifts(), &[2]);
        let pres = synthesize_ha(&model, 1, 0, Some(&data)).unwrap();
        assert_eq!(pres.generators(), 1);
    }

    #[test]
    fn stability_weight_must_be_nonnegative() {
        let lat = deligne_lattice(&residue(&[&["0"]]), &TauSection::default()).unwrap();
        assert!(check_stability(&lat, -1).is_err());
    }
}
