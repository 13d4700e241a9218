//! Modules whose connection matrices in the fibre directions are constant.
//!
//! Such a module is classified by the multiset of joint eigenvalue tuples of
//! its commuting matrices: each tuple (c_1..c_l) stands for the rank-one
//! module with form c_1 y_1 + ... + c_l y_l, and generalized eigenspace
//! dimensions give the multiplicities. Extensions between these rank-one
//! pieces vanish, which is why no unipotent data needs to be retained and
//! why the first de Rham cohomology of any hom-twist is zero.
//!
//! [`extract_restriction`] connects this picture to presentations built over
//! the tubular chart: coefficients satisfying the degree bound are constant
//! along t = 0, so evaluating there yields a commuting constant system whose
//! decomposition names the restriction's linearity class.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::fraction::ExpandableFraction;
use crate::algebra::matrix::Matrix;
use crate::algebra::scalar::Scalar;
use crate::algebra::upoly::{SpectralValue, UPoly};
use crate::dilatation::LinearForm;
use crate::error::{Error, Result};
use crate::props::{check_property_l, Presentation};

/// Finite direct sum of rank-one pieces named by their linear forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearModule {
    dim: usize,
    forms: Vec<LinearForm>,
}

impl LinearModule {
    /// Canonicalizes: forms sorted by coefficient tuple, equal tuples merged
    /// by adding multiplicities, zero multiplicities dropped.
    pub fn new(dim: usize, forms: Vec<LinearForm>) -> Result<Self> {
        for f in &forms {
            if f.coeffs.len() != dim {
                return Err(Error::shape(format!(
                    "form {} has {} coefficients in a {dim}-variable module",
                    f,
                    f.coeffs.len()
                )));
            }
        }
        let mut sorted: Vec<LinearForm> =
            forms.into_iter().filter(|f| f.multiplicity > 0).collect();
        sorted.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
        let mut merged: Vec<LinearForm> = Vec::new();
        for f in sorted {
            match merged.last_mut() {
                Some(last) if last.coeffs == f.coeffs => {
                    last.multiplicity += f.multiplicity;
                }
                _ => merged.push(f),
            }
        }
        Ok(LinearModule { dim, forms: merged })
    }

    /// Number of fibre variables the forms live in.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn rank(&self) -> usize {
        self.forms.iter().map(|f| f.multiplicity).sum()
    }

    /// Forms of Hom(self, other): all pairwise differences, multiplicities
    /// multiplied. Only rational coefficients subtract exactly.
    pub fn hom_twist(&self, other: &Self) -> Result<LinearModule> {
        if self.dim != other.dim {
            return Err(Error::shape(format!(
                "hom between modules over {} and {} variables",
                self.dim, other.dim
            )));
        }
        let mut forms = Vec::new();
        for f in &self.forms {
            for g in &other.forms {
                let mut coeffs = Vec::with_capacity(self.dim);
                for (a, b) in f.coeffs.iter().zip(&g.coeffs) {
                    let (a, b) = match (a.as_rational(), b.as_rational()) {
                        (Some(a), Some(b)) => (a, b),
                        _ => {
                            let tag = if a.as_rational().is_none() { a } else { b };
                            return Err(Error::IrrationalEigenvalue {
                                min_poly: tag.to_string(),
                            });
                        }
                    };
                    coeffs.push(SpectralValue::Rational(b - a));
                }
                forms.push(LinearForm {
                    coeffs,
                    multiplicity: f.multiplicity * g.multiplicity,
                });
            }
        }
        LinearModule::new(self.dim, forms)
    }
}

/// Square matrices of equal size, one per fibre direction. Shape is checked
/// at construction; commutation is a separate, reportable question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstantSystem {
    mats: Vec<Matrix<Scalar>>,
}

impl ConstantSystem {
    pub fn new(mats: Vec<Matrix<Scalar>>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::bad_parameters("constant system needs a matrix"))?;
        first.require_square()?;
        let size = first.rows();
        for m in &mats {
            m.require_square()?;
            if m.rows() != size {
                return Err(Error::shape(format!(
                    "system mixes sizes {size} and {}",
                    m.rows()
                )));
            }
        }
        Ok(ConstantSystem { mats })
    }

    /// Number of directions l.
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Common matrix size.
    pub fn size(&self) -> usize {
        self.mats[0].rows()
    }

    pub fn matrices(&self) -> &[Matrix<Scalar>] {
        &self.mats
    }

    pub fn matrix(&self, i: usize) -> &Matrix<Scalar> {
        &self.mats[i]
    }
}

/// Returns the first non-commuting pair of indices, or None if every
/// commutator vanishes.
pub fn check_commuting(s: &ConstantSystem) -> Option<(usize, usize)> {
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let ij = s.mats[i].mul(&s.mats[j]).expect("sizes agree");
            let ji = s.mats[j].mul(&s.mats[i]).expect("sizes agree");
            if ij != ji {
                return Some((i, j));
            }
        }
    }
    None
}

fn eval_poly_at_matrix(p: &UPoly, m: &Matrix<Scalar>) -> Result<Matrix<Scalar>> {
    let n = m.rows();
    let mut acc = Matrix::zero(n, n);
    let deg = match p.degree() {
        Some(d) => d,
        None => return Ok(acc),
    };
    for k in (0..=deg).rev() {
        acc = acc.mul(m)?;
        let c = p.coeff(k);
        if !c.is_zero() {
            acc = acc.add(&Matrix::identity(n).scale(&c))?;
        }
    }
    Ok(acc)
}

/// Restricts each matrix to the column span of `basis`, which must be
/// invariant under all of them.
fn restrict_all(
    mats: &[Matrix<Scalar>],
    basis: &[Vec<Scalar>],
    ambient: usize,
) -> Result<Vec<Matrix<Scalar>>> {
    let d = basis.len();
    let mut columns = Matrix::zero(ambient, d);
    for (j, v) in basis.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            columns.set(i, j, x.clone());
        }
    }
    let mut out = Vec::with_capacity(mats.len());
    for m in mats {
        let image = m.mul(&columns)?;
        let mut restricted = Matrix::zero(d, d);
        for j in 0..d {
            let target: Vec<Scalar> = (0..ambient).map(|i| image.get(i, j).clone()).collect();
            let x = columns.solve(&target)?.ok_or_else(|| {
                Error::shape("subspace is not invariant under the system".to_string())
            })?;
            for (i, v) in x.into_iter().enumerate() {
                restricted.set(i, j, v);
            }
        }
        out.push(restricted);
    }
    Ok(out)
}

fn split_spectrum(
    mats: &[Matrix<Scalar>],
    dim: usize,
    prefix: &mut Vec<SpectralValue>,
    out: &mut Vec<LinearForm>,
) -> Result<()> {
    let (head, rest) = match mats.split_first() {
        Some(pair) => pair,
        None => {
            out.push(LinearForm { coeffs: prefix.clone(), multiplicity: dim });
            return Ok(());
        }
    };
    let report = head.char_poly()?.roots()?;
    let mut seen = 0usize;
    let mut pieces: Vec<(SpectralValue, Matrix<Scalar>)> = Vec::new();
    for (root, _) in &report.rational {
        let shifted = head.sub(&Matrix::identity(dim).scale(root))?;
        pieces.push((SpectralValue::Rational(root.clone()), shifted));
    }
    for (tag, _) in &report.tagged {
        let evaluated = eval_poly_at_matrix(&tag.min_poly, head)?;
        pieces.push((SpectralValue::Algebraic(tag.clone()), evaluated));
    }
    for (value, factor) in pieces {
        let kernel = factor.pow(dim)?.kernel_basis();
        if kernel.is_empty() {
            continue;
        }
        seen += kernel.len();
        let restricted = restrict_all(rest, &kernel, dim)?;
        prefix.push(value);
        split_spectrum(&restricted, kernel.len(), prefix, out)?;
        prefix.pop();
    }
    if seen != dim {
        return Err(Error::shape(format!(
            "generalized eigenspaces cover {seen} of {dim} dimensions"
        )));
    }
    Ok(())
}

/// Splits the common space into joint generalized eigenspaces and returns
/// the multiset of eigenvalue tuples with their dimensions. By the
/// classification this multiset is the isomorphism class of the module the
/// system presents. Conjugate irrational eigenvalues stay bundled under
/// their minimal polynomial tag.
pub fn joint_spectrum_decompose(s: &ConstantSystem) -> Result<LinearModule> {
    if let Some((i, j)) = check_commuting(s) {
        return Err(Error::NotCommuting { i, j });
    }
    let mut forms = Vec::new();
    split_spectrum(&s.mats, s.size(), &mut Vec::new(), &mut forms)?;
    LinearModule::new(s.len(), forms)
}

/// Independent cross-check for one tuple: the multiplicity of (c_1..c_l) is
/// the dimension of the intersection of the generalized eigenspaces
/// ker (B_i - c_i)^size, computed as the kernel of the stacked matrices.
pub fn joint_multiplicity_bruteforce(
    s: &ConstantSystem,
    point: &[Scalar],
) -> Result<usize> {
    if point.len() != s.len() {
        return Err(Error::shape(format!(
            "{} coordinates for {} matrices",
            point.len(),
            s.len()
        )));
    }
    let n = s.size();
    let mut stacked = Matrix::zero(s.len() * n, n);
    for (block, (m, c)) in s.mats.iter().zip(point).enumerate() {
        let shifted = m.sub(&Matrix::identity(n).scale(c))?.pow(n)?;
        for i in 0..n {
            for j in 0..n {
                stacked.set(block * n + i, j, shifted.get(i, j).clone());
            }
        }
    }
    Ok(stacked.kernel_basis().len())
}

/// Betti numbers b_0..b_l in closed form: a zero form contributes the
/// cohomology of functions on affine l-space (one dimension in degree 0), a
/// nonzero form contributes nothing, and direct sums add.
pub fn derham_linear(m: &LinearModule) -> Vec<usize> {
    let mut betti = vec![0usize; m.dim() + 1];
    for f in m.forms() {
        if f.coeffs.iter().all(|c| c.is_zero()) {
            betti[0] += f.multiplicity;
        }
    }
    betti
}

/// dim Ext^1(m1, m2), computed as the first Betti number of the hom-twist.
/// The classification forces this to vanish; the computation goes through
/// the de Rham recursion rather than asserting it.
pub fn ext1_linear(m1: &LinearModule, m2: &LinearModule) -> Result<usize> {
    let hom = m1.hom_twist(m2)?;
    Ok(derham_linear(&hom)[1])
}

/// Betti numbers of the truncated twisted Koszul complex, with the
/// stabilization status across the last two degree cutoffs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KoszulReport {
    pub betti: Vec<usize>,
    pub stabilized: bool,
    pub degree_bound: usize,
}

fn monomials_up_to(l: usize, cap: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; l];
    fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, slot: usize, left: u32) {
        if slot == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=left {
            current[slot] = e;
            rec(out, current, slot + 1, left - e);
        }
        current[slot] = 0;
    }
    rec(&mut out, &mut current, 0, cap as u32);
    out
}

fn subsets_of_size(l: usize, p: usize) -> Vec<u32> {
    (0u32..(1 << l)).filter(|m| m.count_ones() as usize == p).collect()
}

/// Matrix of the twisted Koszul differential from p-forms to (p+1)-forms
/// over polynomials of total degree <= cap.
fn koszul_differential(
    lambda: &[Scalar],
    p: usize,
    cap: usize,
) -> (Matrix<Scalar>, Vec<u32>) {
    let l = lambda.len();
    let monos = monomials_up_to(l, cap);
    let mono_index: BTreeMap<&Vec<u32>, usize> =
        monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let src_masks = subsets_of_size(l, p);
    let dst_masks = subsets_of_size(l, p + 1);
    let dst_index: BTreeMap<u32, usize> =
        dst_masks.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let rows = dst_masks.len() * monos.len();
    let cols = src_masks.len() * monos.len();
    let mut d = Matrix::zero(rows, cols);
    let mut row_degrees = vec![0u32; rows];
    for (di, mask) in dst_masks.iter().enumerate() {
        for (mi, mono) in monos.iter().enumerate() {
            row_degrees[di * monos.len() + mi] = mono.iter().sum();
        }
        let _ = mask;
    }
    for (si, mask) in src_masks.iter().enumerate() {
        for (mi, mono) in monos.iter().enumerate() {
            let col = si * monos.len() + mi;
            for i in 0..l {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let below = (mask & ((1 << i) - 1)).count_ones();
                let sign = if below % 2 == 0 { Scalar::one() } else { -&Scalar::one() };
                let target_mask = dst_index[&(mask | (1 << i))];
                // Multiplication by lambda_i keeps the monomial.
                if !lambda[i].is_zero() {
                    let row = target_mask * monos.len() + mi;
                    let v = d.get(row, col) + &(&sign * &lambda[i]);
                    d.set(row, col, v);
                }
                // The derivative drops the exponent in slot i.
                if mono[i] > 0 {
                    let mut dropped = mono.clone();
                    dropped[i] -= 1;
                    let row = target_mask * monos.len() + mono_index[&dropped];
                    let weight = Scalar::from_int(mono[i] as i64);
                    let v = d.get(row, col) + &(&sign * &weight);
                    d.set(row, col, v);
                }
            }
        }
    }
    (d, row_degrees)
}

fn rank_of_rows_over(
    d: &Matrix<Scalar>,
    row_degrees: &[u32],
    keep_above: usize,
) -> usize {
    let kept: Vec<usize> = (0..d.rows())
        .filter(|&r| row_degrees[r] as usize > keep_above)
        .collect();
    if kept.is_empty() {
        return 0;
    }
    let mut sub = Matrix::zero(kept.len(), d.cols());
    for (ri, &r) in kept.iter().enumerate() {
        for c in 0..d.cols() {
            sub.set(ri, c, d.get(r, c).clone());
        }
    }
    sub.rank()
}

fn betti_at(lambda: &[Scalar], bound: usize) -> Result<Vec<usize>> {
    let l = lambda.len();
    // The differential never raises polynomial degree, so degree <= bound is
    // a subcomplex; incoming images may still need preimages of higher
    // degree, so the previous differential is taken with slack.
    let margin = l + 1;
    let count_dim = |cap: usize, p: usize| -> usize {
        monomials_up_to(l, cap).len() * subsets_of_size(l, p).len()
    };
    let mut betti = vec![0usize; l + 1];
    for p in 0..=l {
        let kernel_dim = if p == l {
            count_dim(bound, p)
        } else {
            let (d, _) = koszul_differential(lambda, p, bound);
            d.cols() - d.rank()
        };
        let image_dim = if p == 0 {
            0
        } else {
            let (a, degrees) = koszul_differential(lambda, p - 1, bound + margin);
            let full = a.rank();
            let outside = rank_of_rows_over(&a, &degrees, bound);
            full - outside
        };
        betti[p] = kernel_dim - image_dim;
    }
    Ok(betti)
}

/// Cohomology of the twisted Koszul complex computed by exact elimination on
/// polynomial degrees up to `degree_bound`, as an oracle for
/// [`derham_linear`]. Reports whether the values agree with the next lower
/// cutoff. Requires rational forms.
pub fn koszul_bruteforce(m: &LinearModule, degree_bound: usize) -> Result<KoszulReport> {
    if degree_bound < 1 {
        return Err(Error::bad_parameters("degree bound must be at least 1"));
    }
    let l = m.dim();
    let mut betti = vec![0usize; l + 1];
    let mut previous = vec![0usize; l + 1];
    for f in m.forms() {
        let mut lambda = Vec::with_capacity(l);
        for c in &f.coeffs {
            match c.as_rational() {
                Some(v) => lambda.push(v.clone()),
                None => {
                    return Err(Error::IrrationalEigenvalue { min_poly: c.to_string() })
                }
            }
        }
        let here = betti_at(&lambda, degree_bound)?;
        for (acc, b) in betti.iter_mut().zip(&here) {
            *acc += b * f.multiplicity;
        }
        if degree_bound >= 2 {
            let lower = betti_at(&lambda, degree_bound - 1)?;
            for (acc, b) in previous.iter_mut().zip(&lower) {
                *acc += b * f.multiplicity;
            }
        }
    }
    let stabilized = degree_bound >= 2 && betti == previous;
    Ok(KoszulReport { betti, stabilized, degree_bound })
}

/// Result of evaluating a presentation on the divisor fibre: the indices of
/// the generators kept as a basis, the commuting system they carry, and its
/// decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct Extraction {
    pub kept: Vec<usize>,
    pub system: ConstantSystem,
    pub module: LinearModule,
}

/// Value of a degree-bounded coefficient on the fibre t = 0.
fn constant_fiber_value(f: &ExpandableFraction, t_vars: &[String]) -> Result<Scalar> {
    if f.is_zero() {
        return Ok(Scalar::zero());
    }
    let var = f.var().to_string();
    let cancel = f.num().valuation_in(&var).unwrap_or(0);
    let effective = f.pole() - cancel as i64;
    if effective > 0 {
        return Err(Error::shape(format!(
            "coefficient {f} keeps a pole on the fibre; the degree bound should have rejected it"
        )));
    }
    if effective < 0 {
        return Ok(Scalar::zero());
    }
    let reduced = f.num().divide_by_var_pow(&var, cancel)?;
    let zeros: BTreeMap<String, Scalar> =
        t_vars.iter().map(|v| (v.clone(), Scalar::zero())).collect();
    let num0 = reduced.eval_partial(&zeros);
    let den0 = f.den().eval_partial(&zeros);
    match (num0.as_constant(), den0.as_constant()) {
        (Some(n), Some(d)) if !d.is_zero() => Ok(&n / &d),
        _ => Err(Error::shape(format!(
            "coefficient {f} is not constant on the fibre; the degree bound should have rejected it"
        ))),
    }
}

/// Expresses every generator over the free columns of the constant
/// relations, returning the coordinates and the free-space dimension.
fn quotient_coordinates(
    relations: &[Vec<Scalar>],
    generators: usize,
) -> Result<(Vec<Vec<Scalar>>, usize)> {
    if relations.is_empty() {
        let coords = (0..generators)
            .map(|u| {
                let mut v = vec![Scalar::zero(); generators];
                v[u] = Scalar::one();
                v
            })
            .collect();
        return Ok((coords, generators));
    }
    let rel = Matrix::from_rows(relations.to_vec())?;
    let (reduced, pivots) = rel.rref();
    let free: Vec<usize> =
        (0..generators).filter(|u| !pivots.contains(u)).collect();
    let slot: BTreeMap<usize, usize> =
        free.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut coords = vec![vec![Scalar::zero(); free.len()]; generators];
    for (i, &u) in free.iter().enumerate() {
        coords[u][i] = Scalar::one();
    }
    for (r, &piv) in pivots.iter().enumerate() {
        for &u in &free {
            coords[piv][slot[&u]] = -reduced.get(r, u);
        }
    }
    Ok((coords, free.len()))
}

/// Evaluates a degree-bounded presentation on the divisor fibre and names
/// the resulting module.
///
/// The coefficients become constants at t = 0; the constant relations are
/// eliminated by keeping the leftmost maximal independent subfamily of
/// generator images; the fibre derivative matrices are rebuilt over the kept
/// basis, checked to commute, and decomposed. A commutation failure is
/// reported as a falsifying error: it cannot happen for presentations that
/// genuinely come from a connection.
pub fn extract_restriction(p: &Presentation) -> Result<Extraction> {
    let verdict = check_property_l(p, None)?;
    if let Some(w) = verdict.witness {
        return Err(Error::PropertyLViolated { witness: w.describe() });
    }
    let m = p.generators();
    let l = p.y_vars().len();
    let mut constants = vec![vec![vec![Scalar::zero(); m]; m]; l];
    for i in 0..l {
        for q in 0..m {
            for u in 0..m {
                constants[i][q][u] =
                    constant_fiber_value(p.coefficient(i, q, u), p.t_vars())?;
            }
        }
    }
    let (coords, quotient_dim) = quotient_coordinates(p.constant_relations(), m)?;
    // Leftmost maximal independent subfamily of generator images.
    let mut kept: Vec<usize> = Vec::new();
    let mut chosen_rows: Vec<Vec<Scalar>> = Vec::new();
    for u in 0..m {
        if kept.len() == quotient_dim {
            break;
        }
        let mut candidate = chosen_rows.clone();
        candidate.push(coords[u].clone());
        if Matrix::from_rows(candidate.clone())?.rank() == kept.len() + 1 {
            kept.push(u);
            chosen_rows = candidate;
        }
    }
    let k = kept.len();
    // Coordinates of every generator in the kept basis.
    let mut basis = Matrix::zero(quotient_dim, k);
    for (j, &u) in kept.iter().enumerate() {
        for i in 0..quotient_dim {
            basis.set(i, j, coords[u][i].clone());
        }
    }
    let mut in_kept: Vec<Vec<Scalar>> = Vec::with_capacity(m);
    for u in 0..m {
        let x = basis.solve(&coords[u])?.ok_or_else(|| {
            Error::shape("kept family fails to span the fibre".to_string())
        })?;
        in_kept.push(x);
    }
    let mut mats = Vec::with_capacity(l);
    for block in constants.iter() {
        let mut b = Matrix::zero(k, k);
        for (col, &q) in kept.iter().enumerate() {
            let mut image = vec![Scalar::zero(); k];
            for u in 0..m {
                let c = &block[q][u];
                if c.is_zero() {
                    continue;
                }
                for (slot, base) in image.iter_mut().zip(&in_kept[u]) {
                    *slot += &(c * base);
                }
            }
            for (row, v) in image.into_iter().enumerate() {
                b.set(row, col, v);
            }
        }
        mats.push(b);
    }
    let system = ConstantSystem::new(mats)?;
    if let Some((i, j)) = check_commuting(&system) {
        return Err(Error::CommutationFailure { i, j });
    }
    let module = joint_spectrum_decompose(&system)?;
    Ok(Extraction { kept, system, module })
}
