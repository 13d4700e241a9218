//! One-variable filtrations along t = 0: annihilating polynomials of
//! sections, the canonical V-filtration, graded pieces and nearby cycles,
//! lattice-induced good filtrations, and filtration comparison.
//!
//! The module catalogue is deliberately small: twisted monomial modules
//! t^alpha * C[t] (localized or not) and exponential twists E^{q(1/t)} *
//! t^alpha, closed under finite direct sums. These are exactly the
//! one-variable slices the specialization pipeline produces, and on them
//! every computation here is exact and certified: an annihilator comes with
//! a rewriting witness, a filtration identity with the index range checked,
//! a comparison with explicit membership shifts.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::matrix::Matrix;
use crate::algebra::ratfun::RatFun;
use crate::algebra::scalar::Scalar;
use crate::algebra::upoly::{AlgebraicTag, UPoly};
use crate::error::{Error, Result};

/// Default t-support window for annihilator searches and membership tests.
pub const DEFAULT_WINDOW: i64 = 12;

/// How far the filtration identity of a lattice-induced good filtration is
/// checked.
pub const BONNE_CHECK_RANGE: i64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum OneVarModule {
    /// t^alpha * C[t], or t^alpha * C[t, 1/t] when localized.
    Monomial { alpha: Scalar, localized: bool },
    /// E^q * t^alpha with q = sum of coeff * t^{-order}; always localized.
    Exponential { polar: Vec<(u32, RatFun)>, alpha: Scalar },
    DirectSum(Vec<OneVarModule>),
}

impl OneVarModule {
    pub fn plain() -> Self {
        OneVarModule::Monomial { alpha: Scalar::zero(), localized: false }
    }

    pub fn laurent() -> Self {
        OneVarModule::Monomial { alpha: Scalar::zero(), localized: true }
    }

    pub fn exponential(polar: Vec<(u32, RatFun)>, alpha: Scalar) -> Result<Self> {
        if polar.is_empty() || polar.iter().any(|(j, c)| *j == 0 || c.is_zero()) {
            return Err(Error::bad_parameters(
                "exponential twist needs a nonzero polar part with positive orders".to_string(),
            ));
        }
        let mut seen = BTreeSet::new();
        for (j, _) in &polar {
            if !seen.insert(*j) {
                return Err(Error::bad_parameters("repeated polar order".to_string()));
            }
        }
        Ok(OneVarModule::Exponential { polar, alpha })
    }

    /// Flatten nested direct sums into leaves.
    pub fn leaves(&self) -> Vec<&OneVarModule> {
        match self {
            OneVarModule::DirectSum(parts) => parts.iter().flat_map(|p| p.leaves()).collect(),
            leaf => vec![leaf],
        }
    }

    pub fn localize(&self) -> Self {
        match self {
            OneVarModule::Monomial { alpha, .. } => {
                OneVarModule::Monomial { alpha: alpha.clone(), localized: true }
            }
            OneVarModule::Exponential { .. } => self.clone(),
            OneVarModule::DirectSum(parts) => {
                OneVarModule::DirectSum(parts.iter().map(|p| p.localize()).collect())
            }
        }
    }

    pub fn is_localized(&self) -> bool {
        match self {
            OneVarModule::Monomial { localized, .. } => *localized,
            OneVarModule::Exponential { .. } => true,
            OneVarModule::DirectSum(parts) => parts.iter().all(|p| p.is_localized()),
        }
    }
}

/// A finite section: one Laurent polynomial (exponent -> coefficient) per
/// leaf of the module.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub components: Vec<BTreeMap<i64, RatFun>>,
}

impl Section {
    pub fn single(power: i64) -> Self {
        let mut m = BTreeMap::new();
        m.insert(power, RatFun::one());
        Section { components: vec![m] }
    }

    pub fn generator() -> Self {
        Section::single(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }

    fn validate(&self, m: &OneVarModule) -> Result<()> {
        let leaves = m.leaves();
        if self.components.len() != leaves.len() {
            return Err(Error::shape(format!(
                "section has {} components, module has {} leaves",
                self.components.len(),
                leaves.len()
            )));
        }
        for (comp, leaf) in self.components.iter().zip(&leaves) {
            if let OneVarModule::Monomial { localized: false, .. } = leaf {
                if comp.keys().any(|&k| k < 0) {
                    return Err(Error::shape(
                        "negative t-power in a non-localized module".to_string(),
                    ));
                }
            }
            if comp.values().any(|c| c.is_zero()) {
                return Err(Error::shape("unnormalized zero coefficient".to_string()));
            }
        }
        Ok(())
    }
}

type Component = BTreeMap<i64, RatFun>;

fn comp_add(a: &Component, b: &Component) -> Component {
    let mut out = a.clone();
    for (k, c) in b {
        let v = out.remove(k).map(|x| x.add(c)).unwrap_or_else(|| c.clone());
        if v.is_zero() {
            out.remove(k);
        } else {
            out.insert(*k, v);
        }
    }
    out
}

fn comp_scale(a: &Component, c: &RatFun) -> Component {
    if c.is_zero() {
        return Component::new();
    }
    a.iter().map(|(k, v)| (*k, v.mul(c))).collect()
}

fn comp_shift(a: &Component, i: i64) -> Component {
    a.iter().map(|(k, v)| (k + i, v.clone())).collect()
}

/// t d/dt on one leaf.
fn leaf_theta(leaf: &OneVarModule, a: &Component) -> Component {
    let mut out = Component::new();
    let add = |out: &mut Component, k: i64, v: RatFun| {
        if v.is_zero() {
            return;
        }
        let nv = out.remove(&k).map(|x| x.add(&v)).unwrap_or(v);
        if nv.is_zero() {
            out.remove(&k);
        } else {
            out.insert(k, nv);
        }
    };
    match leaf {
        OneVarModule::Monomial { alpha, .. } => {
            for (k, c) in a {
                let factor = RatFun::from_scalar(&Scalar::from_int(*k) + alpha);
                add(&mut out, *k, c.mul(&factor));
            }
        }
        OneVarModule::Exponential { polar, alpha } => {
            for (k, c) in a {
                let factor = RatFun::from_scalar(&Scalar::from_int(*k) + alpha);
                add(&mut out, *k, c.mul(&factor));
                for (j, q) in polar {
                    let coef = q.scale(&Scalar::from_int(-(*j as i64)));
                    add(&mut out, k - *j as i64, c.mul(&coef));
                }
            }
        }
        OneVarModule::DirectSum(_) => unreachable!("leaves are not sums"),
    }
    out
}

/// Annihilator data for a section: the minimal monic polynomial b with
/// b(t d/dt) * section falling into t * (stable algebra) * section, plus the
/// exact rewriting witness.
#[derive(Debug, Clone)]
pub struct BernsteinData {
    pub b: UPoly,
    /// Per-leaf combinations: b(theta) s = sum coeff * t^i theta^j s.
    pub witness: Vec<LeafWitness>,
    pub ord_rational: Vec<(Scalar, usize)>,
    pub ord_tagged: Vec<(AlgebraicTag, usize)>,
    pub window: i64,
}

#[derive(Debug, Clone)]
pub struct LeafWitness {
    pub leaf: usize,
    pub combo: Vec<(i64, usize, RatFun)>,
}

impl BernsteinData {
    /// All roots accounted rationally.
    pub fn ord_is_rational(&self) -> bool {
        self.ord_tagged.is_empty()
    }
}

pub fn bernstein(m: &OneVarModule, section: &Section) -> Result<BernsteinData> {
    bernstein_windowed(m, section, DEFAULT_WINDOW)
}

pub fn bernstein_windowed(
    m: &OneVarModule,
    section: &Section,
    window: i64,
) -> Result<BernsteinData> {
    section.validate(m)?;
    if section.is_zero() {
        return Err(Error::bad_parameters("zero section".to_string()));
    }
    let leaves = m.leaves();
    // Minimal annihilator per leaf, then the least common multiple.
    let mut b = UPoly::one();
    for (li, comp) in section.components.iter().enumerate() {
        if comp.is_empty() {
            continue;
        }
        let leaf_b = minimal_annihilator(leaves[li], comp, window)?;
        let g = b.gcd(&leaf_b);
        b = b.mul(&leaf_b.divrem(&g)?.0);
    }
    // Re-derive the witness for the combined polynomial on every leaf.
    let mut witness = Vec::new();
    for (li, comp) in section.components.iter().enumerate() {
        if comp.is_empty() {
            continue;
        }
        let combo = express_in_span(leaves[li], comp, &b, window)?.ok_or_else(|| {
            Error::WindowExhausted { window: window as usize }
        })?;
        witness.push(LeafWitness { leaf: li, combo });
    }
    let data = BernsteinData {
        window,
        witness,
        ord_rational: Vec::new(),
        ord_tagged: Vec::new(),
        b,
    };
    let roots = data.b.roots()?;
    let data = BernsteinData {
        ord_rational: roots.rational,
        ord_tagged: roots.tagged,
        ..data
    };
    verify_bernstein(m, section, &data)?;
    Ok(data)
}

/// Independent re-check: apply b(theta), subtract the witness combination,
/// expect literal zero.
pub fn verify_bernstein(m: &OneVarModule, section: &Section, data: &BernsteinData) -> Result<()> {
    let leaves = m.leaves();
    let mut seen = vec![false; leaves.len()];
    for w in &data.witness {
        seen[w.leaf] = true;
        let comp = &section.components[w.leaf];
        let mut lhs = apply_poly_theta(leaves[w.leaf], &data.b, comp);
        for (i, j, coeff) in &w.combo {
            let mut term = comp.clone();
            for _ in 0..*j {
                term = leaf_theta(leaves[w.leaf], &term);
            }
            term = comp_shift(&term, *i);
            lhs = comp_add(&lhs, &comp_scale(&term, &coeff.neg()));
        }
        if !lhs.is_empty() {
            return Err(Error::shape(
                "annihilator witness failed to re-verify".to_string(),
            ));
        }
    }
    for (li, comp) in section.components.iter().enumerate() {
        if !comp.is_empty() && !seen[li] {
            return Err(Error::shape("witness misses a nonzero component".to_string()));
        }
    }
    Ok(())
}

fn apply_poly_theta(leaf: &OneVarModule, b: &UPoly, comp: &Component) -> Component {
    let mut acc = Component::new();
    let mut power = comp.clone();
    for k in 0..=b.degree().unwrap_or(0) {
        let c = b.coeff(k);
        if !c.is_zero() {
            acc = comp_add(&acc, &comp_scale(&power, &RatFun::from_scalar(c)));
        }
        power = leaf_theta(leaf, &power);
    }
    acc
}

/// Smallest monic b with b(theta) s in span{ t^i theta^j s : i >= 1 }.
fn minimal_annihilator(leaf: &OneVarModule, comp: &Component, window: i64) -> Result<UPoly> {
    for d in 0..=window as usize {
        // Unknowns: lower coefficients of b (degree d monic), plus the span
        // combination. Solve theta^d s + sum beta_k theta^k s = span.
        let mut columns: Vec<Component> = Vec::new();
        let mut theta_pows = vec![comp.clone()];
        for _ in 0..d.max(1) + window as usize {
            let last = theta_pows.last().unwrap();
            theta_pows.push(leaf_theta(leaf, last));
        }
        for k in 0..d {
            columns.push(comp_scale(&theta_pows[k], &RatFun::from_int(-1)));
        }
        let span_cols = span_columns(&theta_pows, window);
        columns.extend(span_cols.iter().map(|(_, _, c)| c.clone()));
        let rhs = theta_pows[d].clone();
        if let Some(sol) = solve_components(&columns, &rhs)? {
            let mut coeffs = vec![Scalar::zero(); d + 1];
            coeffs[d] = Scalar::one();
            for (k, c) in coeffs.iter_mut().enumerate().take(d) {
                let v = &sol[k];
                let Some(p) = v.to_mpoly().and_then(|p| p.as_constant()) else {
                    return Err(Error::unsupported(
                        "annihilator coefficients depend on parameters".to_string(),
                    ));
                };
                *c = p;
            }
            return Ok(UPoly::from_coeffs(coeffs));
        }
    }
    Err(Error::WindowExhausted { window: window as usize })
}

/// Solve b(theta) s = sum coeff t^i theta^j s for a FIXED b; returns the
/// combination or None when the window span misses it.
fn express_in_span(
    leaf: &OneVarModule,
    comp: &Component,
    b: &UPoly,
    window: i64,
) -> Result<Option<Vec<(i64, usize, RatFun)>>> {
    let deg = b.degree().unwrap_or(0);
    let mut theta_pows = vec![comp.clone()];
    for _ in 0..deg + window as usize {
        let last = theta_pows.last().unwrap();
        theta_pows.push(leaf_theta(leaf, last));
    }
    let span_cols = span_columns(&theta_pows, window);
    let columns: Vec<Component> = span_cols.iter().map(|(_, _, c)| c.clone()).collect();
    let rhs = apply_poly_theta(leaf, b, comp);
    let Some(sol) = solve_components(&columns, &rhs)? else {
        return Ok(None);
    };
    let mut combo = Vec::new();
    for ((i, j, _), coeff) in span_cols.iter().zip(sol) {
        if !coeff.is_zero() {
            combo.push((*i, *j, coeff));
        }
    }
    Ok(Some(combo))
}

/// Candidate span elements t^i theta^j s for i in 1..=window, j bounded.
fn span_columns(theta_pows: &[Component], window: i64) -> Vec<(i64, usize, Component)> {
    let jmax = (theta_pows.len() - 1).min(window as usize);
    let mut out = Vec::new();
    for i in 1..=window {
        for (j, tp) in theta_pows.iter().enumerate().take(jmax + 1) {
            out.push((i, j, comp_shift(tp, i)));
        }
    }
    out
}

/// Exact linear solve over the coefficient field, rows indexed by exponents.
fn solve_components(columns: &[Component], rhs: &Component) -> Result<Option<Vec<RatFun>>> {
    let mut rows: BTreeSet<i64> = rhs.keys().copied().collect();
    for c in columns {
        rows.extend(c.keys().copied());
    }
    let row_list: Vec<i64> = rows.into_iter().collect();
    let mut mat = Matrix::zero(row_list.len(), columns.len());
    for (ci, col) in columns.iter().enumerate() {
        for (ri, key) in row_list.iter().enumerate() {
            if let Some(v) = col.get(key) {
                mat.set(ri, ci, v.clone());
            }
        }
    }
    let rhs_vec: Vec<RatFun> = row_list
        .iter()
        .map(|k| rhs.get(k).cloned().unwrap_or_else(RatFun::zero))
        .collect();
    mat.solve(&rhs_vec)
}

/// Closed description of the canonical filtration step at index a.
#[derive(Debug, Clone)]
pub struct CanonicalV {
    pub a: Scalar,
    /// Per leaf: minimal admitted t-exponent, or None when the whole leaf is
    /// contained (exponential kind).
    pub min_exponents: Vec<Option<i64>>,
    /// Same for the strict step (indices < a).
    pub strict_min_exponents: Vec<Option<i64>>,
}

impl CanonicalV {
    pub fn contains(&self, s: &Section) -> bool {
        self.member(s, false)
    }

    pub fn contains_strict(&self, s: &Section) -> bool {
        self.member(s, true)
    }

    fn member(&self, s: &Section, strict: bool) -> bool {
        let bounds = if strict { &self.strict_min_exponents } else { &self.min_exponents };
        s.components.iter().zip(bounds).all(|(comp, bound)| match bound {
            None => true,
            Some(min) => comp.keys().all(|k| k >= min),
        })
    }
}

pub(crate) fn floor_scalar(x: &Scalar) -> Result<i64> {
    x.floor_i64().ok_or_else(|| {
        Error::bad_parameters("filtration index out of machine range".to_string())
    })
}

pub(crate) fn ceil_scalar(x: &Scalar) -> Result<i64> {
    Ok(-floor_scalar(&-x)?)
}

/// The canonical V-step at index a: sections whose annihilator roots are all
/// at least -a.
pub fn canonical_v(m: &OneVarModule, a: &Scalar) -> Result<CanonicalV> {
    let mut min_exponents = Vec::new();
    let mut strict_min_exponents = Vec::new();
    for leaf in m.leaves() {
        match leaf {
            OneVarModule::Monomial { alpha, localized } => {
                // t^k has annihilator root k + alpha; admitted when
                // k + alpha >= -a.
                let lo = ceil_scalar(&(-a - alpha))?;
                let strict_lo = floor_scalar(&(-a - alpha))? + 1;
                let clamp = |v: i64| if *localized { v } else { v.max(0) };
                min_exponents.push(Some(clamp(lo)));
                strict_min_exponents.push(Some(clamp(strict_lo)));
            }
            OneVarModule::Exponential { .. } => {
                // Constant annihilator: every section sits in every step.
                min_exponents.push(None);
                strict_min_exponents.push(None);
            }
            OneVarModule::DirectSum(_) => unreachable!(),
        }
    }
    Ok(CanonicalV { a: a.clone(), min_exponents, strict_min_exponents })
}

/// One graded piece of the canonical filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedPiece {
    pub a: Scalar,
    /// Section labels, one per basis vector.
    pub basis: Vec<String>,
    /// t d/dt acting on the basis.
    pub action: Matrix<Scalar>,
}

/// Graded piece at one index.
pub fn gr_piece(m: &OneVarModule, a: &Scalar) -> Result<GradedPiece> {
    let mut basis = Vec::new();
    for (li, leaf) in m.leaves().iter().enumerate() {
        if let OneVarModule::Monomial { alpha, localized } = leaf {
            // Nonzero class exactly when -a - alpha is an admitted exponent.
            let k = -a - alpha;
            if !k.is_integer() {
                continue;
            }
            let k = k.to_i64().ok_or_else(|| {
                Error::bad_parameters("filtration index out of machine range".to_string())
            })?;
            if !localized && k < 0 {
                continue;
            }
            basis.push((li, k));
        }
    }
    let dim = basis.len();
    let mut action = Matrix::zero(dim, dim);
    for (idx, _) in basis.iter().enumerate() {
        // theta(t^k t^alpha e) = (k + alpha) t^k t^alpha e = -a * class.
        action.set(idx, idx, -a);
    }
    Ok(GradedPiece {
        a: a.clone(),
        basis: basis
            .iter()
            .map(|(li, k)| format!("[t^{k}:leaf{li}]"))
            .collect(),
        action,
    })
}

/// Nearby cycles: graded pieces over -1 <= a < 0, only nonzero ones.
pub fn gr_psi(m: &OneVarModule) -> Result<Vec<GradedPiece>> {
    let mut jumps: BTreeSet<Scalar> = BTreeSet::new();
    for leaf in m.leaves() {
        if let OneVarModule::Monomial { alpha, localized } = leaf {
            // a = -(k + alpha) for the unique k with k + alpha in (0, 1],
            // equivalently a in [-1, 0).
            let k = floor_scalar(&(Scalar::one() - alpha))?;
            debug_assert!({
                let v = &Scalar::from_int(k) + alpha;
                v > Scalar::zero() && v <= Scalar::one()
            });
            if *localized || k >= 0 {
                jumps.insert(-(&Scalar::from_int(k) + alpha));
            }
        }
    }
    let mut out = Vec::new();
    for a in jumps {
        let piece = gr_piece(m, &a)?;
        if !piece.basis.is_empty() {
            out.push(piece);
        }
    }
    Ok(out)
}

/// Nearby cycles do not change under localization; returns the two graded
/// lists for inspection.
pub fn localization_invariance(
    m: &OneVarModule,
) -> Result<(bool, Vec<GradedPiece>, Vec<GradedPiece>)> {
    let before = gr_psi(m)?;
    let after = gr_psi(&m.localize())?;
    Ok((before == after, before, after))
}

/// A good filtration induced by a lattice: U_k = t^{-k} U_0 with U_0 given
/// by one generator per leaf.
#[derive(Debug, Clone)]
pub struct GoodVFiltration {
    /// Per-leaf lattice shifts: U_0 restricted to leaf q is t^{shift_q} C[t].
    pub shifts: Vec<i64>,
    /// Eigenvalues of t d/dt on U_0 / t U_0.
    pub eigenvalues: Vec<Scalar>,
    /// Minimal valid base index for the filtration identity.
    pub k0: i64,
    /// (k, identity holds) for k = 0..=BONNE_CHECK_RANGE at k0.
    pub identity_checks: Vec<(i64, bool)>,
}

impl GoodVFiltration {
    /// U_k restricted to a leaf is t^{shift - k} C[t].
    pub fn step_min_exponent(&self, leaf: usize, k: i64) -> i64 {
        self.shifts[leaf] - k
    }
}

/// Generators of a candidate lattice: either plain shifts (t^m per leaf) or
/// one explicit Laurent generator per leaf.
#[derive(Debug, Clone)]
pub enum LatticeGenerators {
    Shifts(Vec<i64>),
    Sections(Vec<Component>),
}

pub fn lattice_to_good_v(m: &OneVarModule, gens: &LatticeGenerators) -> Result<GoodVFiltration> {
    if !m.is_localized() {
        return Err(Error::NotLocalized);
    }
    let leaves = m.leaves();
    let shifts: Vec<i64> = match gens {
        LatticeGenerators::Shifts(s) => {
            if s.len() != leaves.len() {
                return Err(Error::shape("one shift per leaf required".to_string()));
            }
            s.clone()
        }
        LatticeGenerators::Sections(secs) => {
            if secs.len() != leaves.len() {
                return Err(Error::shape("one generator per leaf required".to_string()));
            }
            let mut out = Vec::new();
            for (leaf, sec) in leaves.iter().zip(secs) {
                out.push(reduce_generator(leaf, sec)?);
            }
            out
        }
    };
    // Stability of U_0 under t d/dt and eigenvalues on U_0 / t U_0. For
    // monomial leaves theta is diagonal, so a shift lattice is stable and the
    // eigenvalue at leaf q is shift_q + alpha_q. Exponential leaves are never
    // stable: theta drops t-exponents by the polar order.
    let mut eigenvalues = Vec::new();
    for (leaf, shift) in leaves.iter().zip(&shifts) {
        match leaf {
            OneVarModule::Monomial { alpha, .. } => {
                eigenvalues.push(&Scalar::from_int(*shift) + alpha);
            }
            OneVarModule::Exponential { polar, .. } => {
                let worst = polar.iter().map(|(j, _)| *j).max().unwrap_or(1);
                return Err(Error::NotStable {
                    detail: format!(
                        "t*d/dt drops the generator by t^{worst}; no finite lattice is stable"
                    ),
                });
            }
            OneVarModule::DirectSum(_) => unreachable!(),
        }
    }
    // Minimal base index: strictly past every integer eigenvalue.
    let mut k0 = 0;
    for e in &eigenvalues {
        if e.is_integer() {
            k0 = k0.max(floor_scalar(e)? + 1);
        }
    }
    let mut filtration = GoodVFiltration {
        shifts,
        eigenvalues,
        k0,
        identity_checks: Vec::new(),
    };
    let mut checks = Vec::new();
    for k in 0..=BONNE_CHECK_RANGE {
        checks.push((k, check_identity(m, &filtration, filtration.k0, k)?));
    }
    if checks.iter().any(|(_, ok)| !ok) {
        return Err(Error::shape(
            "good filtration identity failed at the derived base index".to_string(),
        ));
    }
    filtration.identity_checks = checks;
    Ok(filtration)
}

/// Reduce a one-generator lattice on a leaf to its shift; errors when the
/// generator does not span a stable full lattice.
fn reduce_generator(leaf: &OneVarModule, gen: &Component) -> Result<i64> {
    if gen.is_empty() {
        return Err(Error::bad_parameters("zero lattice generator".to_string()));
    }
    let lo = *gen.keys().next().unwrap();
    if gen.len() == 1 {
        return Ok(lo);
    }
    // Multi-term generator g = t^lo * ghat with ghat(0) != 0 and
    // deg ghat > 0: C[t]g localizes to a proper submodule, and theta g
    // escapes the span. Witness via the theta action.
    let theta_g = leaf_theta(leaf, gen);
    Err(Error::NotStable {
        detail: format!(
            "generator with {} terms: t*d/dt maps it to {} terms outside its own C[t]-span",
            gen.len(),
            theta_g.len()
        ),
    })
}

/// Does U_{k + k0} equal the span of d/dt^i U_{k0} for i = 0..=k?
pub fn check_identity(m: &OneVarModule, f: &GoodVFiltration, k0: i64, k: i64) -> Result<bool> {
    for (li, leaf) in m.leaves().iter().enumerate() {
        let OneVarModule::Monomial { alpha, .. } = leaf else {
            return Ok(false);
        };
        let base = f.shifts[li] - k0; // U_{k0} = t^{base} C[t]
        let lhs_min = base - k; // U_{k+k0} = t^{base-k} C[t]
        // Exponents produced by sum_{i<=k} d/dt^i t^{base} C[t]; d/dt^i kills
        // t^j exactly when (j+alpha)(j-1+alpha)...(j-i+1+alpha) = 0.
        let window_lo = lhs_min - 2;
        let window_hi = base + k + ceil_scalar(&alpha.abs())? + 3;
        for e in window_lo..=window_hi {
            let mut reachable = false;
            for i in 0..=k {
                let j = e + i;
                if j < base {
                    continue;
                }
                let mut nonzero = true;
                for step in 0..i {
                    if (&Scalar::from_int(j - step) + alpha).is_zero() {
                        nonzero = false;
                        break;
                    }
                }
                if nonzero {
                    reachable = true;
                    break;
                }
            }
            let expected = e >= lhs_min;
            if reachable != expected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Minimal shifts (k1, k2) with U_k inside U'_{k+k1} and U'_k inside
/// U_{k+k2} for all k, certified by per-leaf exponent comparison.
pub fn compare_filtrations(
    m: &OneVarModule,
    u: &GoodVFiltration,
    v: &GoodVFiltration,
) -> Result<(i64, i64)> {
    let leaves = m.leaves().len();
    if u.shifts.len() != leaves || v.shifts.len() != leaves {
        return Err(Error::shape("filtrations over different modules".to_string()));
    }
    // t^{m_q - k} C[t] inside t^{m'_q - k - k1} C[t] iff k1 >= m'_q - m_q.
    let k1 = (0..leaves).map(|q| v.shifts[q] - u.shifts[q]).max().unwrap_or(0);
    let k2 = (0..leaves).map(|q| u.shifts[q] - v.shifts[q]).max().unwrap_or(0);
    // Certify on a window of indices by direct membership.
    for k in -3..=3 {
        for q in 0..leaves {
            if u.step_min_exponent(q, k) < v.step_min_exponent(q, k + k1)
                || v.step_min_exponent(q, k) < u.step_min_exponent(q, k + k2)
            {
                return Err(Error::NoBoundFound { degree_window: 3 });
            }
        }
    }
    Ok((k1, k2))
}

/// The restriction triangle: multiplication by t between the graded pieces
/// one step apart, with kernel and cokernel dimensions.
#[derive(Debug, Clone)]
pub struct RestrictionComplex {
    pub upper: GradedPiece,
    pub lower: GradedPiece,
    pub t_map: Matrix<Scalar>,
    pub h0_dim: usize,
    pub hminus1_dim: usize,
}

pub fn restriction_complex(m: &OneVarModule) -> Result<RestrictionComplex> {
    let upper = gr_piece(m, &Scalar::one())?;
    let lower = gr_piece(m, &Scalar::zero())?;
    // Multiplication by t sends the class of t^k at the upper index to the
    // class of t^{k+1} at the lower one; on monomial leaves this map has
    // matrix entry 1 whenever both classes exist on the same leaf.
    let parse_leaf = |label: &String| -> usize {
        label
            .split("leaf")
            .nth(1)
            .and_then(|s| s.trim_end_matches(']').parse().ok())
            .expect("label format")
    };
    let mut t_map = Matrix::zero(lower.basis.len(), upper.basis.len());
    for (col, ul) in upper.basis.iter().enumerate() {
        let leaf = parse_leaf(ul);
        if let Some(row) = lower.basis.iter().position(|ll| parse_leaf(ll) == leaf) {
            t_map.set(row, col, Scalar::one());
        }
    }
    let rank = t_map.rank();
    let hminus1_dim = upper.basis.len() - rank;
    let h0_dim = lower.basis.len() - rank;
    Ok(RestrictionComplex { upper, lower, t_map, h0_dim, hminus1_dim })
}

/// The vanishing the spectrum classifier relies on: a genuinely polar
/// exponential one-variable slice has empty nearby cycles, certified by a
/// constant annihilator with its rewriting witness.
pub fn psi_vanishes_for_polar(polar: &[(u32, Scalar)]) -> Result<bool> {
    let polar: Vec<(u32, RatFun)> = polar
        .iter()
        .map(|(j, c)| (*j, RatFun::from_scalar(c.clone())))
        .collect();
    let m = OneVarModule::exponential(polar, Scalar::zero())?;
    let data = bernstein(&m, &Section::generator())?;
    let constant = data.b.degree() == Some(0);
    let empty = gr_psi(&m)?.is_empty();
    Ok(constant && empty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn half() -> Scalar {
        Scalar::from_pair(1, 2).unwrap()
    }

    #[test]
    fn annihilator_of_one_is_s() {
        let m = OneVarModule::laurent();
        let data = bernstein(&m, &Section::generator()).unwrap();
        assert_eq!(data.b.to_string(), "s");
        assert_eq!(data.ord_rational, vec![(Scalar::zero(), 1)]);
    }

    #[test]
    fn annihilator_of_inverse_t_is_s_plus_one() {
        let m = OneVarModule::laurent();
        let data = bernstein(&m, &Section::single(-1)).unwrap();
        assert_eq!(data.b.to_string(), "s + 1");
        assert_eq!(data.ord_rational, vec![(scalar(-1), 1)]);
    }

    #[test]
    fn exponential_annihilator_is_constant_with_witness() {
        let m = OneVarModule::exponential(
            vec![(1, RatFun::one())],
            Scalar::zero(),
        )
        .unwrap();
        let data = bernstein(&m, &Section::generator()).unwrap();
        assert_eq!(data.b.to_string(), "1");
        assert!(data.ord_rational.is_empty() && data.ord_tagged.is_empty());
        // The witness is stored and already re-verified inside bernstein;
        // check the identity shape once more by hand.
        verify_bernstein(&m, &Section::generator(), &data).unwrap();
    }

    #[test]
    fn mixed_section_annihilator_sees_the_polar_term() {
        let m = OneVarModule::laurent();
        let mut comp = BTreeMap::new();
        comp.insert(0, RatFun::one());
        comp.insert(-1, RatFun::one());
        let s = Section { components: vec![comp] };
        let data = bernstein(&m, &s).unwrap();
        // (theta + 1)(1 + 1/t) = 1 = -t theta (1 + 1/t): the tame tail is
        // absorbed into the span, only the t^{-1} root remains.
        assert_eq!(data.b.to_string(), "s + 1");
    }

    #[test]
    fn canonical_v_on_laurent_module() {
        let m = OneVarModule::laurent();
        let v0 = canonical_v(&m, &Scalar::zero()).unwrap();
        assert!(v0.contains(&Section::generator()));
        assert!(!v0.contains_strict(&Section::generator()));
        let v1 = canonical_v(&m, &scalar(1)).unwrap();
        assert!(v1.contains(&Section::single(-1)));
        assert!(!v1.contains_strict(&Section::single(-1)));
        assert!(!v0.contains(&Section::single(-1)));
    }

    #[test]
    fn canonical_v_on_exponential_is_degenerate() {
        let m = OneVarModule::exponential(vec![(1, RatFun::one())], Scalar::zero()).unwrap();
        for a in [-3, 0, 2] {
            let v = canonical_v(&m, &scalar(a)).unwrap();
            assert!(v.contains_strict(&Section::single(-5)));
        }
    }

    #[test]
    fn nearby_cycles_of_laurent_module() {
        let m = OneVarModule::laurent();
        let psi = gr_psi(&m).unwrap();
        assert_eq!(psi.len(), 1);
        assert_eq!(psi[0].a, scalar(-1));
        assert_eq!(psi[0].basis, vec!["[t^1:leaf0]".to_string()]);
        assert_eq!(psi[0].action.get(0, 0), &scalar(1));
    }

    #[test]
    fn nearby_cycles_of_exponential_are_empty() {
        let m = OneVarModule::exponential(vec![(1, RatFun::one())], Scalar::zero()).unwrap();
        assert!(gr_psi(&m).unwrap().is_empty());
    }

    #[test]
    fn nearby_cycles_of_shifted_module() {
        let m = OneVarModule::Monomial { alpha: half(), localized: true };
        let psi = gr_psi(&m).unwrap();
        assert_eq!(psi.len(), 1);
        assert_eq!(psi[0].a, -half());
        assert_eq!(psi[0].basis.len(), 1);
    }

    #[test]
    fn localization_does_not_change_nearby_cycles() {
        for m in [
            OneVarModule::plain(),
            OneVarModule::Monomial { alpha: half(), localized: false },
            OneVarModule::DirectSum(vec![OneVarModule::plain(), OneVarModule::laurent()]),
        ] {
            let (ok, _, _) = localization_invariance(&m).unwrap();
            assert!(ok);
        }
    }

    #[test]
    fn lattice_filtration_on_laurent_module() {
        let m = OneVarModule::laurent();
        let f = lattice_to_good_v(&m, &LatticeGenerators::Shifts(vec![0])).unwrap();
        assert_eq!(f.eigenvalues, vec![Scalar::zero()]);
        assert_eq!(f.k0, 1);
        assert!(f.identity_checks.iter().all(|(_, ok)| *ok));
        // Minimality: the identity fails for k0 - 1.
        assert!(!check_identity(&m, &f, f.k0 - 1, 1).unwrap());
    }

    #[test]
    fn lattice_filtration_shifted_generator() {
        let m = OneVarModule::laurent();
        let f = lattice_to_good_v(&m, &LatticeGenerators::Shifts(vec![1])).unwrap();
        assert_eq!(f.eigenvalues, vec![scalar(1)]);
        assert_eq!(f.k0, 2);
        assert!(!check_identity(&m, &f, f.k0 - 1, 1).unwrap());
    }

    #[test]
    fn unstable_generator_is_rejected() {
        let m = OneVarModule::laurent();
        let mut gen = Component::new();
        gen.insert(0, RatFun::one());
        gen.insert(-1, RatFun::one());
        let err = lattice_to_good_v(&m, &LatticeGenerators::Sections(vec![gen])).unwrap_err();
        assert!(matches!(err, Error::NotStable { .. }));
    }

    #[test]
    fn non_localized_module_is_rejected() {
        let m = OneVarModule::plain();
        let err = lattice_to_good_v(&m, &LatticeGenerators::Shifts(vec![0])).unwrap_err();
        assert!(matches!(err, Error::NotLocalized));
    }

    #[test]
    fn filtration_comparison_shifts() {
        let m = OneVarModule::laurent();
        let u = lattice_to_good_v(&m, &LatticeGenerators::Shifts(vec![0])).unwrap();
        // U'_k = V_k(D) t^{-1} = t^{-k-1} C[t]: the lattice shifted by -1.
        let v = lattice_to_good_v(&m, &LatticeGenerators::Shifts(vec![-1])).unwrap();
        assert_eq!(compare_filtrations(&m, &u, &v).unwrap(), (-1, 1));
        assert_eq!(compare_filtrations(&m, &u, &u).unwrap(), (0, 0));
    }

    #[test]
    fn restriction_complex_cases() {
        let plain = restriction_complex(&OneVarModule::plain()).unwrap();
        assert_eq!((plain.h0_dim, plain.hminus1_dim), (1, 0));

        let laurent = restriction_complex(&OneVarModule::laurent()).unwrap();
        assert_eq!((laurent.h0_dim, laurent.hminus1_dim), (0, 0));

        let exp = restriction_complex(
            &OneVarModule::exponential(vec![(1, RatFun::one())], Scalar::zero()).unwrap(),
        )
        .unwrap();
        assert_eq!((exp.h0_dim, exp.hminus1_dim), (0, 0));
        assert!(exp.upper.basis.is_empty() && exp.lower.basis.is_empty());
    }

    #[test]
    fn psi_vanishing_helper() {
        assert!(psi_vanishes_for_polar(&[(1, scalar(3))]).unwrap());
        assert!(psi_vanishes_for_polar(&[(2, scalar(-1)), (1, half())]).unwrap());
    }

    #[test]
    fn parametric_exponential_annihilator() {
        // E^{c/t} with symbolic c: still constant annihilator, with the
        // witness coefficients in the parameter field.
        let c = RatFun::var("c");
        let m = OneVarModule::exponential(vec![(1, c)], Scalar::zero()).unwrap();
        let data = bernstein(&m, &Section::generator()).unwrap();
        assert_eq!(data.b.to_string(), "1");
    }
}
