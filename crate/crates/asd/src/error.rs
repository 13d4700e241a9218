//! Crate-wide error type.
//!
//! Every fallible operation returns `Result<T, Error>`. Variants carry enough
//! payload to reconstruct what went wrong without re-running the computation;
//! witnesses are rendered to strings so reports can embed them verbatim.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input text (expression, scalar, JSON field) failed to parse.
    Parse { detail: String },
    /// A fraction cannot be expanded along its distinguished variable.
    NotExpandable { detail: String },
    /// A substitution or evaluation referenced a variable the object does not know.
    UnknownVariable { name: String },
    /// A square-matrix operation received a rectangular matrix.
    NotSquare { rows: usize, cols: usize },
    /// Division by an identically zero polynomial or fraction.
    ZeroDenominator,
    /// Two objects disagree on shape (matrix dims, variable counts, rank totals).
    Shape { detail: String },
    /// Small-degree rational factorization could not certify a factor.
    FactorizationInconclusive { detail: String },
    /// No vector from the bounded candidate family was cyclic.
    CyclicVectorFailure { attempts: usize },
    /// Chart or model parameters out of range (n < 1, a < 1, point arity, ...).
    BadParameters { detail: String },
    /// Dilatation exponent is smaller than the pole order it must absorb.
    PoleTooHigh { pole_order: i64, a: i64 },
    /// Generic slope is not an integer, so no integral dilatation exponent fits.
    NonIntegerRank { rho: String },
    /// Dilatation exponent below the generic slope (or slope not positive).
    RankTooSmall { a: i64, rho: String },
    /// A claimed-commuting family has a non-commuting pair.
    NotCommuting { i: usize, j: usize },
    /// A presentation failed the degree bound check; carries the first witness.
    PropertyLViolated { witness: String },
    /// Restricted matrices fail to commute. Falsifies the extraction lemma;
    /// must not fire on valid inputs.
    CommutationFailure { i: usize, j: usize },
    /// Provided lattice action data is inconsistent with the module it claims
    /// to describe.
    LatticeNotStable { detail: String },
    /// A windowed search (annihilator degree, t-support, expansion order) ran
    /// out of room. Reports the window; never guesses.
    WindowExhausted { window: usize },
    /// The operation does not support this module kind.
    Unsupported { detail: String },
    /// Operation requires a localized module.
    NotLocalized,
    /// Generators do not span a t dt-stable lattice.
    NotStable { detail: String },
    /// No Bernstein polynomial found within the degree window.
    NoBoundFound { degree_window: usize },
    /// A residue matrix has an irrational eigenvalue; carries the tag.
    IrrationalEigenvalue { min_poly: String },
    /// A lattice is not stable under the claimed operators; carries the witness.
    StabilityFailure { operator: String, basis_index: usize, coefficient: String },
    /// A specialization limit failed to be linear in the fiber variables.
    /// Falsifies the linearity theorem; must not fire on valid inputs.
    NonLinearWitness { monomial: String, detail: String },
    /// I/O error surfaced through the CLI layer.
    Io { detail: String },
}

impl Error {
    pub fn parse(detail: impl Into<String>) -> Self {
        Error::Parse { detail: detail.into() }
    }

    pub fn bad_parameters(detail: impl Into<String>) -> Self {
        Error::BadParameters { detail: detail.into() }
    }

    pub fn unsupported(detail: impl Into<String>) -> Self {
        Error::Unsupported { detail: detail.into() }
    }

    pub fn shape(detail: impl Into<String>) -> Self {
        Error::Shape { detail: detail.into() }
    }

    /// Process exit code class: 1 usage/parse, 2 precondition, 3 falsifier.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::UnknownVariable { .. } | Error::Io { .. } => 1,
            Error::NonLinearWitness { .. } | Error::CommutationFailure { .. } => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { detail } => write!(f, "parse error: {detail}"),
            Error::NotExpandable { detail } => write!(f, "not expandable: {detail}"),
            Error::UnknownVariable { name } => write!(f, "unknown variable: {name}"),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix is not square: {rows}x{cols}")
            }
            Error::ZeroDenominator => write!(f, "zero denominator"),
            Error::Shape { detail } => write!(f, "shape mismatch: {detail}"),
            Error::FactorizationInconclusive { detail } => {
                write!(f, "factorization inconclusive: {detail}")
            }
            Error::CyclicVectorFailure { attempts } => {
                write!(f, "no cyclic vector found after {attempts} candidates")
            }
            Error::BadParameters { detail } => write!(f, "bad parameters: {detail}"),
            Error::PoleTooHigh { pole_order, a } => {
                write!(f, "pole order {pole_order} exceeds dilatation exponent {a}")
            }
            Error::NonIntegerRank { rho } => {
                write!(f, "generic slope {rho} is not an integer")
            }
            Error::RankTooSmall { a, rho } => {
                write!(f, "dilatation exponent {a} is below the generic slope {rho} (need a >= rho >= 1)")
            }
            Error::NotCommuting { i, j } => {
                write!(f, "matrices {i} and {j} do not commute")
            }
            Error::PropertyLViolated { witness } => {
                write!(f, "degree bound violated: {witness}")
            }
            Error::CommutationFailure { i, j } => {
                write!(f, "restricted matrices {i} and {j} do not commute (falsifier)")
            }
            Error::LatticeNotStable { detail } => {
                write!(f, "lattice action data inconsistent: {detail}")
            }
            Error::WindowExhausted { window } => {
                write!(f, "window exhausted: {window}")
            }
            Error::Unsupported { detail } => write!(f, "unsupported: {detail}"),
            Error::NotLocalized => write!(f, "module is not localized"),
            Error::NotStable { detail } => write!(f, "not a stable lattice: {detail}"),
            Error::NoBoundFound { degree_window } => {
                write!(f, "no annihilating polynomial up to degree {degree_window}")
            }
            Error::IrrationalEigenvalue { min_poly } => {
                write!(f, "irrational eigenvalue with minimal polynomial {min_poly}")
            }
            Error::StabilityFailure { operator, basis_index, coefficient } => write!(
                f,
                "lattice not stable: {operator} on basis element {basis_index} has coefficient {coefficient}"
            ),
            Error::NonLinearWitness { monomial, detail } => {
                write!(f, "non-linear specialization limit at monomial {monomial}: {detail}")
            }
            Error::Io { detail } => write!(f, "io error: {detail}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io { detail: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
