//! Exact computer algebra: rationals, polynomials, matrices, fractions with
//! a distinguished pole variable, truncated Laurent series, and rational
//! functions. Everything downstream builds on these; nothing here is
//! approximate.

pub mod field;
pub mod fraction;
pub mod matrix;
pub mod mpoly;
pub mod ratfun;
pub mod scalar;
pub mod series;
pub mod upoly;

pub use field::Field;
pub use fraction::ExpandableFraction;
pub use matrix::Matrix;
pub use mpoly::MPoly;
pub use ratfun::RatFun;
pub use scalar::Scalar;
pub use series::TruncatedSeries;
pub use upoly::{AlgebraicTag, SpectralValue, UPoly};
