//! Exact symbolic engine for specializing meromorphic connections on affine
//! space along a coordinate hyperplane.
//!
//! The library models connections with poles along the hyperplane cut out by
//! the last coordinate, pulls them back to a parameterized tubular chart,
//! and specializes: the output is a family of linear forms, a system of
//! commuting constant matrices, or a graded piece of a filtered module,
//! depending on the question. All arithmetic is exact over the rationals;
//! irrational eigenvalues are carried symbolically by their minimal
//! polynomials.
//!
//! Module map:
//! - [`algebra`]: rationals, polynomials, matrices, series, rational
//!   functions.
//! - [`parse`]: expression parsing over a declared variable set.
//! - [`connection`]: elementary models, matrix connections, generic slope.
//! - [`dilatation`]: the tubular chart, pullbacks, twists, and the spectrum
//!   of linear forms they specialize to.
//! - [`linear`]: modules with constant connection matrices and their
//!   invariants.
//! - [`vfiltration`]: one-variable filtrations, graded pieces, and window
//!   solvers for annihilating polynomials.
//! - [`props`]: growth conditions on presentations and the lattice
//!   synthesis built on them.
//! - [`lattices`]: lattice normal forms, stability checks, and ramified
//!   base change.
//! - [`schema`], [`report`], [`cli`]: the JSON input format, deterministic
//!   reports, and the command-line front end.

pub mod algebra;
pub mod cli;
pub mod connection;
pub mod dilatation;
pub mod error;
pub mod lattices;
pub mod linear;
pub mod parse;
pub mod props;
pub mod report;
pub mod schema;
pub mod vfiltration;

pub use error::{Error, Result};
