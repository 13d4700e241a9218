//! Minimal field interface for the exact linear algebra in this crate.
//!
//! Implemented by `Scalar` (rationals) and `RatFun` (rational functions).
//! A tiny internal trait keeps the matrix code free of higher-ranked operator
//! bounds while staying fully exact.

use super::scalar::Scalar;
use crate::error::{Error, Result};

pub trait Field: Clone + PartialEq + std::fmt::Debug + std::fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;

    fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }
}

impl Field for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn from_int(v: i64) -> Self {
        Scalar::from_int(v)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        if Scalar::is_zero(self) {
            Err(Error::ZeroDenominator)
        } else {
            self.recip()
        }
    }
}
