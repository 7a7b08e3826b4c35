//! Metric scalars: exact rationals for the tree models, floating point with an
//! explicit comparison tolerance for the half-plane.

use std::fmt::{Debug, Display};
use std::ops::{Add, Neg, Sub};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

/// Value type produced by a model's distance function.
///
/// Exact implementations (`Rational64`) ignore the tolerance argument of the
/// comparison helpers; the float implementation treats it as an absolute slack.
pub trait Scalar:
    Copy
    + Clone
    + PartialOrd
    + PartialEq
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    /// Exact halving (Gromov products are half-sums of distances).
    fn half(self) -> Self;
    fn abs(self) -> Self;
    fn to_f64(self) -> f64;
    /// Whether comparisons on this scalar are exact.
    fn is_exact() -> bool;
    /// `self >= rhs`, allowing the value to fall short by `tol` when inexact.
    fn ge_tol(self, rhs: Self, tol: f64) -> bool;
    /// `self <= rhs`, allowing overshoot by `tol` when inexact.
    fn le_tol(self, rhs: Self, tol: f64) -> bool;
    /// `self > rhs` by a margin of at least `tol` when inexact.
    fn gt_margin(self, rhs: Self, tol: f64) -> bool;
}

impl Scalar for Rational64 {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn half(self) -> Self {
        self / 2
    }
    fn abs(self) -> Self {
        Signed::abs(&self)
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
    fn ge_tol(self, rhs: Self, _tol: f64) -> bool {
        self >= rhs
    }
    fn le_tol(self, rhs: Self, _tol: f64) -> bool {
        self <= rhs
    }
    fn gt_margin(self, rhs: Self, _tol: f64) -> bool {
        self > rhs
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn half(self) -> Self {
        self / 2.0
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn is_exact() -> bool {
        false
    }
    fn ge_tol(self, rhs: Self, tol: f64) -> bool {
        self >= rhs - tol
    }
    fn le_tol(self, rhs: Self, tol: f64) -> bool {
        self <= rhs + tol
    }
    fn gt_margin(self, rhs: Self, tol: f64) -> bool {
        self > rhs + tol
    }
}

pub fn smin<S: Scalar>(a: S, b: S) -> S {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn smax<S: Scalar>(a: S, b: S) -> S {
    if a >= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_half_is_exact() {
        let v = Rational64::from_integer(5);
        assert_eq!(v.half() + v.half(), v);
    }

    #[test]
    fn float_tolerance_comparisons() {
        assert!(1.0f64.ge_tol(1.0 + 1e-12, 1e-9));
        assert!(!1.0f64.ge_tol(1.1, 1e-9));
        assert!(1.0f64.gt_margin(0.5, 1e-9));
        assert!(!1.0f64.gt_margin(1.0, 1e-9));
    }
}
