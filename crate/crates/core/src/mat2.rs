//! 2×2 integer matrices of determinant one and their Möbius action on the
//! extended real line.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::surd::{ExtReal, QuadSurd};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix {0} has determinant {1}, expected 1")]
    BadDeterminant(String, BigInt),
}

/// An element of SL(2, Z). Entries are arbitrary-precision so that high powers
/// and commutators stay exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Mat2, MatError> {
        Mat2::from_bigints(a.into(), b.into(), c.into(), d.into())
    }

    pub fn from_bigints(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Mat2, MatError> {
        let m = Mat2 { a, b, c, d };
        let det = m.det();
        if !det.is_one() {
            return Err(MatError::BadDeterminant(m.to_string(), det));
        }
        Ok(m)
    }

    pub fn identity() -> Mat2 {
        Mat2 {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    /// The standard parabolic generator z ↦ z + 1.
    pub fn t() -> Mat2 {
        Mat2::new(1, 1, 0, 1).unwrap()
    }

    /// The standard order-four rotation z ↦ -1/z.
    pub fn s() -> Mat2 {
        Mat2::new(0, -1, 1, 0).unwrap()
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    pub fn pow(&self, n: i64) -> Mat2 {
        let mut base = if n >= 0 { self.clone() } else { self.inverse() };
        let mut k = n.unsigned_abs();
        let mut out = Mat2::identity();
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    /// Whether the matrix is ±I, i.e. acts as the identity Möbius map.
    pub fn is_projective_identity(&self) -> bool {
        self.b.is_zero()
            && self.c.is_zero()
            && self.a == self.d
            && (&self.a * &self.a).is_one()
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    /// Möbius action on the extended real boundary, kept exact on surds.
    pub fn moebius_boundary(&self, z: &ExtReal) -> ExtReal {
        match z {
            ExtReal::Infinity => {
                if self.c.is_zero() {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(QuadSurd::new(
                        self.a.clone(),
                        BigInt::zero(),
                        self.c.clone(),
                        BigInt::one(),
                    ))
                }
            }
            ExtReal::Finite(s) => {
                let u = &self.a * &s.p + &self.b * &s.r; // numerator rational part (over r)
                let v = &self.c * &s.p + &self.d * &s.r; // denominator rational part (over r)
                let new_r = &v * &v - &self.c * &self.c * &s.q * &s.q * &s.d;
                if new_r.is_zero() {
                    return ExtReal::Infinity;
                }
                let new_p = &u * &v - &self.a * &self.c * &s.q * &s.q * &s.d;
                let new_q = &s.q * &s.r; // q·r·det
                ExtReal::Finite(QuadSurd::new(new_p, new_q, new_r, s.d.clone()))
            }
        }
    }

    /// The two boundary fixed points of a matrix with |trace| > 2, as
    /// (attracting, repelling). Roots of c z² + (d - a) z - b = 0.
    pub fn loxodromic_fixed_points(&self) -> Option<(ExtReal, ExtReal)> {
        let two = BigInt::from(2u32);
        let tr = self.trace();
        if tr.abs() <= two {
            return None;
        }
        // Determinant one and |trace| > 2 force c ≠ 0.
        debug_assert!(!self.c.is_zero());
        let disc = &tr * &tr - BigInt::from(4u32);
        let diff = &self.a - &self.d;
        let two_c = &two * &self.c;
        let root_plus = QuadSurd::new(diff.clone(), BigInt::one(), two_c.clone(), disc.clone());
        let root_minus = QuadSurd::new(diff, -BigInt::one(), two_c, disc);
        // The attracting fixed point is the root with |c z + d| > 1.
        if self.derivative_modulus_below_one(&root_plus) {
            Some((
                ExtReal::Finite(root_plus),
                ExtReal::Finite(root_minus),
            ))
        } else {
            Some((
                ExtReal::Finite(root_minus),
                ExtReal::Finite(root_plus),
            ))
        }
    }

    /// Exact test |(cz + d)| > 1 at a real fixed point z, i.e. |f'(z)| < 1.
    fn derivative_modulus_below_one(&self, z: &QuadSurd) -> bool {
        // w = cz + d = (c·p + d·r + c·q√D) / r, compare w² with 1 exactly.
        let wp = &self.c * &z.p + &self.d * &z.r;
        let wq = &self.c * &z.q;
        // w² = (wp² + wq²·D + 2·wp·wq·√D) / r²; w² - 1 has numerator:
        let np = &wp * &wp + &wq * &wq * &z.d - &z.r * &z.r;
        let nq = BigInt::from(2u32) * &wp * &wq;
        sign_gt_zero(&np, &nq, &z.d)
    }
}

/// Whether `np + nq√d > 0` exactly.
fn sign_gt_zero(np: &BigInt, nq: &BigInt, d: &BigInt) -> bool {
    QuadSurd::new(np.clone(), nq.clone(), BigInt::one(), d.clone()).sign() == Ordering::Greater
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat2{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_enforced() {
        assert!(Mat2::new(2, 0, 0, 2).is_err());
        assert!(Mat2::new(2, 1, 1, 1).is_ok());
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let g = Mat2::new(2, 1, 1, 1).unwrap();
        let mut acc = Mat2::identity();
        for n in 0..8 {
            assert_eq!(g.pow(n), acc);
            acc = acc.mul(&g);
        }
        assert_eq!(g.pow(-3), g.inverse().pow(3));
    }

    #[test]
    fn golden_ratio_fixed_points() {
        let g = Mat2::new(2, 1, 1, 1).unwrap();
        let (plus, minus) = g.loxodromic_fixed_points().unwrap();
        // Roots of z² - z - 1: (1 ± √5)/2.
        assert_eq!(plus, ExtReal::finite(1, 1, 2, 5));
        assert_eq!(minus, ExtReal::finite(1, -1, 2, 5));
    }

    #[test]
    fn moebius_fixed_point_is_fixed() {
        let g = Mat2::new(2, 1, 1, 1).unwrap();
        let (plus, minus) = g.loxodromic_fixed_points().unwrap();
        assert_eq!(g.moebius_boundary(&plus), plus);
        assert_eq!(g.moebius_boundary(&minus), minus);
    }

    #[test]
    fn moebius_special_values() {
        let s = Mat2::s();
        assert_eq!(s.moebius_boundary(&ExtReal::rational(0, 1)), ExtReal::Infinity);
        assert_eq!(s.moebius_boundary(&ExtReal::Infinity), ExtReal::rational(0, 1));
        let t = Mat2::t();
        assert_eq!(t.moebius_boundary(&ExtReal::rational(1, 2)), ExtReal::rational(3, 2));
        assert_eq!(t.moebius_boundary(&ExtReal::Infinity), ExtReal::Infinity);
    }

    #[test]
    fn parabolic_has_no_loxodromic_fixed_points() {
        assert!(Mat2::t().loxodromic_fixed_points().is_none());
        assert!(Mat2::identity().loxodromic_fixed_points().is_none());
    }
}
