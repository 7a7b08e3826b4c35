//! Exact real quadratic surds `(p + q√d)/r` and the extended real line.
//!
//! Fixed points of integer Möbius transformations on the boundary of the
//! half-plane are always of this shape, so keeping them exact makes boundary
//! equality decidable.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::gcd;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Primes up to this bound are pulled out of the radicand; combined with the
/// perfect-square fallback this yields a true square-free radicand for any
/// value below 10^8, which covers every trace arising at desk scale.
const TRIAL_BOUND: u64 = 10_000;

/// Radicands beyond this size (giant commutator discriminants) only get the
/// cheap bound: their surds serve as self-consistent certificates and are
/// never compared against small-element fixed points.
const BIG_TRIAL_BOUND: u64 = 128;

/// Normalized quadratic surd `(p + q√d)/r` with `r > 0`, `gcd(p, q, r) = 1`,
/// `d` square-free, and `q = 0 ⇔ d = 1` for rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    pub p: BigInt,
    pub q: BigInt,
    pub r: BigInt,
    pub d: BigInt,
}

impl QuadSurd {
    /// Build and normalize from raw data; `d_raw` need not be square-free.
    pub fn new(p: BigInt, q: BigInt, r: BigInt, d_raw: BigInt) -> QuadSurd {
        assert!(!r.is_zero(), "surd denominator must be nonzero");
        assert!(!d_raw.is_negative(), "radicand must be nonnegative");
        let (mut p, mut q, mut r) = (p, q, r);
        let (sq, mut d) = extract_square_part(&d_raw);
        q *= sq;
        if d.is_zero() {
            q = BigInt::zero();
            d = BigInt::one();
        }
        if d.is_one() {
            p += &q;
            q = BigInt::zero();
            d = BigInt::one();
        }
        if q.is_zero() {
            d = BigInt::one();
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = gcd(gcd(p.clone(), q.clone()), r.clone());
        if !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        QuadSurd { p, q, r, d }
    }

    pub fn from_rational(p: i64, r: i64) -> QuadSurd {
        QuadSurd::new(p.into(), BigInt::zero(), r.into(), BigInt::one())
    }

    pub fn from_int(p: i64) -> QuadSurd {
        QuadSurd::from_rational(p, 1)
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Exact sign of the value.
    pub fn sign(&self) -> Ordering {
        // r > 0, so only the numerator p + q√d matters.
        sign_of_radical_sum(&self.p, &self.q, &self.d)
    }

    /// Exact comparison with another surd over the same radicand (or with a
    /// rational). Panics if the radicands are distinct and both irrational:
    /// such values are never equal and callers compare canonically instead.
    pub fn cmp_same_field(&self, other: &QuadSurd) -> Ordering {
        assert!(
            self.d == other.d || self.is_rational() || other.is_rational(),
            "cmp_same_field needs a common radicand"
        );
        let d = if self.is_rational() { &other.d } else { &self.d };
        // self - other = ((p1 r2 - p2 r1) + (q1 r2 - q2 r1)√d) / (r1 r2), r_i > 0.
        let p = &self.p * &other.r - &other.p * &self.r;
        let q = &self.q * &other.r - &other.q * &self.r;
        sign_of_radical_sum(&p, &q, d)
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        let r = self.r.to_f64().unwrap_or(f64::NAN);
        (p + q * d.sqrt()) / r
    }

    /// Canonical tuple form `(p,q,r,d)`.
    pub fn tuple_string(&self) -> String {
        format!("({},{},{},{})", self.p, self.q, self.r, self.d)
    }
}

/// Exact sign of `p + q√d` for square-free `d >= 1`.
fn sign_of_radical_sum(p: &BigInt, q: &BigInt, d: &BigInt) -> Ordering {
    let zero = BigInt::zero();
    if q.is_zero() {
        return p.cmp(&zero);
    }
    if p.is_zero() {
        return q.cmp(&zero);
    }
    match (p.is_positive(), q.is_positive()) {
        (true, true) => Ordering::Greater,
        (false, false) => Ordering::Less,
        (true, false) => (p * p).cmp(&(q * q * d)),
        (false, true) => (q * q * d).cmp(&(p * p)),
    }
}

/// Write `n = s² · d` with `d` square-free (subject to the trial bound).
fn extract_square_part(n: &BigInt) -> (BigInt, BigInt) {
    if n.is_zero() {
        return (BigInt::one(), BigInt::zero());
    }
    let mut rem = n.clone();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut f = BigInt::from(2u32);
    let bound = if n.bits() > 64 {
        BigInt::from(BIG_TRIAL_BOUND)
    } else {
        BigInt::from(TRIAL_BOUND)
    };
    while &f * &f <= rem && f <= bound {
        if (&rem % &f).is_zero() {
            let mut mult = 0u32;
            while (&rem % &f).is_zero() {
                rem /= &f;
                mult += 1;
            }
            for _ in 0..mult / 2 {
                square *= &f;
            }
            if mult % 2 == 1 {
                free *= &f;
            }
        }
        f += 1u32;
    }
    // Remainder has no prime factor below the bound; split off a perfect square
    // if it is one, otherwise treat it as square-free.
    let root = rem.sqrt();
    if &root * &root == rem {
        (square * root, free)
    } else {
        (square, free * rem)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            if self.r.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.r)
            }
        } else if self.r.is_one() {
            write!(f, "{}+{}√{}", self.p, self.q, self.d)
        } else {
            write!(f, "({}+{}√{})/{}", self.p, self.q, self.d, self.r)
        }
    }
}

impl fmt::Debug for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadSurd({self})")
    }
}

/// A point of the extended real line, the boundary of the half-plane.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExtReal {
    Infinity,
    Finite(QuadSurd),
}

impl ExtReal {
    pub fn finite(p: i64, q: i64, r: i64, d: i64) -> ExtReal {
        ExtReal::Finite(QuadSurd::new(p.into(), q.into(), r.into(), d.into()))
    }

    pub fn rational(p: i64, r: i64) -> ExtReal {
        ExtReal::Finite(QuadSurd::from_rational(p, r))
    }

    pub fn tuple_string(&self) -> String {
        match self {
            ExtReal::Infinity => "inf".to_string(),
            ExtReal::Finite(s) => s.tuple_string(),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Infinity => write!(f, "∞"),
            ExtReal::Finite(s) => write!(f, "{s}"),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deterministic total order (Infinity first, then structural); used only to
/// canonically sort output lists, not as a numeric order.
impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Infinity, ExtReal::Infinity) => Ordering::Equal,
            (ExtReal::Infinity, _) => Ordering::Less,
            (_, ExtReal::Infinity) => Ordering::Greater,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (&a.d, &a.p, &a.q, &a.r)
                .cmp(&(&b.d, &b.p, &b.q, &b.r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_reduces_gcd_and_sign() {
        let s = QuadSurd::new(2.into(), 4.into(), (-6).into(), 5.into());
        assert_eq!(s.tuple_string(), "(-1,-2,3,5)");
    }

    #[test]
    fn square_part_extraction() {
        // 12 = 2²·3
        let s = QuadSurd::new(0.into(), 1.into(), 1.into(), 12.into());
        assert_eq!(s.tuple_string(), "(0,2,1,3)");
        // 49 = 7²
        let s = QuadSurd::new(0.into(), 1.into(), 1.into(), 49.into());
        assert_eq!(s.tuple_string(), "(7,0,1,1)");
        // 360 = 36·10
        let s = QuadSurd::new(0.into(), 1.into(), 1.into(), 360.into());
        assert_eq!(s.tuple_string(), "(0,6,1,10)");
    }

    #[test]
    fn rational_collapse() {
        let s = QuadSurd::new(3.into(), 5.into(), 2.into(), 1.into());
        assert_eq!(s.tuple_string(), "(4,0,1,1)");
        let s = QuadSurd::new(1.into(), 0.into(), 2.into(), 7.into());
        assert_eq!(s.tuple_string(), "(1,0,2,1)");
    }

    #[test]
    fn exact_signs() {
        // 3 - 2√2 > 0 since 9 > 8
        let s = QuadSurd::new(3.into(), (-2).into(), 1.into(), 2.into());
        assert_eq!(s.sign(), Ordering::Greater);
        // 2 - 2√2 < 0
        let s = QuadSurd::new(2.into(), (-2).into(), 1.into(), 2.into());
        assert_eq!(s.sign(), Ordering::Less);
    }

    #[test]
    fn golden_ratio_value() {
        let phi = QuadSurd::new(1.into(), 1.into(), 2.into(), 5.into());
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-12);
    }
}
