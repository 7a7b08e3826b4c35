//! The upper half-plane acted on by integer Möbius transformations.
//!
//! Points carry exact rational coordinates and matrices exact integer
//! entries, so the argument of every arccosh is computed exactly; only the
//! final transcendental step is floating point, with tolerance 1e-9 on all
//! comparisons.

use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::isometry::{ClassifyError, IsometryClass};
use crate::lamp::LampElem;
use crate::mat2::Mat2;
use crate::model::{ModelDescriptor, ModelKind, ModelSpace};
use crate::surd::{ExtReal, QuadSurd};
use crate::word::Word;

pub const HALF_PLANE_TOLERANCE: f64 = 1e-9;

/// A point x + iy with exact rational coordinates, y > 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl HPoint {
    pub fn new(x: BigRational, y: BigRational) -> HPoint {
        assert!(y.is_positive(), "imaginary part must be positive");
        HPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> HPoint {
        HPoint::new(
            BigRational::from_integer(x.into()),
            BigRational::from_integer(y.into()),
        )
    }

    pub fn i() -> HPoint {
        HPoint::from_ints(0, 1)
    }
}

/// f64 value of a big rational, robust to huge numerators/denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let direct = r.to_f64();
    match direct {
        Some(v) if v.is_finite() => v,
        _ => {
            let n = r.numer();
            let d = r.denom();
            let shift = (n.bits().max(d.bits())).saturating_sub(512) as u64;
            let n2 = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let d2 = (d >> shift).to_f64().unwrap_or(f64::NAN);
            n2 / d2
        }
    }
}

fn ln_big(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * LN_2
}

/// arccosh of an exact rational argument >= 1.
fn acosh_ratio(arg: &BigRational) -> f64 {
    let v = ratio_to_f64(arg);
    if v.is_finite() {
        v.max(1.0).acosh()
    } else {
        // arccosh(x) = ln(2x) up to O(x⁻²) for huge x.
        LN_2 + ln_big(arg.numer()) - ln_big(arg.denom())
    }
}

/// High-precision rational approximation of a surd (error below 2⁻¹⁰⁰).
fn surd_to_rational(s: &QuadSurd) -> BigRational {
    const BITS: u64 = 128;
    let scaled = &s.d << (2 * BITS);
    let root = scaled.sqrt();
    let denom = BigInt::one() << BITS;
    let sqrt_d = BigRational::new(root, denom);
    (BigRational::from_integer(s.p.clone()) + BigRational::from_integer(s.q.clone()) * sqrt_d)
        / BigRational::from_integer(s.r.clone())
}


/// The hyperbolic plane in its upper half-plane incarnation; the group is
/// SL(2, Z) and the basepoint is i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfPlaneModel;

impl HalfPlaneModel {
    pub fn new() -> HalfPlaneModel {
        HalfPlaneModel
    }

    /// cosh d(z, w) = 1 + |z − w|² / (2 · Im z · Im w), exactly.
    pub fn cosh_distance(&self, z: &HPoint, w: &HPoint) -> BigRational {
        let dx = &z.x - &w.x;
        let dy = &z.y - &w.y;
        let num = &dx * &dx + &dy * &dy;
        let den = BigRational::from_integer(2.into()) * &z.y * &w.y;
        BigRational::one() + num / den
    }

    pub fn parse_elem(&self, s: &str) -> Result<Mat2, String> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = cleaned
            .strip_prefix("[[")
            .and_then(|t| t.strip_suffix("]]"))
            .ok_or_else(|| format!("matrix literal {s:?} must look like [[a,b],[c,d]]"))?;
        let parts: Vec<&str> = inner.split("],[").collect();
        if parts.len() != 2 {
            return Err(format!("matrix literal {s:?} must have two rows"));
        }
        let mut entries = Vec::new();
        for row in parts {
            for e in row.split(',') {
                entries.push(
                    e.parse::<i64>()
                        .map_err(|e| format!("bad matrix entry: {e}"))?,
                );
            }
        }
        if entries.len() != 4 {
            return Err("matrix needs four entries".into());
        }
        Mat2::new(entries[0], entries[1], entries[2], entries[3]).map_err(|e| e.to_string())
    }
}

impl Default for HalfPlaneModel {
    fn default() -> Self {
        HalfPlaneModel::new()
    }
}

fn entry_size(m: &Mat2) -> BigInt {
    m.a.abs() + m.b.abs() + m.c.abs() + m.d.abs()
}

impl ModelSpace for HalfPlaneModel {
    type Point = HPoint;
    type Elem = Mat2;
    type Boundary = ExtReal;
    type Scalar = f64;

    fn kind(&self) -> ModelKind {
        ModelKind::HalfPlane
    }

    fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            kind: ModelKind::HalfPlane,
            rank: 2,
            generators: vec![Mat2::t().to_string(), Mat2::s().to_string()],
            tolerance: HALF_PLANE_TOLERANCE,
        }
    }

    fn basepoint(&self) -> HPoint {
        HPoint::i()
    }

    fn distance(&self, z: &HPoint, w: &HPoint) -> f64 {
        acosh_ratio(&self.cosh_distance(z, w))
    }

    fn tolerance(&self) -> f64 {
        HALF_PLANE_TOLERANCE
    }

    fn identity(&self) -> Mat2 {
        Mat2::identity()
    }

    fn mul(&self, g: &Mat2, h: &Mat2) -> Mat2 {
        g.mul(h)
    }

    fn inv(&self, g: &Mat2) -> Mat2 {
        g.inverse()
    }

    fn pow(&self, g: &Mat2, n: i64) -> Mat2 {
        g.pow(n)
    }

    fn apply(&self, g: &Mat2, z: &HPoint) -> HPoint {
        let a = BigRational::from_integer(g.a.clone());
        let b = BigRational::from_integer(g.b.clone());
        let c = BigRational::from_integer(g.c.clone());
        let d = BigRational::from_integer(g.d.clone());
        let den_re = &c * &z.x + &d;
        let den_im = &c * &z.y;
        let den_norm = &den_re * &den_re + &den_im * &den_im;
        let num_re = &a * &z.x + &b;
        // Re = ((ax+b)(cx+d) + ac y²)/|cz+d|², Im = y/|cz+d|² (det = 1).
        let x = (&num_re * &den_re + &a * &c * &z.y * &z.y) / &den_norm;
        let y = &z.y / &den_norm;
        HPoint::new(x, y)
    }

    fn boundary_action(&self, g: &Mat2, b: &ExtReal) -> ExtReal {
        g.moebius_boundary(b)
    }

    fn classify(
        &self,
        g: &Mat2,
        _orbit_budget: usize,
    ) -> Result<IsometryClass<Self>, ClassifyError> {
        if g.is_projective_identity() {
            return Ok(IsometryClass::Elliptic { orbit_radius: 0.0 });
        }
        let tr = g.trace();
        let two = BigInt::from(2u32);
        if tr.abs() < two {
            // Finite order; the orbit of the basepoint is a finite set.
            let base = self.basepoint();
            let mut radius: f64 = 0.0;
            let mut p = g.clone();
            for _ in 0..12 {
                radius = radius.max(self.distance(&base, &self.apply(&p, &base)));
                if p.is_projective_identity() {
                    break;
                }
                p = p.mul(g);
            }
            Ok(IsometryClass::Elliptic {
                orbit_radius: radius,
            })
        } else if tr.abs() == two {
            Ok(IsometryClass::Parabolic {
                certificate: format!("trace {tr}"),
            })
        } else {
            let (attracting, repelling) = g
                .loxodromic_fixed_points()
                .expect("|trace| > 2 has boundary fixed points");
            let half_tr = ratio_to_f64(&BigRational::new(tr.abs(), 2.into()));
            Ok(IsometryClass::Loxodromic {
                translation_length: 2.0 * half_tr.acosh(),
                attracting,
                repelling,
            })
        }
    }

    fn standard_generators(&self) -> Vec<Mat2> {
        vec![Mat2::t(), Mat2::s()]
    }

    fn boundary_sentinels(&self) -> Vec<ExtReal> {
        vec![ExtReal::Infinity]
    }

    fn boundary_gromov(&self, a: &ExtReal, b: &ExtReal) -> Option<f64> {
        if a == b {
            return None;
        }
        let value = |s: &QuadSurd| s.to_f64();
        Some(match (a, b) {
            (ExtReal::Infinity, ExtReal::Finite(p)) | (ExtReal::Finite(p), ExtReal::Infinity) => {
                // Distance from i to the vertical geodesic at p.
                value(p).abs().asinh()
            }
            (ExtReal::Finite(p), ExtReal::Finite(q)) => {
                let (p, q) = (value(p), value(q));
                // cosh d(i, geodesic(p,q)) = √((1+p²)(1+q²)) / |p−q|.
                let arg = ((1.0 + p * p) * (1.0 + q * q)).sqrt() / (p - q).abs();
                arg.max(1.0).acosh()
            }
            (ExtReal::Infinity, ExtReal::Infinity) => unreachable!(),
        })
    }

    fn boundary_approach(&self, b: &ExtReal, len: usize) -> Vec<HPoint> {
        assert!(len <= 90, "approach sequences cap at 90 steps");
        match b {
            ExtReal::Infinity => (0..len)
                .map(|j| {
                    HPoint::new(
                        BigRational::zero(),
                        BigRational::from_integer(BigInt::one() << j),
                    )
                })
                .collect(),
            ExtReal::Finite(s) => {
                let x = if s.is_rational() {
                    BigRational::new(s.p.clone(), s.r.clone())
                } else {
                    surd_to_rational(s)
                };
                (0..len)
                    .map(|j| {
                        HPoint::new(x.clone(), BigRational::new(BigInt::one(), BigInt::one() << j))
                    })
                    .collect()
            }
        }
    }

    fn elem_string(&self, g: &Mat2) -> String {
        g.to_string()
    }

    fn point_string(&self, z: &HPoint) -> String {
        format!("{}+{}i", z.x, z.y)
    }

    fn boundary_string(&self, b: &ExtReal) -> String {
        b.tuple_string()
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, size: u32) -> HPoint {
        let span = (size.max(1) as i64) * 16;
        let xn = rng.random_range(-span..=span);
        let yn = rng.random_range(1..=span);
        let den = rng.random_range(1..=16i64);
        HPoint::new(
            BigRational::new(xn.into(), den.into()),
            BigRational::new(yn.into(), (den * 4).into()),
        )
    }

    fn sample_elem(&self, rng: &mut ChaCha8Rng, size: u32) -> Mat2 {
        let gens = [Mat2::t(), Mat2::t().inverse(), Mat2::s(), Mat2::s().inverse()];
        let len = rng.random_range(0..=size as usize);
        let mut out = Mat2::identity();
        for _ in 0..len {
            out = out.mul(&gens[rng.random_range(0..4)]);
        }
        out
    }

    fn word_repr(&self, _g: &Mat2) -> Option<Word> {
        None
    }

    fn lamp_repr(&self, _g: &Mat2) -> Option<LampElem> {
        None
    }

    fn power_of(&self, gen: &Mat2, g: &Mat2) -> Option<i64> {
        // Powers are taken projectively: ±h act identically on the plane.
        if g.is_projective_identity() {
            return Some(0);
        }
        if gen.is_projective_identity() {
            return None;
        }
        let target = entry_size(g);
        for dir in [1i64, -1] {
            let step = if dir == 1 { gen.clone() } else { gen.inverse() };
            let mut p = step.clone();
            let mut n = 1i64;
            loop {
                if p == *g || p.neg() == *g {
                    return Some(dir * n);
                }
                if p.is_projective_identity() {
                    break; // finite order, cycle exhausted
                }
                if n > 16 && entry_size(&p) > &target + BigInt::from(4u32) {
                    break; // monotone growth has passed the target
                }
                if n > 10_000 {
                    break;
                }
                p = p.mul(&step);
                n += 1;
            }
        }
        None
    }

    fn geodesic_prefix(&self, _x: &HPoint, _depth: usize) -> Option<HPoint> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> HalfPlaneModel {
        HalfPlaneModel::new()
    }

    #[test]
    fn distance_examples() {
        let m = m();
        // d(i, 4i) = ln 4.
        let d = m.distance(&HPoint::from_ints(0, 1), &HPoint::from_ints(0, 4));
        assert!((d - 4.0f64.ln()).abs() < 1e-12);
        // Symmetry and identity.
        let z = HPoint::from_ints(2, 1);
        assert_eq!(m.distance(&z, &z), 0.0);
        let w = HPoint::from_ints(-1, 3);
        assert!((m.distance(&z, &w) - m.distance(&w, &z)).abs() < 1e-12);
    }

    #[test]
    fn apply_examples() {
        let m = m();
        // Parabolic translation z ↦ z + 1.
        assert_eq!(
            m.apply(&Mat2::t(), &HPoint::i()),
            HPoint::new(BigRational::one(), BigRational::one())
        );
        // S fixes i.
        assert_eq!(m.apply(&Mat2::s(), &HPoint::i()), HPoint::i());
    }

    #[test]
    fn isometry_property_sampled() {
        let m = m();
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = m.sample_elem(&mut rng, 6);
            let z = m.sample_point(&mut rng, 4);
            let w = m.sample_point(&mut rng, 4);
            // The cosh argument is exact, so isometry holds exactly.
            assert_eq!(
                m.cosh_distance(&m.apply(&g, &z), &m.apply(&g, &w)),
                m.cosh_distance(&z, &w)
            );
        }
    }

    #[test]
    fn classify_by_trace() {
        let m = m();
        assert!(matches!(
            m.classify(&Mat2::t(), 8).unwrap(),
            IsometryClass::Parabolic { .. }
        ));
        assert!(matches!(
            m.classify(&Mat2::s(), 8).unwrap(),
            IsometryClass::Elliptic { .. }
        ));
        let neg_i = Mat2::identity().neg();
        assert!(matches!(
            m.classify(&neg_i, 8).unwrap(),
            IsometryClass::Elliptic { orbit_radius } if orbit_radius == 0.0
        ));
        match m.classify(&Mat2::new(2, 1, 1, 1).unwrap(), 8).unwrap() {
            IsometryClass::Loxodromic {
                translation_length,
                attracting,
                repelling,
            } => {
                assert!((translation_length - 2.0 * 1.5f64.acosh()).abs() < 1e-12);
                assert_eq!(attracting, ExtReal::finite(1, 1, 2, 5));
                assert_eq!(repelling, ExtReal::finite(1, -1, 2, 5));
            }
            other => panic!("expected loxodromic, got {other:?}"),
        }
    }

    #[test]
    fn power_detection() {
        let m = m();
        let g = Mat2::new(2, 1, 1, 1).unwrap();
        assert_eq!(m.power_of(&g, &g.pow(5)), Some(5));
        assert_eq!(m.power_of(&g, &g.pow(-3)), Some(-3));
        assert_eq!(m.power_of(&g, &g.pow(4).neg()), Some(4));
        assert_eq!(m.power_of(&g, &Mat2::t()), None);
        // S³ = −S acts like S itself; powers are projective.
        assert_eq!(m.power_of(&Mat2::s(), &Mat2::s().pow(3)), Some(1));
        assert_eq!(m.power_of(&Mat2::t(), &Mat2::t().pow(40)), Some(40));
    }

    #[test]
    fn boundary_gromov_formulas() {
        let m = m();
        // Geodesic (−1, 1) passes through i.
        let d = m
            .boundary_gromov(&ExtReal::rational(-1, 1), &ExtReal::rational(1, 1))
            .unwrap();
        assert!(d.abs() < 1e-12);
        // Vertical line at 0 passes through i.
        let d = m
            .boundary_gromov(&ExtReal::Infinity, &ExtReal::rational(0, 1))
            .unwrap();
        assert!(d.abs() < 1e-12);
        assert_eq!(m.boundary_gromov(&ExtReal::Infinity, &ExtReal::Infinity), None);
    }

    #[test]
    fn approach_sequences_converge() {
        let m = m();
        use crate::hyp::{converges_at_infinity, ConvergenceParams};
        let params = ConvergenceParams::default();
        for b in [
            ExtReal::Infinity,
            ExtReal::rational(2, 3),
            ExtReal::finite(1, 1, 2, 5),
        ] {
            let seq = m.boundary_approach(&b, 40);
            let v = converges_at_infinity(&m, &seq, &m.basepoint(), 5.0, &params);
            assert!(v.converges, "approach to {b} fails to converge");
        }
    }
}
