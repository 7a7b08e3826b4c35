//! The free group of rank k acting on its Cayley tree. Everything is exact:
//! points are freely reduced words, distances are word lengths, boundary
//! points are eventually periodic rays.

use std::fmt;

use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::isometry::{ClassifyError, IsometryClass};
use crate::lamp::LampElem;
use crate::model::{ModelDescriptor, ModelKind, ModelSpace};
use crate::scalar::Scalar;
use crate::word::{alphabet, inv_letter, Word, MAX_RANK};

/// An eventually periodic ray `pre · rep^∞`, canonicalized: the infinite
/// word is freely reduced, `rep` is primitive and cyclically reduced, and
/// the preperiod is minimal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ray {
    pre: Word,
    rep: Word,
}

impl Ray {
    pub fn new(pre: Word, rep: Word) -> Ray {
        assert!(!rep.is_empty(), "periodic part must be nonempty");
        assert!(rep.is_cyclically_reduced());
        let mut pre_letters: Vec<i8> = pre.letters().to_vec();
        let mut rep_letters: Vec<i8> = rep.letters().to_vec();
        // Cancel the junction: pre may end with the inverse of rep's head;
        // consuming one letter of the periodic word rotates it.
        loop {
            match pre_letters.last() {
                Some(&l) if l == inv_letter(rep_letters[0]) => {
                    pre_letters.pop();
                    rep_letters.rotate_left(1);
                }
                _ => break,
            }
        }
        let (rep_word, _) = Word::from_letters(rep_letters).primitive_root();
        let mut rep_letters: Vec<i8> = rep_word.letters().to_vec();
        // Minimal preperiod: absorb trailing letters that match the period.
        loop {
            match pre_letters.last() {
                Some(&l) if l == *rep_letters.last().unwrap() => {
                    pre_letters.pop();
                    rep_letters.rotate_right(1);
                }
                _ => break,
            }
        }
        let ray = Ray {
            pre: Word::from_letters(pre_letters),
            rep: Word::from_letters(rep_letters),
        };
        debug_assert!(ray.is_reduced_ray());
        ray
    }

    fn is_reduced_ray(&self) -> bool {
        let ok_junction = match (self.pre.last(), self.rep.first()) {
            (Some(l), Some(f)) => f != inv_letter(l),
            _ => true,
        };
        ok_junction && self.rep.is_cyclically_reduced() && !self.rep.is_empty()
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.rep
    }

    /// First n letters of the infinite word.
    pub fn word_prefix(&self, n: usize) -> Word {
        let mut letters = Vec::with_capacity(n);
        letters.extend_from_slice(self.pre.letters());
        while letters.len() < n {
            letters.extend_from_slice(self.rep.letters());
        }
        letters.truncate(n);
        // The infinite word is reduced, so no cancellation happens here.
        Word::from_letters(letters)
    }

    /// Length of the common prefix with another ray; None if the rays are
    /// equal (infinite common prefix).
    pub fn common_prefix_len(&self, other: &Ray) -> Option<usize> {
        if self == other {
            return None;
        }
        let n = self.pre.len()
            + other.pre.len()
            + 2 * self.rep.len() * other.rep.len()
            + 4;
        let a = self.word_prefix(n);
        let b = other.word_prefix(n);
        let cp = a.common_prefix_len(&b);
        debug_assert!(cp < n, "distinct canonical rays must diverge");
        Some(cp)
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pre.is_empty() {
            write!(f, "({})^inf", self.rep)
        } else {
            write!(f, "{}({})^inf", self.pre, self.rep)
        }
    }
}

impl fmt::Debug for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ray({self})")
    }
}

/// The rank-k free group model; the basepoint is the empty word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGroupModel {
    rank: usize,
}

impl FreeGroupModel {
    pub fn new(rank: usize) -> FreeGroupModel {
        assert!((2..=MAX_RANK).contains(&rank), "rank must be in 2..=26");
        FreeGroupModel { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn parse(&self, s: &str) -> Result<Word, crate::word::WordError> {
        Word::parse(s, self.rank)
    }

    /// Uniform reduced word of the exact length.
    pub fn random_word(&self, rng: &mut ChaCha8Rng, len: usize) -> Word {
        let letters = alphabet(self.rank);
        let mut out: Vec<i8> = Vec::with_capacity(len);
        for _ in 0..len {
            loop {
                let l = letters[rng.random_range(0..letters.len())];
                if out.last() != Some(&inv_letter(l)) {
                    out.push(l);
                    break;
                }
            }
        }
        Word::from_letters(out)
    }
}

impl ModelSpace for FreeGroupModel {
    type Point = Word;
    type Elem = Word;
    type Boundary = Ray;
    type Scalar = Rational64;

    fn kind(&self) -> ModelKind {
        ModelKind::Free
    }

    fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            kind: ModelKind::Free,
            rank: self.rank,
            generators: (1..=self.rank).map(|i| Word::gen(i).to_string()).collect(),
            tolerance: 0.0,
        }
    }

    fn basepoint(&self) -> Word {
        Word::identity()
    }

    fn distance(&self, x: &Word, y: &Word) -> Rational64 {
        let cp = x.common_prefix_len(y);
        Rational64::from_int((x.len() + y.len() - 2 * cp) as i64)
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn identity(&self) -> Word {
        Word::identity()
    }

    fn mul(&self, g: &Word, h: &Word) -> Word {
        g.mul(h)
    }

    fn inv(&self, g: &Word) -> Word {
        g.inverse()
    }

    fn pow(&self, g: &Word, n: i64) -> Word {
        g.pow(n)
    }

    fn apply(&self, g: &Word, x: &Word) -> Word {
        g.mul(x)
    }

    fn boundary_action(&self, g: &Word, b: &Ray) -> Ray {
        // Unroll enough of the ray that cancellation with g cannot reach the
        // periodic tail's phase boundary.
        let periods = (g.len() + 2) / b.rep.len() + 2;
        let mut head = g.mul(&b.pre);
        for _ in 0..periods {
            head = head.mul(&b.rep);
        }
        Ray::new(head, b.rep.clone())
    }

    fn classify(
        &self,
        g: &Word,
        _orbit_budget: usize,
    ) -> Result<IsometryClass<Self>, ClassifyError> {
        if g.is_identity() {
            return Ok(IsometryClass::Elliptic {
                orbit_radius: Rational64::zero(),
            });
        }
        let (s, core) = g.cyclic_reduce();
        Ok(IsometryClass::Loxodromic {
            translation_length: Rational64::from_int(core.len() as i64),
            attracting: Ray::new(s.clone(), core.clone()),
            repelling: Ray::new(s, core.inverse()),
        })
    }

    fn standard_generators(&self) -> Vec<Word> {
        (1..=self.rank).map(Word::gen).collect()
    }

    fn boundary_sentinels(&self) -> Vec<Ray> {
        Vec::new()
    }

    fn boundary_gromov(&self, a: &Ray, b: &Ray) -> Option<Rational64> {
        a.common_prefix_len(b)
            .map(|n| Rational64::from_int(n as i64))
    }

    fn boundary_approach(&self, b: &Ray, len: usize) -> Vec<Word> {
        (0..len).map(|i| b.word_prefix(i)).collect()
    }

    fn elem_string(&self, g: &Word) -> String {
        g.to_string()
    }

    fn point_string(&self, x: &Word) -> String {
        x.to_string()
    }

    fn boundary_string(&self, b: &Ray) -> String {
        b.to_string()
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, size: u32) -> Word {
        let len = rng.random_range(0..=size as usize);
        self.random_word(rng, len)
    }

    fn sample_elem(&self, rng: &mut ChaCha8Rng, size: u32) -> Word {
        self.sample_point(rng, size)
    }

    fn word_repr(&self, g: &Word) -> Option<Word> {
        Some(g.clone())
    }

    fn lamp_repr(&self, _g: &Word) -> Option<LampElem> {
        None
    }

    fn power_of(&self, gen: &Word, g: &Word) -> Option<i64> {
        if g.is_identity() {
            return Some(0);
        }
        if gen.is_identity() {
            return None;
        }
        // gen = s·e^mult·s⁻¹ with e primitive, so genⁿ = s·e^(mult·n)·s⁻¹ and
        // the cyclic decomposition of g must match exactly.
        let (s, core_full) = gen.cyclic_reduce();
        let (e, mult) = core_full.primitive_root();
        let (sg, cg) = g.cyclic_reduce();
        if sg != s || cg.is_empty() || cg.len() % e.len() != 0 {
            return None;
        }
        let k = (cg.len() / e.len()) as i64;
        let k_signed = if cg == e.pow(k) {
            k
        } else if cg == e.pow(-k) {
            -k
        } else {
            return None;
        };
        let mult = mult as i64;
        if k_signed % mult != 0 {
            return None;
        }
        Some(k_signed / mult)
    }

    fn geodesic_prefix(&self, x: &Word, depth: usize) -> Option<Word> {
        if x.len() >= depth {
            Some(x.prefix(depth))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::ball;

    fn m() -> FreeGroupModel {
        FreeGroupModel::new(2)
    }

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn distance_is_reduced_quotient_length() {
        let m = m();
        assert_eq!(m.distance(&w("aba"), &w("ab")), Rational64::from_int(1));
        assert_eq!(m.distance(&w("a"), &w("b")), Rational64::from_int(2));
        for u in ball(2, 4) {
            for v in [w("ab"), w("BBa"), Word::identity()] {
                let direct = u.inverse().mul(&v).len() as i64;
                assert_eq!(m.distance(&u, &v), Rational64::from_int(direct));
            }
        }
    }

    #[test]
    fn apply_reduces_freely() {
        let m = m();
        assert_eq!(m.apply(&w("ab"), &w("B")), w("a"));
    }

    #[test]
    fn ray_canonicalization() {
        // b·(ab)^∞ has minimal preperiod: b a b a b ... = (ba)^∞.
        let r = Ray::new(w("b"), w("ab"));
        assert_eq!(r, Ray::new(Word::identity(), w("ba")));
        // Junction cancellation: aB · (ba)^∞ = a·(ab)^∞... check reducedness.
        let r = Ray::new(w("aB"), w("ba"));
        assert_eq!(r.word_prefix(5), w("aabab").prefix(5));
        // Power periods collapse to the primitive root.
        assert_eq!(Ray::new(w(""), w("abab")), Ray::new(w(""), w("ab")));
    }

    #[test]
    fn boundary_action_on_rays() {
        let m = m();
        let b_inf = Ray::new(Word::identity(), w("b"));
        assert_eq!(m.boundary_action(&w("a"), &b_inf), Ray::new(w("a"), w("b")));
        // a⁻¹ · a·b^∞ = b^∞.
        assert_eq!(m.boundary_action(&w("A"), &Ray::new(w("a"), w("b"))), b_inf);
        // Deep cancellation into the periodic part.
        let a_inf = Ray::new(Word::identity(), w("a"));
        assert_eq!(m.boundary_action(&w("AAA"), &a_inf), a_inf);
    }

    #[test]
    fn classification_and_fixed_points() {
        let m = m();
        match m.classify(&w("baB"), 8).unwrap() {
            IsometryClass::Loxodromic {
                translation_length,
                attracting,
                repelling,
            } => {
                assert_eq!(translation_length, Rational64::from_int(1));
                assert_eq!(attracting, Ray::new(w("b"), w("a")));
                assert_eq!(repelling, Ray::new(w("b"), w("A")));
            }
            other => panic!("expected loxodromic, got {other:?}"),
        }
        assert!(matches!(
            m.classify(&Word::identity(), 8).unwrap(),
            IsometryClass::Elliptic { .. }
        ));
    }

    #[test]
    fn power_detection() {
        let m = m();
        assert_eq!(m.power_of(&w("ab"), &w("ababab")), Some(3));
        assert_eq!(m.power_of(&w("ab"), &w("BABA")), Some(-2));
        assert_eq!(m.power_of(&w("ab"), &w("abA")), None);
        assert_eq!(m.power_of(&w("aa"), &w("aaa")), None);
        assert_eq!(m.power_of(&w("aa"), &w("aaaa")), Some(2));
        assert_eq!(m.power_of(&w("baB"), &w("baaB")), Some(2));
        assert_eq!(m.power_of(&w("a"), &Word::identity()), Some(0));
    }

    #[test]
    fn ray_common_prefixes() {
        let a_inf = Ray::new(Word::identity(), w("a"));
        let ab_inf = Ray::new(Word::identity(), w("ab"));
        assert_eq!(a_inf.common_prefix_len(&ab_inf), Some(1));
        assert_eq!(a_inf.common_prefix_len(&a_inf), None);
        let conj = Ray::new(w("aa"), w("b"));
        assert_eq!(a_inf.common_prefix_len(&conj), Some(2));
    }
}
