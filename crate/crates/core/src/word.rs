//! Freely reduced words over a rank-k alphabet.
//!
//! Letters are nonzero `i8` values: `+i` is the i-th generator, `-i` its
//! inverse (1-indexed). Generators display as `a, b, c, ...` and inverses as
//! `A, B, C, ...`, so rank is capped at 26.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub const MAX_RANK: usize = 26;

pub type Letter = i8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("rank {0} out of range (2..={MAX_RANK})")]
    BadRank(usize),
    #[error("letter {0} out of range for rank {1}")]
    BadLetter(Letter, usize),
    #[error("unrecognized character {0:?} in word literal")]
    BadChar(char),
}

#[inline]
pub fn inv_letter(l: Letter) -> Letter {
    -l
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Reduce an arbitrary letter sequence by cancelling adjacent inverse pairs.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            debug_assert!(l != 0);
            if stack.last() == Some(&inv_letter(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Single-generator word.
    pub fn gen(i: usize) -> Self {
        Word(vec![i as Letter])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| inv_letter(l)).collect())
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(rhs.0.iter()).copied())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n >= 0 { self.clone() } else { self.inverse() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    /// Longest common prefix length with another word.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn starts_with(&self, p: &Word) -> bool {
        self.0.len() >= p.0.len() && self.0[..p.0.len()] == p.0[..]
    }

    /// Decompose as `s · core · s⁻¹` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut lo = 0usize;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo] == inv_letter(self.0[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        (Word(self.0[..lo].to_vec()), Word(self.0[lo..hi].to_vec()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => f != inv_letter(l),
            _ => true,
        }
    }

    /// Smallest word `e` with `self = e^j` for some `j >= 1`.
    pub fn primitive_root(&self) -> (Word, usize) {
        let n = self.0.len();
        if n == 0 {
            return (Word::identity(), 1);
        }
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return (Word(self.0[..p].to_vec()), n / p);
            }
        }
        (self.clone(), 1)
    }

    /// Shortlex order with the letter order a < A < b < B < ...
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.letter_keys().cmp(&other.letter_keys()))
    }

    fn letter_keys(&self) -> Vec<u8> {
        self.0.iter().map(|&l| letter_key(l)).collect()
    }

    pub fn parse(s: &str, rank: usize) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for c in s.chars() {
            if c.is_whitespace() {
                continue;
            }
            let l = match c {
                'a'..='z' => (c as u8 - b'a' + 1) as Letter,
                'A'..='Z' => -((c as u8 - b'A' + 1) as Letter),
                '1' if s.trim() == "1" => continue,
                _ => return Err(WordError::BadChar(c)),
            };
            if l.unsigned_abs() as usize > rank {
                return Err(WordError::BadLetter(l, rank));
            }
            letters.push(l);
        }
        Ok(Word::from_letters(letters))
    }
}

/// Position of a letter in the shortlex letter order a < A < b < B < ...
#[inline]
pub fn letter_key(l: Letter) -> u8 {
    let idx = (l.unsigned_abs() - 1) * 2;
    if l > 0 {
        idx
    } else {
        idx + 1
    }
}

/// All 2k letters in shortlex order.
pub fn alphabet(rank: usize) -> Vec<Letter> {
    let mut out = Vec::with_capacity(2 * rank);
    for i in 1..=rank as Letter {
        out.push(i);
        out.push(-i);
    }
    out
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            let c = if l > 0 {
                (b'a' + (l as u8) - 1) as char
            } else {
                (b'A' + ((-l) as u8) - 1) as char
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Reduced words of length exactly `n`, in shortlex order.
pub fn sphere(rank: usize, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut cur: Vec<Letter> = Vec::new();
    fn rec(rank: usize, n: usize, cur: &mut Vec<Letter>, out: &mut Vec<Word>) {
        if cur.len() == n {
            out.push(Word(cur.clone()));
            return;
        }
        for &l in alphabet(rank).iter() {
            if cur.last() == Some(&inv_letter(l)) {
                continue;
            }
            cur.push(l);
            rec(rank, n, cur, out);
            cur.pop();
        }
    }
    rec(rank, n, &mut cur, &mut out);
    out
}

/// Reduced words of length at most `radius`, in shortlex order.
pub fn ball(rank: usize, radius: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for n in 0..=radius {
        out.extend(sphere(rank, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn reduction_cancels_pairs() {
        assert_eq!(w("ab").mul(&w("Ba")), w("aa"));
        assert_eq!(w("ab").mul(&w("BA")), Word::identity());
        assert_eq!(w("aBb"), w("a"));
    }

    #[test]
    fn cyclic_reduction() {
        let (s, c) = w("bab").cyclic_reduce();
        assert_eq!((s, c), (Word::identity(), w("bab")));
        let (s, c) = w("baB").cyclic_reduce();
        assert_eq!(s, w("b"));
        assert_eq!(c, w("a"));
        let (s, c) = w("abaBA").cyclic_reduce();
        assert_eq!(s, w("ab"));
        assert_eq!(c, w("a"));
    }

    #[test]
    fn primitive_root_detects_powers() {
        assert_eq!(w("abab").primitive_root(), (w("ab"), 2));
        assert_eq!(w("aba").primitive_root(), (w("aba"), 1));
    }

    #[test]
    fn sphere_counts() {
        assert_eq!(sphere(2, 1).len(), 4);
        assert_eq!(sphere(2, 2).len(), 12);
        assert_eq!(sphere(2, 3).len(), 36);
        assert_eq!(ball(2, 3).len(), 1 + 4 + 12 + 36);
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["1", "a", "abAB", "bbA"] {
            assert_eq!(Word::parse(s, 2).unwrap().to_string(), s);
        }
    }

    proptest! {
        #[test]
        fn mul_associative(x in arb_word(), y in arb_word(), z in arb_word()) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }

        #[test]
        fn inverse_cancels(x in arb_word()) {
            prop_assert!(x.mul(&x.inverse()).is_identity());
        }

        #[test]
        fn result_is_reduced(x in arb_word(), y in arb_word()) {
            let p = x.mul(&y);
            for i in 1..p.letters().len() {
                prop_assert_ne!(p.letters()[i], inv_letter(p.letters()[i-1]));
            }
        }
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((1i8..=2, prop::bool::ANY), 0..12).prop_map(|ls| {
            Word::from_letters(ls.into_iter().map(|(i, neg)| if neg { -i } else { i }))
        })
    }
}
