//! Finite-index subgroups as stabilizers in a permutation action on cosets.

use serde::Serialize;

use crate::word::{letter_key, Letter, Word};

use super::stallings::StallingsGraph;

/// Generator-indexed permutations of a finite coset set; the handle is the
/// stabilizer of the distinguished base coset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CosetTable {
    perms: Vec<Vec<usize>>,
    inv_perms: Vec<Vec<usize>>,
    base: usize,
}

impl CosetTable {
    pub fn new(perms: Vec<Vec<usize>>, base: usize) -> CosetTable {
        assert!(!perms.is_empty(), "need at least one generator");
        let n = perms[0].len();
        assert!(base < n);
        let mut inv_perms = Vec::with_capacity(perms.len());
        for p in &perms {
            assert_eq!(p.len(), n, "permutation degrees must agree");
            let mut inv = vec![usize::MAX; n];
            for (i, &img) in p.iter().enumerate() {
                assert!(img < n && inv[img] == usize::MAX, "generator image must be a bijection");
                inv[img] = i;
            }
            inv_perms.push(inv);
        }
        CosetTable {
            perms,
            inv_perms,
            base,
        }
    }

    pub fn size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn generator_count(&self) -> usize {
        self.perms.len()
    }

    pub fn apply_letter(&self, l: Letter, x: usize) -> usize {
        let i = (l.unsigned_abs() - 1) as usize;
        assert!(i < self.perms.len(), "letter outside generator range");
        if l > 0 {
            self.perms[i][x]
        } else {
            self.inv_perms[i][x]
        }
    }

    /// Left action of a word on a point (letters applied right-to-left).
    pub fn apply_word(&self, w: &Word, x: usize) -> usize {
        let mut p = x;
        for &l in w.letters().iter().rev() {
            p = self.apply_letter(l, p);
        }
        p
    }

    /// Membership in the stabilizer of the base coset.
    pub fn fixes_base(&self, w: &Word) -> bool {
        self.apply_word(w, self.base) == self.base
    }

    /// The conjugate subgroup g·Stab(base)·g⁻¹ = Stab(g·base).
    pub fn rebase(&self, g: &Word) -> CosetTable {
        CosetTable {
            perms: self.perms.clone(),
            inv_perms: self.inv_perms.clone(),
            base: self.apply_word(g, self.base),
        }
    }

    /// Breadth-first transversal: a word t_c with t_c · base = c for every
    /// coset in the base's orbit (the whole set when transitive).
    pub fn transversal(&self) -> Vec<Option<Word>> {
        let n = self.size();
        let mut t: Vec<Option<Word>> = vec![None; n];
        t[self.base] = Some(Word::identity());
        let mut queue = std::collections::VecDeque::from([self.base]);
        while let Some(c) = queue.pop_front() {
            for gi in 0..self.perms.len() {
                for l in [(gi + 1) as Letter, -((gi + 1) as Letter)] {
                    let c2 = self.apply_letter(l, c);
                    if t[c2].is_none() {
                        t[c2] = Some(Word::from_letters([l]).mul(t[c].as_ref().unwrap()));
                        queue.push_back(c2);
                    }
                }
            }
        }
        t
    }

    /// Schreier generators of the stabilizer: t_{x·c}⁻¹ · x · t_c over all
    /// cosets c in the orbit and positive generators x, nontrivial ones only.
    pub fn schreier_generators(&self) -> Vec<Word> {
        let t = self.transversal();
        let mut out: Vec<Word> = Vec::new();
        for c in 0..self.size() {
            let Some(tc) = &t[c] else { continue };
            for gi in 0..self.perms.len() {
                let x = Word::gen(gi + 1);
                let c2 = self.perms[gi][c];
                let Some(tc2) = &t[c2] else { continue };
                let s = tc2.inverse().mul(&x).mul(tc);
                if !s.is_identity() {
                    out.push(s);
                }
            }
        }
        out.sort_by(|a, b| a.shortlex_cmp(b));
        out.dedup();
        out
    }

    /// Exact equality of the two stabilizer subgroups, decided on the
    /// product automaton: every pair (u, v) reachable from the two bases by
    /// the diagonal action must agree about being at the base.
    pub fn same_subgroup(&self, other: &CosetTable) -> bool {
        assert_eq!(
            self.perms.len(),
            other.perms.len(),
            "stabilizers live in the same ambient group"
        );
        let mut seen = vec![false; self.size() * other.size()];
        let enc = |u: usize, v: usize| u * other.size() + v;
        let mut queue = std::collections::VecDeque::from([(self.base, other.base)]);
        seen[enc(self.base, other.base)] = true;
        while let Some((u, v)) = queue.pop_front() {
            if (u == self.base) != (v == other.base) {
                return false;
            }
            for gi in 0..self.perms.len() {
                for l in [(gi + 1) as Letter, -((gi + 1) as Letter)] {
                    let nu = self.apply_letter(l, u);
                    let nv = other.apply_letter(l, v);
                    if !seen[enc(nu, nv)] {
                        seen[enc(nu, nv)] = true;
                        queue.push_back((nu, nv));
                    }
                }
            }
        }
        true
    }

    /// The (complete) Schreier graph as a membership automaton: reading a
    /// letter walks by its inverse, so left-to-right acceptance agrees with
    /// the left action membership test.
    pub fn to_stallings(&self, rank: usize) -> StallingsGraph {
        assert_eq!(rank, self.perms.len());
        let n = self.size();
        let mut adj: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * rank]; n];
        for c in 0..n {
            for gi in 0..rank {
                let l = (gi + 1) as Letter;
                adj[c][letter_key(l) as usize] = Some(self.inv_perms[gi][c]);
                adj[c][letter_key(-l) as usize] = Some(self.perms[gi][c]);
            }
        }
        StallingsGraph::from_raw(rank, adj, self.base)
    }

    pub fn to_json(&self) -> CosetTableJson {
        CosetTableJson {
            size: self.size(),
            base: self.base,
            generator_images: self.perms.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetTableJson {
    pub size: usize,
    pub base: usize,
    pub generator_images: Vec<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    /// a → (0 1 2), b → (0 1) on three points.
    fn three_point() -> CosetTable {
        CosetTable::new(vec![vec![1, 2, 0], vec![1, 0, 2]], 0)
    }

    #[test]
    fn membership_by_walking() {
        let t = three_point();
        assert!(t.fixes_base(&w("aaa")));
        assert!(!t.fixes_base(&w("a")));
        assert!(!t.fixes_base(&w("b")));
        // ab⁻¹ maps 0 → a·(b⁻¹·0) = a·1 = 2, not fixed; ba maps 0 → b·1 = 0.
        assert!(!t.fixes_base(&w("aB")));
        assert!(t.fixes_base(&w("ba")));
    }

    #[test]
    fn parity_kernel() {
        // a, b both act as the swap on two points: the stabilizer is the
        // kernel of the total-exponent-mod-2 map.
        let t = CosetTable::new(vec![vec![1, 0], vec![1, 0]], 0);
        assert!(t.fixes_base(&w("ab")));
        assert!(t.fixes_base(&w("aa")));
        assert!(!t.fixes_base(&w("aba")));
    }

    #[test]
    fn rebase_is_conjugation() {
        let t = three_point();
        let t2 = t.rebase(&w("a")); // Stab(a·0) = Stab(1)
        assert_eq!(t2.base(), 1);
        for x in [w("aaa"), w("ba"), w("ab"), w("b"), w("aBa")] {
            let direct = t2.fixes_base(&x);
            let conj = t.fixes_base(&w("a").inverse().mul(&x).mul(&w("a")));
            assert_eq!(direct, conj, "mismatch at {x}");
        }
    }

    #[test]
    fn schreier_generators_lie_in_stabilizer() {
        let t = three_point();
        let gens = t.schreier_generators();
        assert!(!gens.is_empty());
        for g in &gens {
            assert!(t.fixes_base(g), "{g} should fix the base");
        }
    }

    #[test]
    fn automaton_agrees_with_walk() {
        let t = three_point();
        let g = t.to_stallings(2);
        assert_eq!(g.finite_index(), Some(3));
        for s in ["aaa", "ba", "ab", "a", "b", "aB", "bab", "aba"] {
            let word = w(s);
            assert_eq!(g.accepts(&word), t.fixes_base(&word), "mismatch at {s}");
        }
    }

    #[test]
    fn subgroup_equality_by_product_automaton() {
        let t = three_point();
        assert!(t.same_subgroup(&t));
        let t2 = t.rebase(&w("a"));
        assert!(!t.same_subgroup(&t2));
        // Conjugating by a³ (which acts trivially) returns the same subgroup.
        let t3 = t.rebase(&w("aaa"));
        assert!(t.same_subgroup(&t3));
    }
}
