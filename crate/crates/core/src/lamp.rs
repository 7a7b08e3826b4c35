//! The wreath product Z₂ ≀ Z and the 3-regular tree it acts on.
//!
//! Group elements are pairs (lamps, shift) with finitely many lamps lit.
//! Writing S_n(h) for the function i ↦ h(i + n), multiplication is
//! (f, n)(h, m) = (f ⊕ S_n h, n + m); under this convention conjugating the
//! lamp at 0 by the shift t moves it to position i: a^{tⁱ} has its lamp at i.
//!
//! Tree vertices are pairs (level, pattern) with the pattern supported on
//! positions < level; each vertex has one parent a level down and two children
//! a level up, one per bit at the current level.

use std::collections::BTreeSet;
use std::fmt;

/// Group element (lamps, shift).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LampElem {
    pub lamps: BTreeSet<i64>,
    pub shift: i64,
}

impl LampElem {
    pub fn identity() -> LampElem {
        LampElem::default()
    }

    /// The lamp generator at position i, i.e. the conjugate a^{tⁱ}.
    pub fn lamp(i: i64) -> LampElem {
        LampElem {
            lamps: BTreeSet::from([i]),
            shift: 0,
        }
    }

    /// The shift generator t.
    pub fn shift_gen() -> LampElem {
        LampElem {
            lamps: BTreeSet::new(),
            shift: 1,
        }
    }

    pub fn new<I: IntoIterator<Item = i64>>(lamps: I, shift: i64) -> LampElem {
        LampElem {
            lamps: xor_collect(lamps),
            shift,
        }
    }

    pub fn mul(&self, rhs: &LampElem) -> LampElem {
        // supp(S_n h) = supp(h) - n
        let shifted = rhs.lamps.iter().map(|&i| i - self.shift);
        LampElem {
            lamps: xor_sets(self.lamps.iter().copied(), shifted),
            shift: self.shift + rhs.shift,
        }
    }

    pub fn inverse(&self) -> LampElem {
        LampElem {
            lamps: self.lamps.iter().map(|&i| i + self.shift).collect(),
            shift: -self.shift,
        }
    }

    pub fn pow(&self, n: i64) -> LampElem {
        let base = if n >= 0 { self.clone() } else { self.inverse() };
        let mut out = LampElem::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.lamps.is_empty() && self.shift == 0
    }

    /// Action on a tree vertex.
    pub fn apply(&self, v: &LampVertex) -> LampVertex {
        let level = v.level - self.shift;
        let mut pattern: BTreeSet<i64> = v.pattern.iter().map(|&i| i - self.shift).collect();
        for &i in &self.lamps {
            if i < level {
                if !pattern.insert(i) {
                    pattern.remove(&i);
                }
            }
        }
        LampVertex { level, pattern }
    }

    /// Action on an end of the tree.
    pub fn apply_end(&self, e: &LampEnd) -> LampEnd {
        match e {
            LampEnd::Down => LampEnd::Down,
            LampEnd::Up(p) => LampEnd::Up(p.shift_down(self.shift).xor_bits(&self.lamps)),
        }
    }
}

fn xor_collect<I: IntoIterator<Item = i64>>(items: I) -> BTreeSet<i64> {
    let mut set = BTreeSet::new();
    for i in items {
        if !set.insert(i) {
            set.remove(&i);
        }
    }
    set
}

fn xor_sets<I, J>(a: I, b: J) -> BTreeSet<i64>
where
    I: IntoIterator<Item = i64>,
    J: IntoIterator<Item = i64>,
{
    xor_collect(a.into_iter().chain(b))
}

impl fmt::Display for LampElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lamps: Vec<String> = self.lamps.iter().map(|i| i.to_string()).collect();
        write!(f, "({{{}}},{})", lamps.join(","), self.shift)
    }
}

impl fmt::Debug for LampElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LampElem{self}")
    }
}

/// Tree vertex: a level together with the lamp pattern below it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampVertex {
    pub level: i64,
    /// Lit positions, all < level.
    pub pattern: BTreeSet<i64>,
}

impl LampVertex {
    pub fn root() -> LampVertex {
        LampVertex {
            level: 0,
            pattern: BTreeSet::new(),
        }
    }

    pub fn new<I: IntoIterator<Item = i64>>(level: i64, pattern: I) -> LampVertex {
        let pattern: BTreeSet<i64> = pattern.into_iter().collect();
        assert!(
            pattern.iter().all(|&i| i < level),
            "pattern bits must lie below the level"
        );
        LampVertex { level, pattern }
    }

    /// Highest level at which the patterns of the two vertices agree; the
    /// meet of the two vertices in the tree sits at this level.
    pub fn meet_level(&self, other: &LampVertex) -> i64 {
        let m = self.level.min(other.level);
        match self.pattern.symmetric_difference(&other.pattern).next() {
            Some(&lowest_diff) => m.min(lowest_diff),
            None => m,
        }
    }

    pub fn distance(&self, other: &LampVertex) -> i64 {
        let k = self.meet_level(other);
        (self.level - k) + (other.level - k)
    }

    pub fn parent(&self) -> LampVertex {
        let level = self.level - 1;
        let pattern = self.pattern.iter().copied().filter(|&i| i < level).collect();
        LampVertex { level, pattern }
    }

    pub fn child(&self, bit: bool) -> LampVertex {
        let mut pattern = self.pattern.clone();
        if bit {
            pattern.insert(self.level);
        }
        LampVertex {
            level: self.level + 1,
            pattern,
        }
    }

    /// The three neighbours: parent first, then the two children.
    pub fn neighbours(&self) -> Vec<LampVertex> {
        vec![self.parent(), self.child(false), self.child(true)]
    }

    /// Vertex at distance `depth` from the root on the geodesic to self;
    /// None if the vertex is closer than that.
    pub fn geodesic_prefix(&self, depth: i64) -> Option<LampVertex> {
        let root = LampVertex::root();
        let k = self.meet_level(&root);
        let down = -k; // distance from the root to the meet
        if depth <= down {
            return Some(LampVertex {
                level: -depth,
                pattern: BTreeSet::new(),
            });
        }
        if depth > down + (self.level - k) {
            return None;
        }
        let level = k + (depth - down);
        let pattern = self.pattern.iter().copied().filter(|&i| i < level).collect();
        Some(LampVertex { level, pattern })
    }
}

impl fmt::Display for LampVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: Vec<String> = self.pattern.iter().map(|i| i.to_string()).collect();
        write!(f, "[{};{{{}}}]", self.level, bits.join(","))
    }
}

impl fmt::Debug for LampVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LampVertex{self}")
    }
}

/// An end of an upward ray: a bit function on all of Z with finitely many
/// lit positions below `period_start` (listed in `low`) and eventually
/// periodic bits `period` from `period_start` on.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UpEnd {
    pub low: BTreeSet<i64>,
    pub period_start: i64,
    pub period: Vec<bool>,
}

impl UpEnd {
    pub fn new<I: IntoIterator<Item = i64>>(low: I, period_start: i64, period: Vec<bool>) -> UpEnd {
        assert!(!period.is_empty());
        UpEnd {
            low: low.into_iter().collect(),
            period_start,
            period,
        }
        .normalize()
    }

    /// The all-zero end straight above the root.
    pub fn zero() -> UpEnd {
        UpEnd {
            low: BTreeSet::new(),
            period_start: 0,
            period: vec![false],
        }
    }

    pub fn bit(&self, i: i64) -> bool {
        if i >= self.period_start {
            let k = (i - self.period_start) as usize % self.period.len();
            self.period[k]
        } else {
            self.low.contains(&i)
        }
    }

    fn normalize(mut self) -> UpEnd {
        assert!(self.low.iter().all(|&i| i < self.period_start));
        // Minimal period.
        let m = self.period.len();
        for p in 1..m {
            if m % p == 0 && (p..m).all(|i| self.period[i] == self.period[i - p]) {
                self.period.truncate(p);
                break;
            }
        }
        // Minimal preperiod: absorb matching bits below the period start.
        loop {
            if self.period.iter().all(|&b| !b) && self.low.is_empty() {
                self.period = vec![false];
                self.period_start = 0;
                return self;
            }
            let prev = self.period_start - 1;
            let prev_bit = self.low.contains(&prev);
            let wrap = self.period[self.period.len() - 1];
            if prev_bit == wrap {
                self.low.remove(&prev);
                self.period.rotate_right(1);
                self.period_start = prev;
            } else {
                return self;
            }
        }
    }

    fn shift_down(&self, m: i64) -> UpEnd {
        UpEnd {
            low: self.low.iter().map(|&i| i - m).collect(),
            period_start: self.period_start - m,
            period: self.period.clone(),
        }
    }

    fn xor_bits(&self, lamps: &BTreeSet<i64>) -> UpEnd {
        if lamps.is_empty() {
            return self.clone().normalize();
        }
        let hi = *lamps.iter().max().unwrap() + 1;
        let mut out = self.clone();
        // Materialize period bits up to hi so the XOR stays in the explicit part.
        while out.period_start < hi {
            let b = out.period[0];
            if b {
                out.low.insert(out.period_start);
            }
            out.period.rotate_left(1);
            out.period_start += 1;
        }
        for &i in lamps {
            if !out.low.insert(i) {
                out.low.remove(&i);
            }
        }
        out.normalize()
    }

    /// Lowest lit position, if any bit is lit at all.
    pub fn min_lit(&self) -> Option<i64> {
        if let Some(&i) = self.low.iter().next() {
            return Some(i);
        }
        self.period
            .iter()
            .position(|&b| b)
            .map(|idx| self.period_start + idx as i64)
    }

    /// Vertices along the ray from the root towards this end, one entry per
    /// step, starting at the root.
    pub fn ray_from_root(&self, len: usize) -> Vec<LampVertex> {
        let bottom = self.min_lit().unwrap_or(0).min(0);
        let mut out = Vec::with_capacity(len + 1);
        let root = LampVertex::root();
        out.push(root);
        // Descend to the meet with the all-empty spine, then ascend.
        let mut level = 0i64;
        let mut descending = true;
        while out.len() <= len {
            if descending {
                if level > bottom {
                    level -= 1;
                    out.push(LampVertex {
                        level,
                        pattern: BTreeSet::new(),
                    });
                    continue;
                }
                descending = false;
            }
            level += 1;
            let pattern = (bottom..level).filter(|&i| self.bit(i)).collect();
            out.push(LampVertex { level, pattern });
        }
        out
    }
}

/// An end of the lamplighter tree: the unique downward end (fixed by the
/// whole group) or an upward end.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum LampEnd {
    Down,
    Up(UpEnd),
}

impl fmt::Display for LampEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LampEnd::Down => write!(f, "down"),
            LampEnd::Up(p) => {
                let low: Vec<String> = p.low.iter().map(|i| i.to_string()).collect();
                let per: String = p.period.iter().map(|&b| if b { '1' } else { '0' }).collect();
                write!(f, "up[{{{}}};{};{}]", low.join(","), p.period_start, per)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_and_conjugation() {
        let a = LampElem::lamp(0);
        let t = LampElem::shift_gen();
        // a^{tⁱ} = t⁻ⁱ a tⁱ has its lamp at position i.
        for i in -3..=3 {
            let conj = t.pow(-i).mul(&a).mul(&t.pow(i));
            assert_eq!(conj, LampElem::lamp(i));
        }
        assert!(a.mul(&a).is_identity());
        assert!(t.mul(&t.inverse()).is_identity());
    }

    #[test]
    fn group_axioms_on_samples() {
        let xs = [
            LampElem::new([0, 2], 1),
            LampElem::new([-1], -2),
            LampElem::new([3, -3], 0),
        ];
        for x in &xs {
            assert!(x.mul(&x.inverse()).is_identity());
            for y in &xs {
                for z in &xs {
                    assert_eq!(x.mul(y).mul(z), x.mul(&y.mul(z)));
                }
            }
        }
    }

    #[test]
    fn vertex_distance_examples() {
        let root = LampVertex::root();
        // Lamp at -2 maps the root to (0, {-2}); distance 4.
        let g = LampElem::lamp(-2);
        let img = g.apply(&root);
        assert_eq!(img, LampVertex::new(0, [-2]));
        assert_eq!(root.distance(&img), 4);
        // Lamp at a nonnegative position fixes the root.
        assert_eq!(LampElem::lamp(1).apply(&root), root);
        // The shift moves the root one level down.
        let t = LampElem::shift_gen();
        assert_eq!(t.apply(&root), LampVertex::new(-1, []));
        assert_eq!(root.distance(&t.pow(5).apply(&root)), 5);
    }

    #[test]
    fn tree_is_three_regular() {
        let v = LampVertex::new(2, [-1, 0]);
        let ns = v.neighbours();
        assert_eq!(ns.len(), 3);
        for n in &ns {
            assert_eq!(v.distance(n), 1);
        }
        assert_eq!(v.parent().child(v.pattern.contains(&1)), v);
        assert_eq!(v.child(true).parent(), v);
        assert_eq!(v.child(false).parent(), v);
    }

    #[test]
    fn action_is_isometric_on_samples() {
        let gs = [
            LampElem::new([0, -2], 1),
            LampElem::new([1], -3),
            LampElem::shift_gen(),
        ];
        let vs = [
            LampVertex::root(),
            LampVertex::new(2, [0, -1]),
            LampVertex::new(-3, [-5]),
            LampVertex::new(1, [-4, 0]),
        ];
        for g in &gs {
            for v in &vs {
                for w in &vs {
                    assert_eq!(g.apply(v).distance(&g.apply(w)), v.distance(w));
                }
            }
        }
    }

    #[test]
    fn action_is_homomorphic() {
        let g = LampElem::new([0], 2);
        let h = LampElem::new([-1, 3], -1);
        let v = LampVertex::new(1, [-2, 0]);
        assert_eq!(g.mul(&h).apply(&v), g.apply(&h.apply(&v)));
    }

    #[test]
    fn up_end_normalization() {
        // Explicit zeros below an all-zero period collapse to the zero end.
        let e = UpEnd::new([], 5, vec![false, false]);
        assert_eq!(e, UpEnd::zero());
        // A lit bit below a zero period survives.
        let e = UpEnd::new([-2], 0, vec![false]);
        assert_eq!(e.period, vec![false]);
        assert_eq!(e.period_start, -1);
        assert!(e.bit(-2));
        // A bit matching the rotated period is absorbed into it.
        let e = UpEnd::new([0], 1, vec![false, true]);
        assert_eq!(e, UpEnd::new([], 0, vec![true, false]));
        // A mismatching bit is not.
        let e = UpEnd::new([0], 1, vec![true, false]);
        assert_eq!(e.low, std::collections::BTreeSet::from([0]));
        assert_eq!(e.period_start, 1);
    }

    #[test]
    fn end_action_shifts_bits() {
        let e = UpEnd::zero();
        let g = LampElem::lamp(4);
        let moved = g.apply_end(&LampEnd::Up(e));
        match moved {
            LampEnd::Up(p) => {
                assert!(p.bit(4));
                assert!(!p.bit(3));
                assert!(!p.bit(5));
            }
            LampEnd::Down => panic!("expected an upward end"),
        }
        // The whole group fixes the downward end.
        assert_eq!(g.apply_end(&LampEnd::Down), LampEnd::Down);
    }

    #[test]
    fn ray_vertices_lie_on_a_geodesic() {
        let e = UpEnd::new([-2], 0, vec![true, false]);
        let ray = e.ray_from_root(8);
        assert_eq!(ray[0], LampVertex::root());
        for i in 1..ray.len() {
            assert_eq!(ray[i - 1].distance(&ray[i]), 1);
            assert_eq!(ray[0].distance(&ray[i]), i as i64);
        }
    }

    #[test]
    fn geodesic_prefix_consistency() {
        let v = LampVertex::new(2, [-2, 1]);
        let d = LampVertex::root().distance(&v);
        for depth in 0..=d {
            let p = v.geodesic_prefix(depth).unwrap();
            assert_eq!(LampVertex::root().distance(&p), depth);
            assert_eq!(p.distance(&v), d - depth);
        }
        assert!(v.geodesic_prefix(d + 1).is_none());
    }
}
