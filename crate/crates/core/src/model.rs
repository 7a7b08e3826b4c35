//! The interface every concrete model space implements: exact points,
//! distances, an isometry group with decidable element operations, and a
//! canonical boundary encoding.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::isometry::{ClassifyError, IsometryClass};
use crate::lamp::LampElem;
use crate::scalar::Scalar;
use crate::word::Word;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Free,
    HalfPlane,
    Lamplighter,
}

/// Serializable description of a model space.
#[derive(Clone, Debug, Serialize)]
pub struct ModelDescriptor {
    pub kind: ModelKind,
    /// Rank for the free model, number of standard generators otherwise.
    pub rank: usize,
    pub generators: Vec<String>,
    pub tolerance: f64,
}

pub trait ModelSpace: Clone + Debug {
    type Point: Clone + Eq + Ord + Hash + Debug;
    type Elem: Clone + Eq + Ord + Hash + Debug;
    type Boundary: Clone + Eq + Ord + Hash + Debug;
    type Scalar: Scalar;

    fn kind(&self) -> ModelKind;
    fn descriptor(&self) -> ModelDescriptor;
    fn basepoint(&self) -> Self::Point;
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Self::Scalar;
    /// Absolute slack for scalar comparisons; zero for exact models.
    fn tolerance(&self) -> f64;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, g: &Self::Elem, h: &Self::Elem) -> Self::Elem;
    fn inv(&self, g: &Self::Elem) -> Self::Elem;
    fn pow(&self, g: &Self::Elem, n: i64) -> Self::Elem {
        let base = if n >= 0 { g.clone() } else { self.inv(g) };
        let mut out = self.identity();
        for _ in 0..n.unsigned_abs() {
            out = self.mul(&out, &base);
        }
        out
    }
    fn conjugate(&self, g: &Self::Elem, by: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(by, g), &self.inv(by))
    }
    fn apply(&self, g: &Self::Elem, x: &Self::Point) -> Self::Point;
    fn boundary_action(&self, g: &Self::Elem, b: &Self::Boundary) -> Self::Boundary;

    fn classify(
        &self,
        g: &Self::Elem,
        orbit_budget: usize,
    ) -> Result<IsometryClass<Self>, ClassifyError>;

    fn standard_generators(&self) -> Vec<Self::Elem>;
    /// Distinguished boundary points fixed for structural reasons (the
    /// point at infinity, the downward end); empty for the free model.
    fn boundary_sentinels(&self) -> Vec<Self::Boundary>;

    /// Gromov product of two distinct boundary points seen from the
    /// basepoint — the distance from the basepoint to the geodesic joining
    /// them. None when the points coincide.
    fn boundary_gromov(&self, a: &Self::Boundary, b: &Self::Boundary) -> Option<Self::Scalar>;

    /// Canonical point sequence converging to the boundary point, starting
    /// at the basepoint.
    fn boundary_approach(&self, b: &Self::Boundary, len: usize) -> Vec<Self::Point>;

    fn elem_string(&self, g: &Self::Elem) -> String;
    fn point_string(&self, x: &Self::Point) -> String;
    fn boundary_string(&self, b: &Self::Boundary) -> String;

    fn sample_point(&self, rng: &mut ChaCha8Rng, size: u32) -> Self::Point;
    fn sample_elem(&self, rng: &mut ChaCha8Rng, size: u32) -> Self::Elem;

    /// Reduced-word form of the element, for models whose group is free.
    fn word_repr(&self, g: &Self::Elem) -> Option<Word>;
    /// Lamplighter form of the element, where applicable.
    fn lamp_repr(&self, g: &Self::Elem) -> Option<LampElem>;
    /// Exact power test: the n with g = genⁿ (up to overall sign in the
    /// half-plane model, where ± act identically); None if no power matches.
    fn power_of(&self, gen: &Self::Elem, g: &Self::Elem) -> Option<i64>;

    /// Vertex at the given distance from the basepoint on the geodesic to x.
    /// None when x is closer than that or the model has no canonical
    /// rooted-prefix notion (half-plane).
    fn geodesic_prefix(&self, x: &Self::Point, depth: usize) -> Option<Self::Point>;
}

/// An element of a word ball together with the first (breadth-first,
/// shortlex) expression reaching it in the generator alphabet.
#[derive(Clone, Debug)]
pub struct BallElement<M: ModelSpace> {
    pub elem: M::Elem,
    pub expr: Word,
}

/// Breadth-first enumeration of the ball of the given radius over a
/// generating set, deduplicated by exact element equality. Deterministic:
/// elements appear in order of first reachability, shortlex within a layer.
pub fn ball_elements<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    radius: usize,
) -> Vec<BallElement<M>> {
    let mut seen: HashSet<M::Elem> = HashSet::new();
    let mut out: Vec<BallElement<M>> = Vec::new();
    let id = m.identity();
    seen.insert(id.clone());
    out.push(BallElement {
        elem: id,
        expr: Word::identity(),
    });
    let mut layer_start = 0;
    let letters: Vec<(i8, M::Elem)> = gens
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            let l = (i + 1) as i8;
            [(l, g.clone()), (-l, m.inv(g))]
        })
        .collect();
    for _ in 0..radius {
        let layer_end = out.len();
        for idx in layer_start..layer_end {
            let base = out[idx].clone();
            for (letter, g) in &letters {
                let expr = base.expr.mul(&Word::from_letters([*letter]));
                if expr.len() <= base.expr.len() {
                    continue; // backtracking letter, already seen
                }
                let elem = m.mul(&base.elem, g);
                if seen.insert(elem.clone()) {
                    out.push(BallElement { elem, expr });
                }
            }
        }
        layer_start = layer_end;
    }
    out
}

/// Evaluate a word in the generator alphabet to a group element.
pub fn eval_word<M: ModelSpace>(m: &M, gens: &[M::Elem], w: &Word) -> M::Elem {
    let mut out = m.identity();
    for &l in w.letters() {
        let g = &gens[(l.unsigned_abs() - 1) as usize];
        let g = if l > 0 { g.clone() } else { m.inv(g) };
        out = m.mul(&out, &g);
    }
    out
}
