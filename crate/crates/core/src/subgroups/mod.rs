//! Subgroup handles with decidable membership, the neighborhood topology on
//! the space of subgroups, and the truncated recurrence checker.
//!
//! Recurrence quantifies over all conjugators and all neighborhoods; the
//! checker is parameterized by (g, F, N) and its verdicts are explicitly
//! bounded: `Verified(n)` is exact, `RefutedUpTo(N)` refutes only below N.

mod coset;
mod stallings;

pub use coset::CosetTable;
pub use stallings::{loops_up_to, StallingsGraph, StallingsJson};

use serde::Serialize;
use thiserror::Error;

use crate::lamp::LampElem;
use crate::model::ModelSpace;
use crate::models::free::FreeGroupModel;
use crate::word::Word;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubgroupError {
    #[error("membership undecidable for this handle/model combination: {0}")]
    Undecidable(String),
    #[error("operation {op} unsupported for handle kind {kind}")]
    UnsupportedKind { kind: &'static str, op: &'static str },
}

/// Membership oracle plus finite description of a subgroup.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SubgroupHandle<M: ModelSpace> {
    /// Folded core graph; subgroups of the free model.
    Stallings(StallingsGraph),
    /// Finite-index subgroups presented by a permutation action on cosets.
    CosetTable(CosetTable),
    /// Cyclic subgroup with the model's exact power test.
    Cyclic(M::Elem),
    /// Explicit finite subgroup.
    FiniteSet(Vec<M::Elem>),
    /// Lamplighter lamps supported on [lo, hi]: the subgroup ⟨a_lo..a_hi⟩.
    LampInterval { lo: i64, hi: i64 },
}

impl<M: ModelSpace> SubgroupHandle<M> {
    pub fn trivial(m: &M) -> SubgroupHandle<M> {
        SubgroupHandle::FiniteSet(vec![m.identity()])
    }

    pub fn finite_set(m: &M, elems: Vec<M::Elem>) -> SubgroupHandle<M> {
        let mut set: Vec<M::Elem> = elems;
        set.sort();
        set.dedup();
        assert!(
            set.contains(&m.identity()),
            "a finite subgroup must contain the identity"
        );
        SubgroupHandle::FiniteSet(set)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SubgroupHandle::Stallings(_) => "stallings",
            SubgroupHandle::CosetTable(_) => "coset-table",
            SubgroupHandle::Cyclic(_) => "cyclic",
            SubgroupHandle::FiniteSet(_) => "finite-set",
            SubgroupHandle::LampInterval { .. } => "lamp-interval",
        }
    }

    /// Exact membership decision.
    pub fn contains(&self, m: &M, g: &M::Elem) -> Result<bool, SubgroupError> {
        match self {
            SubgroupHandle::Stallings(graph) => match m.word_repr(g) {
                Some(w) => Ok(graph.accepts(&w)),
                None => Err(SubgroupError::Undecidable(
                    "stallings handle needs a free-model element".into(),
                )),
            },
            SubgroupHandle::CosetTable(t) => match m.word_repr(g) {
                Some(w) => Ok(t.fixes_base(&w)),
                None => Err(SubgroupError::Undecidable(
                    "coset table needs a free-model element".into(),
                )),
            },
            SubgroupHandle::Cyclic(gen) => Ok(m.power_of(gen, g).is_some()),
            SubgroupHandle::FiniteSet(set) => Ok(set.contains(g)),
            SubgroupHandle::LampInterval { lo, hi } => match m.lamp_repr(g) {
                Some(e) => Ok(e.shift == 0 && e.lamps.iter().all(|i| lo <= i && i <= hi)),
                None => Err(SubgroupError::Undecidable(
                    "lamp interval needs a lamplighter element".into(),
                )),
            },
        }
    }

    /// Handle for the conjugate subgroup g·H·g⁻¹.
    pub fn conjugated(&self, m: &M, g: &M::Elem) -> Result<SubgroupHandle<M>, SubgroupError> {
        match self {
            SubgroupHandle::Stallings(graph) => {
                let gw = m.word_repr(g).ok_or_else(|| SubgroupError::Undecidable(
                    "stallings handle needs a free-model conjugator".into(),
                ))?;
                let gens: Vec<Word> = graph
                    .subgroup_generators()
                    .into_iter()
                    .map(|w| gw.mul(&w).mul(&gw.inverse()))
                    .collect();
                Ok(SubgroupHandle::Stallings(StallingsGraph::from_words(
                    graph.rank(),
                    &gens,
                )))
            }
            SubgroupHandle::CosetTable(t) => {
                let gw = m.word_repr(g).ok_or_else(|| SubgroupError::Undecidable(
                    "coset table needs a free-model conjugator".into(),
                ))?;
                Ok(SubgroupHandle::CosetTable(t.rebase(&gw)))
            }
            SubgroupHandle::Cyclic(gen) => Ok(SubgroupHandle::Cyclic(m.conjugate(gen, g))),
            SubgroupHandle::FiniteSet(set) => {
                let mut conj: Vec<M::Elem> = set.iter().map(|h| m.conjugate(h, g)).collect();
                conj.sort();
                Ok(SubgroupHandle::FiniteSet(conj))
            }
            SubgroupHandle::LampInterval { lo, hi } => match m.lamp_repr(g) {
                // Conjugating a_i by (f, s) gives a_{i−s}.
                Some(e) => Ok(SubgroupHandle::LampInterval {
                    lo: lo - e.shift,
                    hi: hi - e.shift,
                }),
                None => Err(SubgroupError::Undecidable(
                    "lamp interval needs a lamplighter conjugator".into(),
                )),
            },
        }
    }

    /// Index in the ambient group, where the handle kind supports it.
    pub fn index(&self) -> Result<SubgroupIndex, SubgroupError> {
        match self {
            SubgroupHandle::Stallings(graph) => Ok(match graph.finite_index() {
                Some(n) => SubgroupIndex::Finite(n),
                None => SubgroupIndex::Infinite,
            }),
            SubgroupHandle::CosetTable(t) => Ok(SubgroupIndex::Finite(t.size())),
            _ => Err(SubgroupError::UnsupportedKind {
                kind: self.kind_name(),
                op: "index",
            }),
        }
    }

    /// Deterministic sample of subgroup elements for probing, capped.
    pub fn probe_elements(&self, m: &M, bound: usize, cap: usize) -> Vec<M::Elem> {
        match self {
            SubgroupHandle::Stallings(graph) => {
                let words = loops_up_to(graph, bound, cap);
                words
                    .into_iter()
                    .filter_map(|w| elem_from_word(m, &w))
                    .collect()
            }
            SubgroupHandle::CosetTable(t) => {
                let mut out: Vec<M::Elem> = vec![m.identity()];
                for w in t.schreier_generators() {
                    if let Some(e) = elem_from_word(m, &w) {
                        out.push(e);
                    }
                }
                out.truncate(cap);
                out
            }
            SubgroupHandle::Cyclic(gen) => {
                let mut out = vec![m.identity()];
                for j in 1..=bound as i64 {
                    out.push(m.pow(gen, j));
                    out.push(m.pow(gen, -j));
                    if out.len() >= cap {
                        break;
                    }
                }
                out.truncate(cap);
                out
            }
            SubgroupHandle::FiniteSet(set) => set.iter().take(cap).cloned().collect(),
            SubgroupHandle::LampInterval { lo, hi } => {
                let mut out = vec![m.identity()];
                for (count, i) in (*lo..=*hi).enumerate() {
                    if count >= cap {
                        break;
                    }
                    if let Some(e) = lamp_to_elem(m, &LampElem::lamp(i)) {
                        out.push(e);
                    }
                }
                out.truncate(cap);
                out
            }
        }
    }
}

fn elem_from_word<M: ModelSpace>(m: &M, w: &Word) -> Option<M::Elem> {
    // Only meaningful when elements are words; the free model round-trips.
    let gens: Vec<M::Elem> = m.standard_generators();
    if w.letters()
        .iter()
        .any(|l| l.unsigned_abs() as usize > gens.len())
    {
        return None;
    }
    Some(crate::model::eval_word(m, &gens, w))
}

fn lamp_to_elem<M: ModelSpace>(m: &M, e: &LampElem) -> Option<M::Elem> {
    // a_i = t⁻ⁱ a tⁱ in the standard generators (a, t).
    let gens = m.standard_generators();
    if gens.len() != 2 {
        return None;
    }
    let i = *e.lamps.iter().next()?;
    let a = &gens[0];
    let t = &gens[1];
    Some(m.mul(&m.mul(&m.pow(t, -i), a), &m.pow(t, i)))
}

impl SubgroupHandle<FreeGroupModel> {
    /// Subgroup of the free model generated by the given words.
    pub fn from_generators(m: &FreeGroupModel, words: &[Word]) -> SubgroupHandle<FreeGroupModel> {
        SubgroupHandle::Stallings(StallingsGraph::from_words(m.rank(), words))
    }

    /// Membership automaton over the letter alphabet: states, basepoint and
    /// deterministic partial transitions.
    pub fn automaton(&self, m: &FreeGroupModel) -> Result<StallingsGraph, SubgroupError> {
        match self {
            SubgroupHandle::Stallings(g) => Ok(g.clone()),
            SubgroupHandle::CosetTable(t) => Ok(t.to_stallings(m.rank())),
            SubgroupHandle::Cyclic(gen) => {
                Ok(StallingsGraph::from_words(m.rank(), &[gen.clone()]))
            }
            SubgroupHandle::FiniteSet(set) => {
                Ok(StallingsGraph::from_words(m.rank(), set))
            }
            SubgroupHandle::LampInterval { .. } => Err(SubgroupError::UnsupportedKind {
                kind: self.kind_name(),
                op: "automaton",
            }),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum SubgroupIndex {
    Finite(usize),
    Infinite,
}

/// Intersection of a subgroup with a finite probe set: the data defining
/// the neighborhood U_F(H) in the space of subgroups.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NeighborhoodTrace<M: ModelSpace> {
    pub probe: Vec<M::Elem>,
    pub members: Vec<bool>,
}

impl<M: ModelSpace> NeighborhoodTrace<M> {
    /// Canonical bitstring, for deterministic trace-class keys.
    pub fn key(&self) -> String {
        self.members
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn member_elems(&self) -> Vec<&M::Elem> {
        self.probe
            .iter()
            .zip(&self.members)
            .filter_map(|(e, &b)| b.then_some(e))
            .collect()
    }
}

/// Element-wise membership filter H ∩ F.
pub fn trace<M: ModelSpace>(
    m: &M,
    handle: &SubgroupHandle<M>,
    probe: &[M::Elem],
) -> Result<NeighborhoodTrace<M>, SubgroupError> {
    let members = probe
        .iter()
        .map(|f| handle.contains(m, f))
        .collect::<Result<Vec<bool>, _>>()?;
    Ok(NeighborhoodTrace {
        probe: probe.to_vec(),
        members,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum RecurrenceStatus {
    /// gⁿHg⁻ⁿ ∩ F = H ∩ F at this n (first witness found).
    Verified(usize),
    /// No n up to the bound matched; refutes recurrence only up to it.
    RefutedUpTo(usize),
}

#[derive(Clone, Debug)]
pub struct RecurrenceVerdict<M: ModelSpace> {
    pub status: RecurrenceStatus,
    pub conjugator: M::Elem,
    pub probe: Vec<M::Elem>,
    pub search_bound: usize,
}

/// Scan n = 1..N for a return of the conjugation orbit to the neighborhood
/// U_F(H).
pub fn recurrence_check<M: ModelSpace>(
    m: &M,
    handle: &SubgroupHandle<M>,
    g: &M::Elem,
    probe: &[M::Elem],
    search_bound: usize,
) -> Result<RecurrenceVerdict<M>, SubgroupError> {
    assert!(search_bound >= 1);
    let base_trace = trace(m, handle, probe)?;
    let mut g_pow = m.identity();
    for n in 1..=search_bound {
        g_pow = m.mul(&g_pow, g);
        let conj = handle.conjugated(m, &g_pow)?;
        if trace(m, &conj, probe)?.members == base_trace.members {
            return Ok(RecurrenceVerdict {
                status: RecurrenceStatus::Verified(n),
                conjugator: g.clone(),
                probe: probe.to_vec(),
                search_bound,
            });
        }
    }
    Ok(RecurrenceVerdict {
        status: RecurrenceStatus::RefutedUpTo(search_bound),
        conjugator: g.clone(),
        probe: probe.to_vec(),
        search_bound,
    })
}

/// All n ≤ N with h^{gⁿ} = g⁻ⁿhgⁿ ∈ H (the conjugate-return statement for
/// recurrent subgroups).
pub fn conjugate_return_check<M: ModelSpace>(
    m: &M,
    handle: &SubgroupHandle<M>,
    h: &M::Elem,
    g: &M::Elem,
    search_bound: usize,
) -> Result<Vec<usize>, SubgroupError> {
    assert!(
        handle.contains(m, h)?,
        "h must belong to the subgroup being probed"
    );
    let g_inv = m.inv(g);
    let mut out = Vec::new();
    let mut left = m.identity(); // g⁻ⁿ
    let mut right = m.identity(); // gⁿ
    for n in 1..=search_bound {
        left = m.mul(&left, &g_inv);
        right = m.mul(&right, g);
        let conj = m.mul(&m.mul(&left, h), &right);
        if handle.contains(m, &conj)? {
            out.push(n);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::free::FreeGroupModel;

    fn m() -> FreeGroupModel {
        FreeGroupModel::new(2)
    }

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn cyclic_handle_membership() {
        let m = m();
        let h: SubgroupHandle<FreeGroupModel> = SubgroupHandle::Cyclic(w("a"));
        assert!(h.contains(&m, &w("aaaaa")).unwrap());
        assert!(!h.contains(&m, &w("bab").inverse()).unwrap());
        assert!(h.contains(&m, &Word::identity()).unwrap());
    }

    #[test]
    fn conjugated_cyclic() {
        let m = m();
        let h: SubgroupHandle<FreeGroupModel> = SubgroupHandle::Cyclic(w("a"));
        let hb = h.conjugated(&m, &w("b")).unwrap();
        assert!(hb.contains(&m, &w("baB")).unwrap());
        assert!(!hb.contains(&m, &w("a")).unwrap());
        // Consistency: x ∈ gHg⁻¹ ⟺ g⁻¹xg ∈ H.
        for x in [w("a"), w("baB"), w("ab"), w("baaB")] {
            let lhs = hb.contains(&m, &x).unwrap();
            let inner = w("b").inverse().mul(&x).mul(&w("b"));
            assert_eq!(lhs, h.contains(&m, &inner).unwrap());
        }
    }

    #[test]
    fn trace_examples() {
        let m = m();
        let h = SubgroupHandle::from_generators(&m, &[w("a")]);
        let t = trace(&m, &h, &[w("a"), w("b"), w("ab")]).unwrap();
        assert_eq!(t.members, vec![true, false, false]);
        assert_eq!(t.key(), "100");
        let trivial = SubgroupHandle::trivial(&m);
        let t = trace(&m, &trivial, &[w("a"), w("b")]).unwrap();
        assert_eq!(t.members, vec![false, false]);
    }

    #[test]
    fn recurrence_refuted_for_cyclic_a_conjugated_by_b() {
        let m = m();
        let h = SubgroupHandle::from_generators(&m, &[w("a")]);
        let verdict = recurrence_check(&m, &h, &w("b"), &[w("a")], 50).unwrap();
        assert_eq!(verdict.status, RecurrenceStatus::RefutedUpTo(50));
    }

    #[test]
    fn conjugate_return_examples() {
        let m = m();
        let h = SubgroupHandle::from_generators(&m, &[w("a")]);
        let ns = conjugate_return_check(&m, &h, &w("a"), &w("b"), 20).unwrap();
        assert!(ns.is_empty());
    }

    #[test]
    fn index_of_handles() {
        let m = m();
        let h = SubgroupHandle::from_generators(&m, &[w("a")]);
        assert_eq!(h.index().unwrap(), SubgroupIndex::Infinite);
        let t: SubgroupHandle<FreeGroupModel> = SubgroupHandle::Cyclic(w("a"));
        assert!(t.index().is_err());
    }

    #[test]
    fn lamp_interval_handles() {
        use crate::models::lamplighter::LamplighterModel;
        let lm = LamplighterModel::new();
        let n1: SubgroupHandle<LamplighterModel> = SubgroupHandle::LampInterval { lo: -1, hi: 1 };
        assert!(n1.contains(&lm, &LampElem::lamp(1)).unwrap());
        assert!(n1.contains(&lm, &LampElem::new([-1, 0, 1], 0)).unwrap());
        assert!(!n1.contains(&lm, &LampElem::lamp(2)).unwrap());
        assert!(!n1.contains(&lm, &LampElem::shift_gen()).unwrap());
        // Conjugation by the shift slides the interval.
        let conj = n1.conjugated(&lm, &LampElem::shift_gen()).unwrap();
        assert_eq!(conj, SubgroupHandle::LampInterval { lo: -2, hi: 0 });
    }
}
