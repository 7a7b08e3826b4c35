//! Invariant random subgroups as finitely supported rational measures:
//! stabilizer IRSs pushed forward from finite measure-preserving actions,
//! with exact invariance and ergodicity verification.

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::ModelSpace;
use crate::models::free::FreeGroupModel;
use crate::subgroups::{trace, CosetTable, SubgroupHandle};
use crate::word::{ball, Word};

#[derive(Debug, Error)]
pub enum IrsError {
    #[error("pushforward under generator {generator} moves trace-class {trace_class}")]
    NotInvariant {
        generator: String,
        trace_class: String,
    },
    #[error("ergodicity is defined here only for uniform weights")]
    NonUniformWeights,
    #[error("invalid action: {0}")]
    BadAction(String),
    #[error(transparent)]
    Subgroup(#[from] crate::subgroups::SubgroupError),
}

/// A finite action of the rank-k free group: one permutation per generator,
/// with rational point weights summing to one.
#[derive(Clone, Debug)]
pub struct FiniteAction {
    perms: Vec<Vec<usize>>,
    weights: Vec<Rational64>,
}

impl FiniteAction {
    pub fn new(perms: Vec<Vec<usize>>, weights: Option<Vec<Rational64>>) -> Result<FiniteAction, IrsError> {
        if perms.is_empty() || perms[0].is_empty() {
            return Err(IrsError::BadAction("need generators and points".into()));
        }
        let n = perms[0].len();
        for p in &perms {
            if p.len() != n {
                return Err(IrsError::BadAction("permutation degrees differ".into()));
            }
            let mut seen = vec![false; n];
            for &img in p {
                if img >= n || seen[img] {
                    return Err(IrsError::BadAction("generator image is not a bijection".into()));
                }
                seen[img] = true;
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(IrsError::BadAction("weight count mismatch".into()));
                }
                if w.iter().any(|x| x < &Rational64::zero()) {
                    return Err(IrsError::BadAction("negative weight".into()));
                }
                if w.iter().sum::<Rational64>() != Rational64::one() {
                    return Err(IrsError::BadAction("weights must sum to 1".into()));
                }
                w
            }
            None => vec![Rational64::new(1, n as i64); n],
        };
        Ok(FiniteAction { perms, weights })
    }

    pub fn uniform(perms: Vec<Vec<usize>>) -> Result<FiniteAction, IrsError> {
        FiniteAction::new(perms, None)
    }

    pub fn points(&self) -> usize {
        self.perms[0].len()
    }

    pub fn generator_count(&self) -> usize {
        self.perms.len()
    }

    pub fn weight(&self, x: usize) -> Rational64 {
        self.weights[x]
    }

    pub fn is_uniform(&self) -> bool {
        self.weights
            .iter()
            .all(|w| *w == Rational64::new(1, self.points() as i64))
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Orbits of the generated permutation group, each sorted, in order of
    /// least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.points();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for p in &self.perms {
                    for y in [p[x], p.iter().position(|&v| v == x).unwrap()] {
                        if !seen[y] {
                            seen[y] = true;
                            orbit.push(y);
                            queue.push_back(y);
                        }
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }
}

/// Stabilizer of a point: the coset table of the action restricted to the
/// point's orbit, based at the point.
pub fn stabilizer(action: &FiniteAction, x: usize) -> SubgroupHandle<FreeGroupModel> {
    assert!(x < action.points());
    // Orbit of x in breadth-first order so the handle is deterministic.
    let n = action.points();
    let mut index: Vec<Option<usize>> = vec![None; n];
    let mut orbit: Vec<usize> = vec![x];
    index[x] = Some(0);
    let mut queue = std::collections::VecDeque::from([x]);
    while let Some(p) = queue.pop_front() {
        for perm in &action.perms {
            let fwd = perm[p];
            let bwd = perm.iter().position(|&v| v == p).unwrap();
            for q in [fwd, bwd] {
                if index[q].is_none() {
                    index[q] = Some(orbit.len());
                    orbit.push(q);
                    queue.push_back(q);
                }
            }
        }
    }
    let restricted: Vec<Vec<usize>> = action
        .perms
        .iter()
        .map(|perm| {
            orbit
                .iter()
                .map(|&p| index[perm[p]].expect("orbit closed under generators"))
                .collect()
        })
        .collect();
    SubgroupHandle::CosetTable(CosetTable::new(restricted, 0))
}

/// A finitely supported conjugation-invariant measure on subgroups.
#[derive(Clone, Debug)]
pub struct IrsMeasure<M: ModelSpace> {
    pub atoms: Vec<(SubgroupHandle<M>, Rational64)>,
    pub provenance: String,
    /// Pairs of atom indices whose probe traces collide although the
    /// handles are (or may be) distinct subgroups; reported, never merged.
    pub probe_collisions: Vec<(usize, usize)>,
}

impl<M: ModelSpace> IrsMeasure<M> {
    pub fn dirac(handle: SubgroupHandle<M>, provenance: &str) -> IrsMeasure<M> {
        IrsMeasure {
            atoms: vec![(handle, Rational64::one())],
            provenance: provenance.to_string(),
            probe_collisions: Vec::new(),
        }
    }

    pub fn total_weight(&self) -> Rational64 {
        self.atoms.iter().map(|(_, w)| *w).sum()
    }
}

/// Canonical probe set: the radius-3 word ball.
pub fn canonical_probe(m: &FreeGroupModel) -> Vec<Word> {
    ball(m.rank(), 3)
}

/// Pushforward of the point weights under x ↦ Stab(x). Atoms with exactly
/// equal stabilizers merge; equality is decided exactly on the product
/// automaton, with probe-trace collisions between distinct subgroups
/// reported.
pub fn stabilizer_irs(m: &FreeGroupModel, action: &FiniteAction) -> IrsMeasure<FreeGroupModel> {
    let probe = canonical_probe(m);
    let mut reps: Vec<(SubgroupHandle<FreeGroupModel>, Rational64, String)> = Vec::new();
    for x in 0..action.points() {
        let handle = stabilizer(action, x);
        let key = trace(m, &handle, &probe)
            .expect("free-model traces are decidable")
            .key();
        let mut merged = false;
        for (rep, weight, _) in reps.iter_mut() {
            let equal = match (rep, &handle) {
                (SubgroupHandle::CosetTable(a), SubgroupHandle::CosetTable(b)) => {
                    a.same_subgroup(b)
                }
                _ => unreachable!("stabilizers are coset tables"),
            };
            if equal {
                *weight += action.weight(x);
                merged = true;
                break;
            }
        }
        if !merged {
            reps.push((handle, action.weight(x), key));
        }
    }
    // Deterministic atom order: by trace key, then by construction order.
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&i, &j| reps[i].2.cmp(&reps[j].2).then(i.cmp(&j)));
    let reps: Vec<(SubgroupHandle<FreeGroupModel>, Rational64, String)> =
        order.into_iter().map(|i| reps[i].clone()).collect();
    let mut collisions = Vec::new();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            if reps[i].2 == reps[j].2 {
                collisions.push((i, j));
            }
        }
    }
    IrsMeasure {
        atoms: reps.into_iter().map(|(h, w, _)| (h, w)).collect(),
        provenance: format!("stabilizer pushforward of a {}-point action", action.points()),
        probe_collisions: collisions,
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub generators_checked: usize,
    pub trace_classes: usize,
}

/// Check that the pushforward of the measure under H ↦ gHg⁻¹ equals the
/// measure on trace-classes over the probe set, for every generator, with
/// exact rational weights.
pub fn verify_invariance<M: ModelSpace>(
    m: &M,
    mu: &IrsMeasure<M>,
    gens: &[M::Elem],
    probe: &[M::Elem],
) -> Result<InvarianceReport, IrsError> {
    use std::collections::BTreeMap;
    assert_eq!(mu.total_weight(), Rational64::one(), "weights must sum to 1");
    let mut original: BTreeMap<String, Rational64> = BTreeMap::new();
    for (h, w) in &mu.atoms {
        *original.entry(trace(m, h, probe)?.key()).or_insert_with(Rational64::zero) += *w;
    }
    for g in gens {
        let mut pushed: BTreeMap<String, Rational64> = BTreeMap::new();
        for (h, w) in &mu.atoms {
            let conj = h.conjugated(m, g)?;
            *pushed.entry(trace(m, &conj, probe)?.key()).or_insert_with(Rational64::zero) += *w;
        }
        debug_assert_eq!(
            pushed.values().copied().sum::<Rational64>(),
            Rational64::one()
        );
        if pushed != original {
            let offending = original
                .iter()
                .find(|(k, w)| pushed.get(*k) != Some(w))
                .map(|(k, _)| k.clone())
                .unwrap_or_default();
            return Err(IrsError::NotInvariant {
                generator: m.elem_string(g),
                trace_class: offending,
            });
        }
    }
    Ok(InvarianceReport {
        generators_checked: gens.len(),
        trace_classes: original.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErgodicityVerdict {
    pub ergodic: bool,
    pub orbit_count: usize,
}

/// For uniform finite actions ergodicity is exactly transitivity.
pub fn verify_ergodicity(action: &FiniteAction) -> Result<ErgodicityVerdict, IrsError> {
    if !action.is_uniform() {
        return Err(IrsError::NonUniformWeights);
    }
    let orbits = action.orbits();
    Ok(ErgodicityVerdict {
        ergodic: orbits.len() == 1,
        orbit_count: orbits.len(),
    })
}

/// Seeded random transitive action of the rank-k free group on up to
/// `max_points` points (at least 2).
pub fn random_transitive_action(
    rng: &mut ChaCha8Rng,
    rank: usize,
    max_points: usize,
) -> FiniteAction {
    assert!(max_points >= 2);
    loop {
        let n = rng.random_range(2..=max_points);
        let perms: Vec<Vec<usize>> = (0..rank).map(|_| random_perm(rng, n)).collect();
        let action = FiniteAction::uniform(perms).expect("generated permutations are valid");
        if action.orbits().len() == 1 {
            return action;
        }
    }
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    // Fisher-Yates with the seeded generator.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn m() -> FreeGroupModel {
        FreeGroupModel::new(2)
    }

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    /// a → (0 1 2), b → (0 1).
    fn three_point() -> FiniteAction {
        FiniteAction::uniform(vec![vec![1, 2, 0], vec![1, 0, 2]]).unwrap()
    }

    #[test]
    fn stabilizer_membership() {
        let action = three_point();
        let h = stabilizer(&action, 0);
        let m = m();
        assert!(h.contains(&m, &w("aaa")).unwrap());
        assert!(!h.contains(&m, &w("a")).unwrap());
        // b fixes the point 2, not 0.
        assert!(!h.contains(&m, &w("b")).unwrap());
        let h2 = stabilizer(&action, 2);
        assert!(h2.contains(&m, &w("b")).unwrap());
    }

    #[test]
    fn stabilizer_irs_of_transitive_action() {
        let m = m();
        let mu = stabilizer_irs(&m, &three_point());
        assert_eq!(mu.atoms.len(), 3);
        for (_, w) in &mu.atoms {
            assert_eq!(*w, Rational64::new(1, 3));
        }
        assert!(mu.probe_collisions.is_empty());
        assert_eq!(mu.total_weight(), Rational64::one());
    }

    #[test]
    fn trivial_action_gives_full_group_atom() {
        let m = m();
        let action = FiniteAction::uniform(vec![vec![0, 1], vec![0, 1]]).unwrap();
        let mu = stabilizer_irs(&m, &action);
        assert_eq!(mu.atoms.len(), 1);
        assert_eq!(mu.atoms[0].1, Rational64::one());
        // The single atom is the whole group.
        assert!(mu.atoms[0].0.contains(&m, &w("a")).unwrap());
        assert!(mu.atoms[0].0.contains(&m, &w("bAbA")).unwrap());
    }

    #[test]
    fn same_cycle_generators_merge() {
        let m = m();
        // Both generators act as the same 3-cycle; the action factors
        // through Z/3 and all stabilizers coincide.
        let action = FiniteAction::uniform(vec![vec![1, 2, 0], vec![1, 2, 0]]).unwrap();
        let mu = stabilizer_irs(&m, &action);
        assert_eq!(mu.atoms.len(), 1);
        assert_eq!(mu.atoms[0].1, Rational64::one());
    }

    #[test]
    fn stabilizer_irs_is_invariant() {
        let m = m();
        let mu = stabilizer_irs(&m, &three_point());
        let gens = m.standard_generators();
        let probe = canonical_probe(&m);
        assert!(verify_invariance(&m, &mu, &gens, &probe).is_ok());
    }

    #[test]
    fn handcrafted_cyclic_dirac_is_not_invariant() {
        let m = m();
        let mu = IrsMeasure::dirac(
            SubgroupHandle::from_generators(&m, &[w("a")]),
            "dirac at <a>",
        );
        let err = verify_invariance(&m, &mu, &[w("b")], &[w("a"), w("baB")]).unwrap_err();
        match err {
            IrsError::NotInvariant { generator, .. } => assert_eq!(generator, "b"),
            other => panic!("expected NotInvariant, got {other:?}"),
        }
    }

    #[test]
    fn dirac_at_normal_kernel_is_invariant() {
        let m = m();
        // Index-2 kernel of the parity map.
        let action = FiniteAction::uniform(vec![vec![1, 0], vec![1, 0]]).unwrap();
        let h = stabilizer(&action, 0);
        let mu = IrsMeasure::dirac(h, "dirac at the index-2 kernel");
        let gens = m.standard_generators();
        let probe = canonical_probe(&m);
        assert!(verify_invariance(&m, &mu, &gens, &probe).is_ok());
    }

    #[test]
    fn ergodicity_is_transitivity() {
        assert!(verify_ergodicity(&three_point()).unwrap().ergodic);
        // Disjoint union of two copies.
        let action =
            FiniteAction::uniform(vec![vec![1, 2, 0, 4, 5, 3], vec![1, 0, 2, 4, 3, 5]]).unwrap();
        let v = verify_ergodicity(&action).unwrap();
        assert!(!v.ergodic);
        assert_eq!(v.orbit_count, 2);
        // m = 6, a → (0 1 2)(3 4 5), b → (0 3).
        let action =
            FiniteAction::uniform(vec![vec![1, 2, 0, 4, 5, 3], vec![3, 1, 2, 0, 4, 5]]).unwrap();
        assert!(verify_ergodicity(&action).unwrap().ergodic);
    }

    #[test]
    fn conjugation_identity_on_probes() {
        let m = m();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probe = canonical_probe(&m);
        for _ in 0..20 {
            let action = random_transitive_action(&mut rng, 2, 8);
            let x = rng.random_range(0..action.points());
            let g_len = rng.random_range(0..=4);
            let g = m.random_word(&mut rng, g_len);
            let lhs = stabilizer(&action, x).conjugated(&m, &g).unwrap();
            let gx = apply_perm_word(&action, &g, x);
            let rhs = stabilizer(&action, gx);
            let lt = trace(&m, &lhs, &probe).unwrap();
            let rt = trace(&m, &rhs, &probe).unwrap();
            assert_eq!(lt.members, rt.members);
        }
    }

    fn apply_perm_word(action: &FiniteAction, w: &Word, x: usize) -> usize {
        let mut p = x;
        for &l in w.letters().iter().rev() {
            let i = (l.unsigned_abs() - 1) as usize;
            p = if l > 0 {
                action.perms()[i][p]
            } else {
                action.perms()[i].iter().position(|&v| v == p).unwrap()
            };
        }
        p
    }

    #[test]
    fn merging_is_idempotent() {
        let m = m();
        let mu = stabilizer_irs(&m, &three_point());
        // Re-merging the atoms changes nothing: all pairwise distinct.
        for i in 0..mu.atoms.len() {
            for j in (i + 1)..mu.atoms.len() {
                if let (SubgroupHandle::CosetTable(a), SubgroupHandle::CosetTable(b)) =
                    (&mu.atoms[i].0, &mu.atoms[j].0)
                {
                    assert!(!a.same_subgroup(b));
                }
            }
        }
    }
}
