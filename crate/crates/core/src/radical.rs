//! The elliptic radical: elements fixing every limit point. For general
//! type actions it is the unique maximal normal elliptic subgroup; the
//! verifier checks candidates on sampled limit points, and the lamplighter
//! chain witnesses non-existence for a parabolic action.

use thiserror::Error;

use crate::hyp::{same_boundary_point, ConvergenceParams};
use crate::isometry::{
    action_type, loxodromic_fixed_points_in_ball, ActionTypeParams, ActionTypeReport,
    IsometryError,
};
use crate::lamp::LampElem;
use crate::model::{ball_elements, ModelSpace};
use crate::models::lamplighter::LamplighterModel;
use crate::scalar::{smax, Scalar};
use crate::subgroups::{SubgroupError, SubgroupHandle};

#[derive(Debug, Error)]
pub enum RadicalError {
    #[error("ambient action is not certified general type at the radius: {0}")]
    HypothesisFail(String),
    #[error("subgroup is not elliptic at the truncation: orbit diameter {diameter}")]
    NotElliptic { diameter: f64 },
    #[error("subgroup is not normal: conjugate of a probe element left it")]
    NotNormal,
    #[error(transparent)]
    Isometry(#[from] IsometryError),
    #[error(transparent)]
    Subgroup(#[from] SubgroupError),
}

#[derive(Clone, Debug)]
pub struct RadicalParams {
    pub search_radius: usize,
    /// Cap on subgroup probe elements.
    pub probe_bound: usize,
    pub probe_cap: usize,
    /// Orbit diameter below which a probe set counts as elliptic evidence.
    pub elliptic_bound: f64,
    /// Minimum number of sampled limit points.
    pub min_limit_samples: usize,
}

impl Default for RadicalParams {
    fn default() -> Self {
        RadicalParams {
            search_radius: 4,
            probe_bound: 6,
            probe_cap: 64,
            elliptic_bound: 3.0,
            min_limit_samples: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MaximalityProbe {
    pub description: String,
    pub is_normal: bool,
    pub is_elliptic: bool,
    pub contained_in_candidate: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RadicalVerdict {
    /// Every candidate probe element fixes every sampled limit point.
    pub fixes_limit_set: bool,
    pub limit_samples: usize,
    pub normal_ok: bool,
    pub orbit_diameter: f64,
    pub elliptic_ok: bool,
    pub maximality: Vec<MaximalityProbe>,
    pub general_type_radius: usize,
}

fn sampled_limit_points<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    radius: usize,
    minimum: usize,
) -> Result<Vec<M::Boundary>, IsometryError> {
    let mut out: Vec<M::Boundary> = Vec::new();
    let mut radius = radius;
    loop {
        out.clear();
        let mut seen = std::collections::BTreeSet::new();
        for (_, plus, minus) in loxodromic_fixed_points_in_ball(m, gens, radius)? {
            for b in [plus, minus] {
                if seen.insert(b.clone()) {
                    out.push(b);
                }
            }
        }
        for s in m.boundary_sentinels() {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
        if out.len() >= minimum || radius > 8 {
            return Ok(out);
        }
        radius += 1;
    }
}

fn subgroup_orbit_diameter<M: ModelSpace>(m: &M, probes: &[M::Elem]) -> f64 {
    let base = m.basepoint();
    let orbit: Vec<M::Point> = probes.iter().map(|h| m.apply(h, &base)).collect();
    let mut diameter = M::Scalar::zero();
    for i in 0..orbit.len() {
        for j in (i + 1)..orbit.len() {
            diameter = smax(diameter, m.distance(&orbit[i], &orbit[j]));
        }
    }
    diameter.to_f64()
}

fn sampled_normality<M: ModelSpace>(
    m: &M,
    handle: &SubgroupHandle<M>,
    probes: &[M::Elem],
    conjugators: &[M::Elem],
) -> Result<bool, SubgroupError> {
    for g in conjugators {
        for h in probes {
            if !handle.contains(m, &m.conjugate(h, g))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Verify a candidate for the elliptic radical of a general type action:
/// limit-set fixing on a dense sample, sampled normality, ellipticity at
/// truncation, and a maximality probe against supplied rival handles.
pub fn radical_verify<M: ModelSpace>(
    m: &M,
    candidate: &SubgroupHandle<M>,
    gens: &[M::Elem],
    params: &RadicalParams,
    rivals: &[(String, SubgroupHandle<M>)],
) -> Result<RadicalVerdict, RadicalError> {
    let at = action_type(m, gens, &ActionTypeParams::new(params.search_radius))
        .map_err(|e| RadicalError::HypothesisFail(e.to_string()))?;
    if !at.verdict.is_general_type() {
        return Err(RadicalError::HypothesisFail(format!(
            "action classified {} at radius {}",
            at.verdict.kind_name(),
            params.search_radius
        )));
    }
    let limit_points =
        sampled_limit_points(m, gens, params.search_radius, params.min_limit_samples)?;
    let probes = candidate.probe_elements(m, params.probe_bound, params.probe_cap);
    let fixes_limit_set = probes
        .iter()
        .all(|h| limit_points.iter().all(|b| m.boundary_action(h, b) == *b));
    let conjugators: Vec<M::Elem> = ball_elements(m, gens, params.search_radius)
        .into_iter()
        .map(|e| e.elem)
        .collect();
    let normal_ok = sampled_normality(m, candidate, &probes, &conjugators)?;
    let orbit_diameter = subgroup_orbit_diameter(m, &probes);
    let elliptic_ok = orbit_diameter <= params.elliptic_bound + m.tolerance();
    let mut maximality = Vec::new();
    for (description, rival) in rivals {
        let rprobes = rival.probe_elements(m, params.probe_bound, params.probe_cap);
        let is_normal = sampled_normality(m, rival, &rprobes, &conjugators)?;
        let rdiam = subgroup_orbit_diameter(m, &rprobes);
        let is_elliptic = rdiam <= params.elliptic_bound + m.tolerance();
        let contained_in_candidate = if is_normal && is_elliptic {
            let mut contained = true;
            for h in &rprobes {
                if !candidate.contains(m, h)? {
                    contained = false;
                    break;
                }
            }
            Some(contained)
        } else {
            None
        };
        maximality.push(MaximalityProbe {
            description: description.clone(),
            is_normal,
            is_elliptic,
            contained_in_candidate,
        });
    }
    Ok(RadicalVerdict {
        fixes_limit_set,
        limit_samples: limit_points.len(),
        normal_ok,
        orbit_diameter,
        elliptic_ok,
        maximality,
        general_type_radius: params.search_radius,
    })
}

#[derive(Clone, Debug)]
pub struct NormalEllipticReport {
    /// Orbit diameter of the probe set, the displacement bound D.
    pub displacement_bound: f64,
    pub sequences_checked: usize,
    /// Every probe element fixes every sampled limit sequence.
    pub all_limit_points_fixed: bool,
}

/// The argument that a normal elliptic subgroup fixes the whole limit set,
/// made executable: along every sampled approach sequence (gᵢs), the
/// displacement d(a·gᵢs, gᵢs) = d(gᵢ⁻¹agᵢ·s, s) stays within the orbit
/// diameter, so the bounded-distance fast path certifies a·x = x.
pub fn normal_elliptic_implies_radical<M: ModelSpace>(
    m: &M,
    n_handle: &SubgroupHandle<M>,
    gens: &[M::Elem],
    params: &RadicalParams,
    n_max: usize,
    threshold: M::Scalar,
) -> Result<NormalEllipticReport, RadicalError> {
    let probes = n_handle.probe_elements(m, params.probe_bound, params.probe_cap);
    let conjugators: Vec<M::Elem> = ball_elements(m, gens, params.search_radius)
        .into_iter()
        .map(|e| e.elem)
        .collect();
    if !sampled_normality(m, n_handle, &probes, &conjugators)? {
        return Err(RadicalError::NotNormal);
    }
    let diameter = subgroup_orbit_diameter(m, &probes);
    if diameter > params.elliptic_bound + m.tolerance() {
        return Err(RadicalError::NotElliptic { diameter });
    }
    // Approach sequences from loxodromics of the ambient group.
    let loxos = loxodromic_fixed_points_in_ball(m, gens, params.search_radius)?;
    let base = m.basepoint();
    let conv = ConvergenceParams {
        burn_in: n_max / 2,
        // The proof's bound: displacements stay within the orbit diameter.
        fast_path_bound: Some(smax(
            threshold,
            M::Scalar::from_int(diameter.ceil() as i64 + 1),
        )),
    };
    let mut checked = 0;
    let mut all_fixed = true;
    for (g, _, _) in loxos.iter().take(8) {
        let mut seq = Vec::with_capacity(n_max + 1);
        let mut x = base.clone();
        for _ in 0..=n_max {
            seq.push(x.clone());
            x = m.apply(g, &x);
        }
        for a in &probes {
            let moved: Vec<M::Point> = seq.iter().map(|p| m.apply(a, p)).collect();
            checked += 1;
            match same_boundary_point(m, &moved, &seq, &base, threshold, &conv) {
                Ok(true) => {}
                _ => all_fixed = false,
            }
        }
    }
    Ok(NormalEllipticReport {
        displacement_bound: diameter,
        sequences_checked: checked,
        all_limit_points_fixed: all_fixed,
    })
}

/// One step of the strictly increasing chain of normal elliptic subgroups.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub k: i64,
    pub handle: SubgroupHandle<LamplighterModel>,
    /// Exact orbit diameter of the basepoint orbit, 2k.
    pub orbit_diameter: i64,
    /// Generator of the next step outside this one.
    pub strictness_witness: LampElem,
    pub witness_outside: bool,
    pub normal_ok: bool,
}

#[derive(Clone, Debug)]
pub struct EllipticChain {
    pub steps: Vec<ChainStep>,
    /// Certificate that the ambient lamp group acts parabolically at the
    /// truncation: unbounded orbit, no loxodromics in the ball.
    pub parabolic: ActionTypeReport<LamplighterModel>,
}

/// The chain N_k = ⟨a_{−k}, …, a_k⟩ of normal elliptic subgroups of the
/// infinite lamp group, strictly increasing with orbit diameters exactly
/// 2k: no maximal normal elliptic subgroup exists for this parabolic
/// action.
pub fn lamplighter_no_maximal(
    m: &LamplighterModel,
    chain_length: usize,
) -> Result<EllipticChain, RadicalError> {
    assert!(chain_length >= 1, "need at least one chain step");
    let k_max = chain_length as i64;
    let mut steps = Vec::with_capacity(chain_length);
    for k in 1..=k_max {
        let handle = SubgroupHandle::LampInterval { lo: -k, hi: k };
        // diam of the orbit: d((f,0)v₀, (h,0)v₀) = d(v₀, (f⊕h)v₀), maximal
        // when the lowest lamp sits at −k: exactly 2k.
        let witness_elem = LampElem::lamp(-k);
        let orbit_diameter = m
            .distance(&m.basepoint(), &m.apply(&witness_elem, &m.basepoint()))
            .to_f64() as i64;
        // Normality in the abelian ambient group: conjugation by the lamp
        // generators is trivial; verified exactly on a window of them.
        let mut normal_ok = true;
        for i in (-k - 2)..=(k + 2) {
            let a_i = LampElem::lamp(i);
            let conj = handle.conjugated(m, &a_i)?;
            if conj != handle {
                normal_ok = false;
            }
            for j in (-k - 2)..=(k + 2) {
                let a_j = LampElem::lamp(j);
                if a_i.mul(&a_j) != a_j.mul(&a_i) {
                    normal_ok = false;
                }
            }
        }
        let strictness_witness = LampElem::lamp(-(k + 1));
        let witness_outside = !handle.contains(m, &strictness_witness)?;
        steps.push(ChainStep {
            k,
            handle,
            orbit_diameter,
            strictness_witness,
            witness_outside,
            normal_ok,
        });
    }
    // The ambient group at truncation: lamps on [−K, K].
    let gens: Vec<LampElem> = (-k_max..=k_max).map(LampElem::lamp).collect();
    let parabolic = action_type(m, &gens, &ActionTypeParams::new(3))?;
    Ok(EllipticChain { steps, parabolic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::ActionVerdict;
    use crate::mat2::Mat2;
    use crate::models::free::FreeGroupModel;
    use crate::models::half_plane::HalfPlaneModel;
    use crate::word::Word;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn free_trivial_radical() {
        let m = FreeGroupModel::new(2);
        let candidate = SubgroupHandle::trivial(&m);
        let v = radical_verify(&m, &candidate, &m.standard_generators(), &RadicalParams::default(), &[])
            .unwrap();
        assert!(v.fixes_limit_set);
        assert!(v.normal_ok);
        assert!(v.elliptic_ok);
        assert!(v.limit_samples >= 20);
    }

    #[test]
    fn free_cyclic_is_not_radical() {
        let m = FreeGroupModel::new(2);
        let candidate: SubgroupHandle<FreeGroupModel> = SubgroupHandle::Cyclic(w("a"));
        let v = radical_verify(&m, &candidate, &m.standard_generators(), &RadicalParams::default(), &[])
            .unwrap();
        assert!(!v.fixes_limit_set, "a moves b^∞");
    }

    #[test]
    fn half_plane_center_is_radical() {
        let m = HalfPlaneModel::new();
        let neg_i = Mat2::identity().neg();
        let candidate = SubgroupHandle::finite_set(&m, vec![Mat2::identity(), neg_i]);
        let v = radical_verify(&m, &candidate, &m.standard_generators(), &RadicalParams::default(), &[])
            .unwrap();
        assert!(v.fixes_limit_set);
        assert!(v.normal_ok);
        assert!(v.elliptic_ok);
    }

    #[test]
    fn rotation_subgroup_fails_normality() {
        let m = HalfPlaneModel::new();
        let s = Mat2::s();
        let candidate = SubgroupHandle::finite_set(
            &m,
            vec![Mat2::identity(), s.clone(), s.pow(2), s.pow(3)],
        );
        let params = RadicalParams::default();
        let err = normal_elliptic_implies_radical(
            &m,
            &candidate,
            &m.standard_generators(),
            &params,
            20,
            3.0,
        )
        .unwrap_err();
        assert!(matches!(err, RadicalError::NotNormal));
    }

    #[test]
    fn center_passes_normal_elliptic_argument() {
        let m = HalfPlaneModel::new();
        let neg_i = Mat2::identity().neg();
        let candidate = SubgroupHandle::finite_set(&m, vec![Mat2::identity(), neg_i]);
        let report = normal_elliptic_implies_radical(
            &m,
            &candidate,
            &m.standard_generators(),
            &RadicalParams::default(),
            24,
            3.0,
        )
        .unwrap();
        assert!(report.all_limit_points_fixed);
        assert!(report.sequences_checked > 0);
    }

    #[test]
    fn free_kernel_fails_ellipticity() {
        let m = FreeGroupModel::new(2);
        // Index-2 kernel: unbounded orbit.
        use crate::subgroups::CosetTable;
        let handle: SubgroupHandle<FreeGroupModel> =
            SubgroupHandle::CosetTable(CosetTable::new(vec![vec![1, 0], vec![1, 0]], 0));
        let err = normal_elliptic_implies_radical(
            &m,
            &handle,
            &m.standard_generators(),
            &RadicalParams::default(),
            20,
            num_rational::Rational64::from_integer(5),
        )
        .unwrap_err();
        assert!(matches!(err, RadicalError::NotElliptic { .. }));
    }

    #[test]
    fn lamp_chain_small() {
        let m = LamplighterModel::new();
        let chain = lamplighter_no_maximal(&m, 3).unwrap();
        assert_eq!(chain.steps.len(), 3);
        for (i, step) in chain.steps.iter().enumerate() {
            assert_eq!(step.k, i as i64 + 1);
            assert_eq!(step.orbit_diameter, 2 * step.k);
            assert!(step.witness_outside);
            assert!(step.normal_ok);
        }
        assert!(matches!(
            chain.parabolic.verdict,
            ActionVerdict::Parabolic { .. }
        ));
        assert_eq!(chain.parabolic.loxodromic_count, 0);
    }
}
