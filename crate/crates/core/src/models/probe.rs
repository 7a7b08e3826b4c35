//! Empirical acylindricity probe: for sampled point pairs at distance at
//! least R, count the word-ball elements moving both points by at most ε.
//! The probe reports data; it never asserts a verdict about the action.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ball_elements, ModelSpace};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ProbeError {
    #[error("could not sample point pairs at distance >= {r} after {attempts} attempts")]
    NoPairsFound { r: f64, attempts: usize },
}

#[derive(Clone, Debug)]
pub struct AcylindricityReport<M: ModelSpace> {
    pub epsilon: f64,
    pub r: f64,
    /// Max count over sampled pairs of ball elements ε-fixing both points.
    pub n_observed: usize,
    /// Pairs attaining the maximum (capped).
    pub witnesses: Vec<(M::Point, M::Point)>,
    pub pairs_sampled: usize,
    pub ball_size: usize,
}

pub fn acylindricity_probe<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    epsilon: f64,
    r: f64,
    sample_pairs: usize,
    element_radius: usize,
    seed: u64,
) -> Result<AcylindricityReport<M>, ProbeError> {
    assert!(epsilon >= 0.0 && r > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = ball_elements(m, gens, element_radius);
    let tol = m.tolerance();
    // Sample pairs at distance >= R; scale the sampling window with R.
    let size = ((r.ceil() as u32).max(2) * 2).min(64);
    let mut pairs: Vec<(M::Point, M::Point)> = Vec::with_capacity(sample_pairs);
    let mut attempts = 0;
    while pairs.len() < sample_pairs {
        attempts += 1;
        if attempts > 200 * sample_pairs.max(1) {
            if pairs.is_empty() {
                return Err(ProbeError::NoPairsFound { r, attempts });
            }
            break;
        }
        let x = m.sample_point(&mut rng, size);
        let y = m.sample_point(&mut rng, size);
        if m.distance(&x, &y).to_f64() >= r {
            pairs.push((x, y));
        }
    }
    let mut n_observed = 0;
    let mut witnesses: Vec<(M::Point, M::Point)> = Vec::new();
    for (x, y) in &pairs {
        let count = ball
            .iter()
            .filter(|el| {
                m.distance(x, &m.apply(&el.elem, x)).to_f64() <= epsilon + tol
                    && m.distance(y, &m.apply(&el.elem, y)).to_f64() <= epsilon + tol
            })
            .count();
        if count > n_observed {
            n_observed = count;
            witnesses.clear();
        }
        if count == n_observed && witnesses.len() < 4 {
            witnesses.push((x.clone(), y.clone()));
        }
    }
    Ok(AcylindricityReport {
        epsilon,
        r,
        n_observed,
        witnesses,
        pairs_sampled: pairs.len(),
        ball_size: ball.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::free::FreeGroupModel;
    use crate::models::lamplighter::LamplighterModel;
    use crate::model::ModelSpace;

    #[test]
    fn free_action_with_zero_epsilon_sees_only_identity() {
        let m = FreeGroupModel::new(2);
        let report =
            acylindricity_probe(&m, &m.standard_generators(), 0.0, 4.0, 40, 4, 42).unwrap();
        // The action is free: only the identity fixes two distinct points.
        assert_eq!(report.n_observed, 1);
    }

    #[test]
    fn free_action_stable_counts_as_r_grows() {
        let m = FreeGroupModel::new(2);
        let gens = m.standard_generators();
        let at_20 = acylindricity_probe(&m, &gens, 2.0, 20.0, 30, 5, 42).unwrap();
        let at_40 = acylindricity_probe(&m, &gens, 2.0, 40.0, 30, 5, 43).unwrap();
        assert!(at_40.n_observed <= at_20.n_observed.max(3));
    }

    #[test]
    fn lamplighter_counts_grow_with_pattern_freedom() {
        let m = LamplighterModel::new();
        let gens: Vec<_> = (-4..=4).map(crate::lamp::LampElem::lamp).collect();
        let report = acylindricity_probe(&m, &gens, 2.0, 6.0, 20, 2, 42).unwrap();
        // Many lamp elements fix deep pairs: the count exceeds the identity.
        assert!(report.n_observed >= 2, "observed {}", report.n_observed);
    }

    #[test]
    fn unreachable_distance_errors() {
        let m = FreeGroupModel::new(2);
        let err =
            acylindricity_probe(&m, &m.standard_generators(), 0.0, 1.0e6, 5, 2, 1).unwrap_err();
        assert!(matches!(err, ProbeError::NoPairsFound { .. }));
    }
}
