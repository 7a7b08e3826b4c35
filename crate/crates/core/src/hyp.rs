//! Model-independent hyperbolic-metric primitives: Gromov products, the
//! four-point condition, and truncated convergence-at-infinity tests.
//!
//! Limits over index pairs are replaced throughout by "all tail pairs beyond
//! a burn-in exceed a threshold", which makes every boundary statement
//! decidable at desk scale; burn-in and threshold are explicit parameters.

use thiserror::Error;

use crate::model::ModelSpace;
use crate::scalar::{smax, smin, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypError {
    #[error("sequence {0} does not converge at infinity at the given truncation")]
    NotConvergent(&'static str),
}

/// Gromov product of two points with respect to a third.
#[derive(Clone, Debug)]
pub struct GromovProduct<M: ModelSpace> {
    pub value: M::Scalar,
    pub basepoint: M::Point,
}

/// (x, y)_z = ½(d(x,z) + d(y,z) − d(x,y)).
pub fn gromov_product<M: ModelSpace>(
    m: &M,
    x: &M::Point,
    y: &M::Point,
    z: &M::Point,
) -> GromovProduct<M> {
    let value = (m.distance(x, z) + m.distance(y, z) - m.distance(x, y)).half();
    GromovProduct {
        value,
        basepoint: z.clone(),
    }
}

/// Raw Gromov product value.
pub fn gp<M: ModelSpace>(m: &M, x: &M::Point, y: &M::Point, z: &M::Point) -> M::Scalar {
    gromov_product(m, x, y, z).value
}

/// Result of probing the four-point condition on a sample of quadruples.
#[derive(Clone, Debug)]
pub struct HyperbolicityEstimate<M: ModelSpace> {
    /// Maximum over tested quadruples of min{(x,y)_t,(y,z)_t} − (x,z)_t,
    /// clamped below at zero.
    pub delta_hat: M::Scalar,
    pub samples: usize,
    /// Quadruple attaining the maximal positive defect, if any.
    pub max_violation_witness: Option<[M::Point; 4]>,
    /// Number of quadruples violating the bound for the supplied delta.
    pub violations: usize,
}

/// Check (x,z)_t ≥ min{(x,y)_t, (y,z)_t} − 8·delta on every quadruple.
/// Violations are reported as data, never as a crash.
pub fn four_point_check<M: ModelSpace>(
    m: &M,
    quadruples: &[[M::Point; 4]],
    delta: M::Scalar,
) -> HyperbolicityEstimate<M> {
    assert!(delta >= M::Scalar::zero(), "delta must be nonnegative");
    let tol = m.tolerance();
    let eight_delta = {
        let mut acc = M::Scalar::zero();
        for _ in 0..8 {
            acc = acc + delta;
        }
        acc
    };
    let mut delta_hat = M::Scalar::zero();
    let mut witness = None;
    let mut violations = 0;
    for quad in quadruples {
        let [x, y, z, t] = quad;
        let lhs = gp(m, x, z, t);
        let rhs = smin(gp(m, x, y, t), gp(m, y, z, t));
        let defect = rhs - lhs;
        if defect > delta_hat {
            delta_hat = defect;
            witness = Some(quad.clone());
        }
        if defect.gt_margin(eight_delta, tol) {
            violations += 1;
        }
    }
    HyperbolicityEstimate {
        delta_hat: smax(delta_hat, M::Scalar::zero()),
        samples: quadruples.len(),
        max_violation_witness: witness,
        violations,
    }
}

/// Truncation parameters for boundary-convergence checks.
#[derive(Clone, Debug)]
pub struct ConvergenceParams<S> {
    /// Indices below this are ignored.
    pub burn_in: usize,
    /// Bound for the bounded-distance fast path of same-boundary tests;
    /// defaults to the threshold itself.
    pub fast_path_bound: Option<S>,
}

impl<S> Default for ConvergenceParams<S> {
    fn default() -> Self {
        ConvergenceParams {
            burn_in: 10,
            fast_path_bound: None,
        }
    }
}

/// Verdict of a truncated convergence test.
#[derive(Clone, Debug)]
pub struct ConvergenceVerdict<M: ModelSpace> {
    pub converges: bool,
    /// Gromov product per examined index pair.
    pub product_trajectory: Vec<((usize, usize), M::Scalar)>,
    pub threshold: M::Scalar,
}

/// Evaluate (x_i, x_j)_base over all tail pairs; converges iff all exceed
/// the threshold. The burn-in is clamped so at least one pair is examined.
pub fn converges_at_infinity<M: ModelSpace>(
    m: &M,
    seq: &[M::Point],
    base: &M::Point,
    threshold: M::Scalar,
    params: &ConvergenceParams<M::Scalar>,
) -> ConvergenceVerdict<M> {
    assert!(seq.len() >= 2, "need at least two points");
    let start = params.burn_in.min(seq.len() - 2);
    let mut trajectory = Vec::new();
    let mut converges = true;
    for i in start..seq.len() {
        for j in (i + 1)..seq.len() {
            let v = gp(m, &seq[i], &seq[j], base);
            if !(v > threshold) {
                converges = false;
            }
            trajectory.push(((i, j), v));
        }
    }
    ConvergenceVerdict {
        converges,
        product_trajectory: trajectory,
        threshold,
    }
}

/// Whether two convergent sequences define the same boundary point at the
/// given truncation: either their pointwise distances stay bounded (the
/// bounded-distance fast path) or every cross Gromov product over tail pairs
/// exceeds the threshold.
pub fn same_boundary_point<M: ModelSpace>(
    m: &M,
    seq_a: &[M::Point],
    seq_b: &[M::Point],
    base: &M::Point,
    threshold: M::Scalar,
    params: &ConvergenceParams<M::Scalar>,
) -> Result<bool, HypError> {
    if !converges_at_infinity(m, seq_a, base, threshold, params).converges {
        return Err(HypError::NotConvergent("first"));
    }
    if !converges_at_infinity(m, seq_b, base, threshold, params).converges {
        return Err(HypError::NotConvergent("second"));
    }
    let common = seq_a.len().min(seq_b.len());
    let start_fast = params.burn_in.min(common.saturating_sub(1));
    let fast_bound = params.fast_path_bound.unwrap_or(threshold);
    let fast = (start_fast..common).all(|i| {
        m.distance(&seq_a[i], &seq_b[i])
            .le_tol(fast_bound, m.tolerance())
    });
    if fast {
        return Ok(true);
    }
    let sa = params.burn_in.min(seq_a.len() - 1);
    let sb = params.burn_in.min(seq_b.len() - 1);
    for i in sa..seq_a.len() {
        for j in sb..seq_b.len() {
            if !(gp(m, &seq_a[i], &seq_b[j], base) > threshold) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
