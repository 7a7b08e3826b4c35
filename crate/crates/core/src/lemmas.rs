//! Executable forms of the quantitative loxodromicity lemmas: the
//! displacement criterion, the distance-doubling estimate, the commutator
//! construction, and conjugate-sequence convergence.
//!
//! Each verifier distinguishes "premises fail" from "conclusion fails":
//! only the latter falsifies a lemma. Constants are computed a posteriori
//! as maxima over the tested range, the tightest checkable bounds.

use thiserror::Error;

use crate::hyp::{gp, same_boundary_point, ConvergenceParams, HypError};
use crate::isometry::{fixed_points, DEFAULT_ORBIT_BUDGET};
use crate::model::ModelSpace;
use crate::scalar::{smax, smin, Scalar};

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error("the base element is not loxodromic")]
    NotLoxodromic,
    #[error("the companion element fixes the attracting fixed point")]
    FixesAttractor,
    #[error("the companion element fixes a fixed point required to move")]
    HypothesisFail,
    #[error("displacement premises never certified up to n = {0}")]
    NotFoundWithin(usize),
    #[error(transparent)]
    Hyp(#[from] HypError),
    #[error(transparent)]
    Classify(#[from] crate::isometry::ClassifyError),
}

/// Data for the displacement criterion: two elements, two points, and the
/// displacement bound C.
#[derive(Clone, Debug)]
pub struct DisplacementWitness<M: ModelSpace> {
    pub a: M::Elem,
    pub b: M::Elem,
    pub x: M::Point,
    pub y: M::Point,
    pub c: M::Scalar,
}

#[derive(Clone, Debug)]
pub struct DisplacementVerdict {
    /// C > 0, as the criterion requires.
    pub c_positive: bool,
    /// max{d(x,ax), d(y,by)} ≤ C, within tolerance.
    pub premise_max_holds: bool,
    /// min{d(x,bx), d(y,ay)} ≥ d(x,y) + 3C, within tolerance.
    pub premise_min_holds: bool,
    /// All premises hold with a strict tolerance margin (equal to the
    /// lenient check on exact models).
    pub premises_strict: bool,
    pub conclusion_loxodromic: bool,
    /// The implication "premises ⇒ ab loxodromic"; vacuously true when the
    /// premises fail.
    pub implication_ok: bool,
    pub product_class: &'static str,
}

impl DisplacementVerdict {
    pub fn premises_hold(&self) -> bool {
        self.c_positive && self.premise_max_holds && self.premise_min_holds
    }
}

/// Verify both premise inequalities and independently confirm the
/// conclusion by classifying ab. All outcomes are data.
pub fn check_displacement_criterion<M: ModelSpace>(
    m: &M,
    w: &DisplacementWitness<M>,
) -> Result<DisplacementVerdict, LemmaError> {
    let tol = m.tolerance();
    let d_xax = m.distance(&w.x, &m.apply(&w.a, &w.x));
    let d_yby = m.distance(&w.y, &m.apply(&w.b, &w.y));
    let d_xbx = m.distance(&w.x, &m.apply(&w.b, &w.x));
    let d_yay = m.distance(&w.y, &m.apply(&w.a, &w.y));
    let d_xy = m.distance(&w.x, &w.y);
    let three_c = w.c + w.c + w.c;
    let max_side = smax(d_xax, d_yby);
    let min_side = smin(d_xbx, d_yay);
    let rhs = d_xy + three_c;
    // The criterion requires a strictly positive bound C.
    let c_positive = w.c > M::Scalar::zero();
    let premise_max_holds = max_side.le_tol(w.c, tol);
    let premise_min_holds = min_side.ge_tol(rhs, tol);
    let premises_strict = if M::Scalar::is_exact() {
        c_positive && premise_max_holds && premise_min_holds
    } else {
        c_positive && max_side.le_tol(w.c, -tol) && min_side.ge_tol(rhs, -tol)
    };
    let ab = m.mul(&w.a, &w.b);
    let class = m.classify(&ab, DEFAULT_ORBIT_BUDGET)?;
    let conclusion_loxodromic = class.is_loxodromic();
    Ok(DisplacementVerdict {
        c_positive,
        premise_max_holds,
        premise_min_holds,
        premises_strict,
        conclusion_loxodromic,
        implication_ok: !premises_strict || conclusion_loxodromic,
        product_class: class.kind_name(),
    })
}

#[derive(Clone, Debug)]
pub struct DoublingRow<M: ModelSpace> {
    pub n: usize,
    /// d(f·gⁿs, gⁿs)
    pub displacement: M::Scalar,
    /// d(gⁿs, s)
    pub orbit_dist: M::Scalar,
    /// (f·gⁿs, gⁿs)_s
    pub product: M::Scalar,
}

#[derive(Clone, Debug)]
pub struct DoublingEstimate<M: ModelSpace> {
    /// Max Gromov product over the range; the uniform bound the lemma needs.
    pub c0: M::Scalar,
    /// D = d(fs, s) + 2·C₀.
    pub d_bound: M::Scalar,
    pub rows: Vec<DoublingRow<M>>,
    /// |d(f·gⁿs, gⁿs) − 2·d(gⁿs, s)| ≤ D for all rows, within tolerance.
    pub all_within: bool,
}

/// The distance-doubling estimate along the axis of g: for f not fixing
/// g⁺, d(f·gⁿs, gⁿs) tracks 2·d(gⁿs, s) up to the constant D.
pub fn doubling_estimate<M: ModelSpace>(
    m: &M,
    g: &M::Elem,
    f: &M::Elem,
    s: &M::Point,
    n_max: usize,
    ) -> Result<DoublingEstimate<M>, LemmaError> {
    let (g_plus, _) = fixed_points(m, g).map_err(|_| LemmaError::NotLoxodromic)?;
    if m.boundary_action(f, &g_plus) == g_plus {
        return Err(LemmaError::FixesAttractor);
    }
    let tol = m.tolerance();
    let mut rows: Vec<DoublingRow<M>> = Vec::with_capacity(n_max + 1);
    let mut c0 = M::Scalar::zero();
    let mut gn_s = s.clone();
    for n in 0..=n_max {
        let f_gn_s = m.apply(f, &gn_s);
        let displacement = m.distance(&f_gn_s, &gn_s);
        let orbit_dist = m.distance(&gn_s, s);
        let product = gp(m, &f_gn_s, &gn_s, s);
        c0 = smax(c0, product);
        rows.push(DoublingRow {
            n,
            displacement,
            orbit_dist,
            product,
        });
        gn_s = m.apply(g, &gn_s);
    }
    let d_fs_s = m.distance(&m.apply(f, s), s);
    let d_bound = d_fs_s + c0 + c0;
    let all_within = rows.iter().all(|r| {
        (r.displacement - (r.orbit_dist + r.orbit_dist))
            .abs()
            .le_tol(d_bound, tol)
    });
    Ok(DoublingEstimate {
        c0,
        d_bound,
        rows,
        all_within,
    })
}

#[derive(Clone, Debug)]
pub struct CommutatorRow<M: ModelSpace> {
    pub n: usize,
    pub premises_hold: bool,
    pub commutator_class: &'static str,
    pub displacement_witness: DisplacementWitness<M>,
}

#[derive(Clone, Debug)]
pub struct CommutatorCertificate<M: ModelSpace> {
    /// Least n at which the displacement premises certify.
    pub n0: usize,
    pub rows: Vec<CommutatorRow<M>>,
    /// [f, gⁿ] loxodromic for every checked n ≥ n0.
    pub loxodromic_from_n0: bool,
}

/// Find the least n₀ ≤ n_max at which the displacement witness
/// (a = f, b = gⁿf⁻¹g⁻ⁿ, x, y = gⁿx, C = d(fx, x)) certifies, and confirm
/// the commutator [f, gⁿ] = f·gⁿ·f⁻¹·g⁻ⁿ is loxodromic from there on.
pub fn loxodromic_commutator<M: ModelSpace>(
    m: &M,
    f: &M::Elem,
    g: &M::Elem,
    n_max: usize,
) -> Result<CommutatorCertificate<M>, LemmaError> {
    let (g_plus, g_minus) = fixed_points(m, g).map_err(|_| LemmaError::NotLoxodromic)?;
    if m.boundary_action(f, &g_plus) == g_plus || m.boundary_action(f, &g_minus) == g_minus {
        return Err(LemmaError::HypothesisFail);
    }
    // The lemma fixes an arbitrary basepoint; we pin it for determinism.
    let x = m.basepoint();
    let c = m.distance(&m.apply(f, &x), &x);
    let f_inv = m.inv(f);
    let mut rows: Vec<CommutatorRow<M>> = Vec::new();
    let mut n0 = None;
    let mut loxodromic_from_n0 = true;
    let mut g_pow = m.identity();
    for n in 1..=n_max {
        g_pow = m.mul(&g_pow, g);
        let witness = DisplacementWitness {
            a: f.clone(),
            b: m.mul(&m.mul(&g_pow, &f_inv), &m.inv(&g_pow)),
            x: x.clone(),
            y: m.apply(&g_pow, &x),
            c,
        };
        let verdict = check_displacement_criterion(m, &witness)?;
        let premises = verdict.premises_strict;
        let class = verdict.product_class;
        // ab = f · gⁿf⁻¹g⁻ⁿ = [f, gⁿ], exactly the commutator.
        rows.push(CommutatorRow {
            n,
            premises_hold: premises,
            commutator_class: class,
            displacement_witness: witness,
        });
        if premises && n0.is_none() {
            n0 = Some(n);
        }
        if n0.is_some() && !verdict.conclusion_loxodromic {
            loxodromic_from_n0 = false;
        }
    }
    match n0 {
        Some(n0) => Ok(CommutatorCertificate {
            n0,
            rows,
            loxodromic_from_n0,
        }),
        None => Err(LemmaError::NotFoundWithin(n_max)),
    }
}

#[derive(Clone, Debug)]
pub struct ConjugateRow<M: ModelSpace> {
    pub n: usize,
    /// 2·(h^{gⁿ}s, g⁻ⁿs)_s
    pub twice_product: M::Scalar,
    /// 2·d(s, gⁿs) − D − d(hs, s)
    pub lower_bound: M::Scalar,
}

#[derive(Clone, Debug)]
pub struct ConjugateConvergence<M: ModelSpace> {
    pub d_bound: M::Scalar,
    pub rows: Vec<ConjugateRow<M>>,
    /// The chain inequality holds on every row, within tolerance.
    pub inequality_ok: bool,
    /// (h^{gⁿ}s) and (g⁻ⁿs) are equivalent sequences at the truncation.
    pub sequences_equivalent: bool,
    /// The common limit is the repelling fixed point of g.
    pub converges_to_repelling: bool,
}

/// The conjugate-orbit convergence h^{gⁿ}s → g⁻: verifies the Gromov
/// product lower bound with D from the doubling estimate and confirms the
/// sequence equivalences at the truncation.
pub fn conjugate_convergence<M: ModelSpace>(
    m: &M,
    h: &M::Elem,
    g: &M::Elem,
    s: &M::Point,
    n_max: usize,
    threshold: M::Scalar,
    params: &ConvergenceParams<M::Scalar>,
) -> Result<ConjugateConvergence<M>, LemmaError> {
    let (g_plus, g_minus) = fixed_points(m, g).map_err(|_| LemmaError::NotLoxodromic)?;
    if m.boundary_action(h, &g_plus) == g_plus {
        return Err(LemmaError::FixesAttractor);
    }
    let doubling = doubling_estimate(m, g, h, s, n_max)?;
    let d_bound = doubling.d_bound;
    let tol = m.tolerance();
    let d_hs_s = m.distance(&m.apply(h, s), s);
    let g_inv = m.inv(g);
    let mut rows: Vec<ConjugateRow<M>> = Vec::with_capacity(n_max + 1);
    let mut conj_seq = Vec::with_capacity(n_max + 1);
    let mut back_seq = Vec::with_capacity(n_max + 1);
    let mut g_pow = m.identity();
    let mut g_neg = m.identity();
    for n in 0..=n_max {
        // h^{gⁿ} = g⁻ⁿ h gⁿ (the convention x^y = y⁻¹xy).
        let hgn = m.mul(&m.mul(&g_neg, h), &g_pow);
        let conj_pt = m.apply(&hgn, s);
        let back_pt = m.apply(&g_neg, s);
        let twice_product = {
            let p = gp(m, &conj_pt, &back_pt, s);
            p + p
        };
        let orbit = m.distance(s, &m.apply(&g_pow, s));
        let lower_bound = orbit + orbit - d_bound - d_hs_s;
        rows.push(ConjugateRow {
            n,
            twice_product,
            lower_bound,
        });
        conj_seq.push(conj_pt);
        back_seq.push(back_pt);
        g_pow = m.mul(&g_pow, g);
        g_neg = m.mul(&g_neg, &g_inv);
    }
    let inequality_ok = rows
        .iter()
        .all(|r| r.twice_product.ge_tol(r.lower_bound, tol));
    let sequences_equivalent =
        same_boundary_point(m, &conj_seq, &back_seq, s, threshold, params)?;
    let approach = m.boundary_approach(&g_minus, n_max + 1);
    let converges_to_repelling =
        same_boundary_point(m, &conj_seq, &approach, s, threshold, params)?;
    Ok(ConjugateConvergence {
        d_bound,
        rows,
        inequality_ok,
        sequences_equivalent,
        converges_to_repelling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::free::FreeGroupModel;
    use crate::word::Word;
    use num_rational::Rational64;

    fn m() -> FreeGroupModel {
        FreeGroupModel::new(2)
    }

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn rat(v: i64) -> Rational64 {
        Rational64::from_integer(v)
    }

    #[test]
    fn displacement_criterion_tree_example() {
        // a = b, b = a⁴·b⁻¹·a⁻⁴, x = 1, y = a⁴: the conjugate moves the far
        // point by 1 and the basepoint by 9, so the premises certify with
        // C = 1 and the product is loxodromic.
        let m = m();
        let witness = DisplacementWitness {
            a: w("b"),
            b: w("aaaa").mul(&w("B")).mul(&w("AAAA")),
            x: Word::identity(),
            y: w("aaaa"),
            c: rat(1),
        };
        let v = check_displacement_criterion(&m, &witness).unwrap();
        assert!(v.premises_hold());
        assert!(v.premises_strict);
        assert!(v.conclusion_loxodromic);
        assert!(v.implication_ok);
    }

    #[test]
    fn displacement_criterion_degenerate_premises() {
        let m = m();
        let witness = DisplacementWitness {
            a: Word::identity(),
            b: Word::identity(),
            x: Word::identity(),
            y: w("a"),
            c: rat(0),
        };
        let v = check_displacement_criterion(&m, &witness).unwrap();
        assert!(v.premise_max_holds);
        assert!(!v.premise_min_holds);
        assert!(v.implication_ok, "vacuous implication");
        assert!(!v.conclusion_loxodromic);
    }

    #[test]
    fn doubling_exact_on_the_tree() {
        // d(b·aⁿ, aⁿ) = 2n+1 exactly; C₀ = 0 and D = 1.
        let m = m();
        let est = doubling_estimate(&m, &w("a"), &w("b"), &Word::identity(), 40).unwrap();
        assert_eq!(est.c0, rat(0));
        assert_eq!(est.d_bound, rat(1));
        assert!(est.all_within);
        for row in &est.rows {
            assert_eq!(row.displacement, rat(2 * row.n as i64 + 1));
            assert_eq!(row.orbit_dist, rat(row.n as i64));
        }
    }

    #[test]
    fn doubling_rejects_attractor_stabilizer() {
        let m = m();
        let err = doubling_estimate(&m, &w("a"), &w("a"), &Word::identity(), 10).unwrap_err();
        assert!(matches!(err, LemmaError::FixesAttractor));
        // Powers of a share the fixed point too.
        let err = doubling_estimate(&m, &w("a"), &w("aa"), &Word::identity(), 10).unwrap_err();
        assert!(matches!(err, LemmaError::FixesAttractor));
    }

    #[test]
    fn commutator_certificate_free() {
        let m = m();
        let cert = loxodromic_commutator(&m, &w("b"), &w("a"), 20).unwrap();
        assert!(cert.n0 <= 20);
        assert!(cert.loxodromic_from_n0);
        // [b, aⁿ] = b aⁿ b⁻¹ a⁻ⁿ is cyclically reduced of length 2n+2.
        for row in &cert.rows {
            assert_eq!(row.commutator_class, "loxodromic");
        }
    }

    #[test]
    fn commutator_hypothesis_gate() {
        let m = m();
        let err = loxodromic_commutator(&m, &w("a"), &w("a"), 10).unwrap_err();
        assert!(matches!(err, LemmaError::HypothesisFail));
    }

    #[test]
    fn conjugate_convergence_on_tree() {
        let m = m();
        let params = ConvergenceParams {
            burn_in: 8,
            fast_path_bound: None,
        };
        let out =
            conjugate_convergence(&m, &w("b"), &w("a"), &Word::identity(), 30, rat(5), &params)
                .unwrap();
        assert!(out.inequality_ok);
        assert!(out.sequences_equivalent);
        assert!(out.converges_to_repelling);
        // (a⁻ⁿ b aⁿ, a⁻ⁿ)_1 = n exactly.
        for row in &out.rows {
            assert_eq!(row.twice_product, rat(2 * row.n as i64));
        }
    }

    #[test]
    fn conjugate_convergence_gate() {
        let m = m();
        let params = ConvergenceParams::default();
        let err = conjugate_convergence(
            &m,
            &w("a"),
            &w("a"),
            &Word::identity(),
            10,
            rat(5),
            &params,
        )
        .unwrap_err();
        assert!(matches!(err, LemmaError::FixesAttractor));
    }
}
