//! Deterministic experiment driver: seeded witness generators, the lemma
//! and radical suites, and the dichotomy harness classifying every atom of
//! a stabilizer IRS as geometrically dense or inside the elliptic radical.
//!
//! Every run is a pure function of its configuration; all randomness flows
//! from the single seed, and reports use only ordered collections.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyp::ConvergenceParams;
use crate::irs::{
    canonical_probe, random_transitive_action, stabilizer_irs, verify_ergodicity,
    verify_invariance, FiniteAction, IrsMeasure,
};
use crate::isometry::{
    action_type, fixed_points, limit_set_handle, loxodromic_fixed_points_in_ball,
    ActionTypeParams, IsometryClass, DEFAULT_ORBIT_BUDGET,
};
use crate::lamp::LampElem;
use crate::lemmas::{
    check_displacement_criterion, conjugate_convergence, doubling_estimate,
    loxodromic_commutator, DisplacementWitness, LemmaError,
};
use crate::mat2::Mat2;
use crate::model::ModelSpace;
use crate::models::free::FreeGroupModel;
use crate::models::half_plane::HalfPlaneModel;
use crate::models::lamplighter::LamplighterModel;
use crate::radical::{lamplighter_no_maximal, radical_verify, RadicalParams};
use crate::scalar::Scalar;
use crate::subgroups::{recurrence_check, RecurrenceStatus, SubgroupHandle, SubgroupIndex};
use crate::word::{ball, Word};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("precondition failed: {0}")]
    PreconditionFail(String),
    #[error(transparent)]
    Irs(#[from] crate::irs::IrsError),
    #[error(transparent)]
    Subgroup(#[from] crate::subgroups::SubgroupError),
    #[error(transparent)]
    Isometry(#[from] crate::isometry::IsometryError),
    #[error(transparent)]
    Radical(#[from] crate::radical::RadicalError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSelect {
    Free,
    HalfPlane,
    Lamplighter,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IrsSource {
    /// Seeded random transitive actions.
    SeededActions,
    /// Handcrafted Dirac measure at the trivial subgroup.
    DiracTrivial,
    /// Handcrafted non-invariant Dirac at a cyclic subgroup (rejected).
    DiracCyclic,
}

/// One configuration document drives every subcommand; unknown fields are
/// rejected so config files stay honest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSelect,
    pub rank: usize,
    pub seed: u64,
    /// Cylinder depth D for limit sets.
    pub depth: usize,
    /// Generation radius L for limit sets.
    pub limit_radius: usize,
    /// Word-ball radius for action censuses and boundary sampling.
    pub search_radius: usize,
    /// Orbit sweep bound for convergence statements.
    pub n_max: usize,
    /// Search bound N for recurrence checks.
    pub recurrence_bound: usize,
    /// Number of seeded IRS source actions.
    pub actions: usize,
    /// Maximum points of a seeded action.
    pub max_points: usize,
    pub irs_source: IrsSource,
    pub displacement_instances: usize,
    pub commutator_instances: usize,
    pub doubling_instances: usize,
    pub convergence_instances: usize,
    /// Chain length K for the radical suite.
    pub chain_length: usize,
    /// Convergence threshold (integer-valued for exactness across models).
    pub threshold: i64,
    pub burn_in: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSelect::Free,
            rank: 2,
            seed: 42,
            depth: 3,
            limit_radius: 14,
            search_radius: 3,
            n_max: 30,
            recurrence_bound: 24,
            actions: 50,
            max_points: 12,
            irs_source: IrsSource::SeededActions,
            displacement_instances: 500,
            commutator_instances: 200,
            doubling_instances: 100,
            convergence_instances: 50,
            chain_length: 8,
            threshold: 5,
            burn_in: 10,
        }
    }
}

impl ExperimentConfig {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn conv_params<S: Scalar>(&self) -> ConvergenceParams<S> {
        ConvergenceParams {
            burn_in: self.burn_in,
            fast_path_bound: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Seeded witness generators
// ---------------------------------------------------------------------------

/// Free-model displacement witness built from a conjugate at ping-pong
/// depth. Draws where the conjugator aligns with a power of a core letter
/// lose the depth to cancellation, so candidates are rejection-sampled
/// against the exact premises; the returned witness always certifies.
pub fn free_displacement_witness(
    m: &FreeGroupModel,
    rng: &mut ChaCha8Rng,
) -> DisplacementWitness<FreeGroupModel> {
    loop {
        let a_len = rng.random_range(1..=3);
        let a = m.random_word(rng, a_len);
        let inner_len = rng.random_range(1..=3);
        let inner = m.random_word(rng, inner_len);
        let c = a.len().max(inner.len()) as i64;
        let w_len = rng.random_range(5 * c as usize + 1..=5 * c as usize + 8);
        let w = m.random_word(rng, w_len);
        let witness = DisplacementWitness {
            a,
            b: w.mul(&inner).mul(&w.inverse()),
            x: Word::identity(),
            y: w,
            c: Rational64::from_integer(c),
        };
        if check_displacement_criterion(m, &witness)
            .map(|v| v.premises_strict)
            .unwrap_or(false)
        {
            return witness;
        }
    }
}

/// Half-plane displacement witness: small displacements at i and at a far
/// translate of i, with the far point produced by a long random product.
pub fn half_plane_displacement_witness(
    m: &HalfPlaneModel,
    rng: &mut ChaCha8Rng,
) -> DisplacementWitness<HalfPlaneModel> {
    let smalls = [Mat2::t(), Mat2::t().inverse(), Mat2::s()];
    let a = smalls[rng.random_range(0..smalls.len())].clone();
    let inner = smalls[rng.random_range(0..smalls.len())].clone();
    let w = m.sample_elem(rng, 12);
    let base = m.basepoint();
    let y = m.apply(&w, &base);
    let c = m
        .distance(&base, &m.apply(&a, &base))
        .max(m.distance(&y, &m.apply(&w.mul(&inner).mul(&w.inverse()), &y)))
        .max(0.25);
    DisplacementWitness {
        a,
        b: w.mul(&inner).mul(&w.inverse()),
        x: base,
        y,
        c,
    }
}

/// Lamplighter displacement witness. Every axis and every elliptic fixed
/// cone of this tree is asymptotic to the downward end, which makes the
/// two-sided premises unsatisfiable; the generated witnesses exercise the
/// checker and the vacuous side of the criterion.
pub fn lamplighter_displacement_witness(
    m: &LamplighterModel,
    rng: &mut ChaCha8Rng,
) -> DisplacementWitness<LamplighterModel> {
    let a = m.sample_elem(rng, 4);
    let inner = m.sample_elem(rng, 4);
    let w = m.sample_elem(rng, 6);
    let base = m.basepoint();
    let y = m.apply(&w, &base);
    let b = w.mul(&inner).mul(&w.inverse());
    let c = {
        let da = m.distance(&base, &m.apply(&a, &base));
        let db = m.distance(&y, &m.apply(&b, &y));
        let one = Rational64::from_integer(1);
        let mut c = if da >= db { da } else { db };
        if c < one {
            c = one;
        }
        c
    };
    DisplacementWitness {
        a,
        b,
        x: base,
        y,
        c,
    }
}

/// Random free-model pair (f, g) satisfying the commutator hypotheses.
pub fn free_commutator_pair(
    m: &FreeGroupModel,
    rng: &mut ChaCha8Rng,
) -> (Word, Word) {
    loop {
        let f_len = rng.random_range(1..=4);
        let f = m.random_word(rng, f_len);
        let g_len = rng.random_range(1..=4);
        let g = m.random_word(rng, g_len);
        if g.is_identity() || f.is_identity() {
            continue;
        }
        let Ok((gp, gm)) = fixed_points(m, &g) else { continue };
        if m.boundary_action(&f, &gp) != gp && m.boundary_action(&f, &gm) != gm {
            return (f, g);
        }
    }
}

/// Random loxodromic matrix and companion with both hypotheses satisfied.
pub fn half_plane_commutator_pair(
    m: &HalfPlaneModel,
    rng: &mut ChaCha8Rng,
) -> (Mat2, Mat2) {
    loop {
        let g = m.sample_elem(rng, 6);
        if !matches!(
            m.classify(&g, DEFAULT_ORBIT_BUDGET),
            Ok(IsometryClass::Loxodromic { .. })
        ) {
            continue;
        }
        let f = m.sample_elem(rng, 4);
        if f.is_projective_identity() {
            continue;
        }
        let Ok((gp, gm)) = fixed_points(m, &g) else { continue };
        if m.boundary_action(&f, &gp) != gp && m.boundary_action(&f, &gm) != gm {
            return (f, g);
        }
    }
}

// ---------------------------------------------------------------------------
// Lemma suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize)]
pub struct DisplacementSection {
    pub attempts: usize,
    pub premises_passed: usize,
    pub conclusion_failures: usize,
    pub implication_failures: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CommutatorSection {
    pub instances: usize,
    pub hypothesis_failures: usize,
    /// Pairs whose premises never certified within the sweep; resampled.
    pub not_found_within: usize,
    pub max_n0: usize,
    pub conclusion_failures: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DoublingSection {
    pub instances: usize,
    pub bound_failures: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceSection {
    pub instances: usize,
    pub inequality_failures: usize,
    pub equivalence_failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaSuiteReport {
    pub model: String,
    pub seed: u64,
    pub displacement: DisplacementSection,
    pub commutator: CommutatorSection,
    pub doubling: DoublingSection,
    pub convergence: ConvergenceSection,
}

impl LemmaSuiteReport {
    /// A lemma-conclusion failure falsifies an implication and is the
    /// nonzero-exit condition for the suite.
    pub fn conclusion_failures(&self) -> usize {
        self.displacement.conclusion_failures
            + self.displacement.implication_failures
            + self.commutator.conclusion_failures
            + self.doubling.bound_failures
            + self.convergence.inequality_failures
            + self.convergence.equivalence_failures
    }
}

pub fn run_lemma_suite(cfg: &ExperimentConfig) -> Result<LemmaSuiteReport, HarnessError> {
    match cfg.model {
        ModelSelect::Free => lemma_suite_free(cfg),
        ModelSelect::HalfPlane => lemma_suite_half_plane(cfg),
        ModelSelect::Lamplighter => lemma_suite_lamplighter(cfg),
    }
}

fn lemma_suite_free(cfg: &ExperimentConfig) -> Result<LemmaSuiteReport, HarnessError> {
    let m = FreeGroupModel::new(cfg.rank);
    let mut rng = cfg.rng();
    let mut displacement = DisplacementSection::default();
    while displacement.premises_passed < cfg.displacement_instances
        && displacement.attempts < 40 * cfg.displacement_instances.max(1)
    {
        displacement.attempts += 1;
        let w = free_displacement_witness(&m, &mut rng);
        let v = check_displacement_criterion(&m, &w).map_err(lemma_to_harness)?;
        if v.premises_strict {
            displacement.premises_passed += 1;
            if !v.conclusion_loxodromic {
                displacement.conclusion_failures += 1;
            }
        }
        if !v.implication_ok {
            displacement.implication_failures += 1;
        }
    }

    let mut commutator = CommutatorSection::default();
    while commutator.instances < cfg.commutator_instances
        && commutator.not_found_within + commutator.hypothesis_failures
            < 10 * cfg.commutator_instances.max(1)
    {
        let (f, g) = free_commutator_pair(&m, &mut rng);
        match loxodromic_commutator(&m, &f, &g, cfg.n_max) {
            Ok(cert) => {
                commutator.instances += 1;
                commutator.max_n0 = commutator.max_n0.max(cert.n0);
                if !cert.loxodromic_from_n0 {
                    commutator.conclusion_failures += 1;
                }
            }
            Err(LemmaError::HypothesisFail) => commutator.hypothesis_failures += 1,
            Err(LemmaError::NotFoundWithin(_)) => commutator.not_found_within += 1,
            Err(e) => return Err(lemma_to_harness(e)),
        }
    }

    let mut doubling = DoublingSection::default();
    for _ in 0..cfg.doubling_instances {
        let (f, g) = free_commutator_pair(&m, &mut rng);
        let est = doubling_estimate(&m, &g, &f, &m.basepoint(), cfg.n_max)
            .map_err(lemma_to_harness)?;
        doubling.instances += 1;
        if !est.all_within {
            doubling.bound_failures += 1;
        }
    }

    let mut convergence = ConvergenceSection::default();
    let params = cfg.conv_params();
    let threshold = Rational64::from_integer(cfg.threshold);
    for _ in 0..cfg.convergence_instances {
        let (h, g) = free_commutator_pair(&m, &mut rng);
        let out = conjugate_convergence(&m, &h, &g, &m.basepoint(), cfg.n_max, threshold, &params)
            .map_err(lemma_to_harness)?;
        convergence.instances += 1;
        if !out.inequality_ok {
            convergence.inequality_failures += 1;
        }
        if !out.sequences_equivalent || !out.converges_to_repelling {
            convergence.equivalence_failures += 1;
        }
    }

    Ok(LemmaSuiteReport {
        model: "free".into(),
        seed: cfg.seed,
        displacement,
        commutator,
        doubling,
        convergence,
    })
}

fn lemma_suite_half_plane(cfg: &ExperimentConfig) -> Result<LemmaSuiteReport, HarnessError> {
    let m = HalfPlaneModel::new();
    let mut rng = cfg.rng();
    let mut displacement = DisplacementSection::default();
    while displacement.premises_passed < cfg.displacement_instances
        && displacement.attempts < 200 * cfg.displacement_instances.max(1)
    {
        displacement.attempts += 1;
        let w = half_plane_displacement_witness(&m, &mut rng);
        let v = check_displacement_criterion(&m, &w).map_err(lemma_to_harness)?;
        if v.premises_strict {
            displacement.premises_passed += 1;
            if !v.conclusion_loxodromic {
                displacement.conclusion_failures += 1;
            }
        }
        if !v.implication_ok {
            displacement.implication_failures += 1;
        }
    }

    let mut commutator = CommutatorSection::default();
    while commutator.instances < cfg.commutator_instances
        && commutator.not_found_within + commutator.hypothesis_failures
            < 10 * cfg.commutator_instances.max(1)
    {
        let (f, g) = half_plane_commutator_pair(&m, &mut rng);
        match loxodromic_commutator(&m, &f, &g, cfg.n_max) {
            Ok(cert) => {
                commutator.instances += 1;
                commutator.max_n0 = commutator.max_n0.max(cert.n0);
                if !cert.loxodromic_from_n0 {
                    commutator.conclusion_failures += 1;
                }
            }
            Err(LemmaError::HypothesisFail) => commutator.hypothesis_failures += 1,
            Err(LemmaError::NotFoundWithin(_)) => commutator.not_found_within += 1,
            Err(e) => return Err(lemma_to_harness(e)),
        }
    }

    let mut doubling = DoublingSection::default();
    for _ in 0..cfg.doubling_instances {
        let (f, g) = half_plane_commutator_pair(&m, &mut rng);
        let est = doubling_estimate(&m, &g, &f, &m.basepoint(), cfg.n_max.min(20))
            .map_err(lemma_to_harness)?;
        doubling.instances += 1;
        if !est.all_within {
            doubling.bound_failures += 1;
        }
    }

    let mut convergence = ConvergenceSection::default();
    let params = cfg.conv_params();
    for _ in 0..cfg.convergence_instances {
        let (h, g) = half_plane_commutator_pair(&m, &mut rng);
        let out = conjugate_convergence(
            &m,
            &h,
            &g,
            &m.basepoint(),
            cfg.n_max.min(15),
            cfg.threshold as f64,
            &params,
        )
        .map_err(lemma_to_harness)?;
        convergence.instances += 1;
        if !out.inequality_ok {
            convergence.inequality_failures += 1;
        }
        if !out.sequences_equivalent || !out.converges_to_repelling {
            convergence.equivalence_failures += 1;
        }
    }

    Ok(LemmaSuiteReport {
        model: "half-plane".into(),
        seed: cfg.seed,
        displacement,
        commutator,
        doubling,
        convergence,
    })
}

fn lemma_suite_lamplighter(cfg: &ExperimentConfig) -> Result<LemmaSuiteReport, HarnessError> {
    let m = LamplighterModel::new();
    let mut rng = cfg.rng();
    let mut displacement = DisplacementSection::default();
    // Premise-passing witnesses cannot exist here (all axes share the
    // downward end); the loop verifies the vacuous direction.
    for _ in 0..cfg.displacement_instances {
        displacement.attempts += 1;
        let w = lamplighter_displacement_witness(&m, &mut rng);
        let v = check_displacement_criterion(&m, &w).map_err(lemma_to_harness)?;
        if v.premises_strict {
            displacement.premises_passed += 1;
            if !v.conclusion_loxodromic {
                displacement.conclusion_failures += 1;
            }
        }
        if !v.implication_ok {
            displacement.implication_failures += 1;
        }
    }

    // Commutator hypotheses need both fixed points moved; the downward end
    // is fixed by the whole group, so every instance is a hypothesis
    // failure, recorded as such.
    let mut commutator = CommutatorSection::default();
    for _ in 0..cfg.commutator_instances.min(50) {
        let f = m.sample_elem(&mut rng, 4);
        let g = LampElem::new([], rng.random_range(1..=2));
        match loxodromic_commutator(&m, &f, &g, cfg.n_max) {
            Ok(cert) => {
                commutator.instances += 1;
                if !cert.loxodromic_from_n0 {
                    commutator.conclusion_failures += 1;
                }
            }
            Err(LemmaError::HypothesisFail) => commutator.hypothesis_failures += 1,
            Err(e) => return Err(lemma_to_harness(e)),
        }
    }

    // Doubling and convergence run against upward-moving loxodromics, whose
    // attracting end individual lamps can move.
    let mut doubling = DoublingSection::default();
    let mut convergence = ConvergenceSection::default();
    let params = cfg.conv_params();
    let threshold = Rational64::from_integer(cfg.threshold);
    for _ in 0..cfg.doubling_instances.min(50) {
        let lamp_count = rng.random_range(0..=2usize);
        let lamps: Vec<i64> = (0..lamp_count).map(|_| rng.random_range(-3..=3)).collect();
        let shift = -rng.random_range(1..=2i64);
        let g = LampElem::new(lamps, shift);
        let f = LampElem::lamp(rng.random_range(0..=4));
        match doubling_estimate(&m, &g, &f, &m.basepoint(), cfg.n_max) {
            Ok(est) => {
                doubling.instances += 1;
                if !est.all_within {
                    doubling.bound_failures += 1;
                }
            }
            Err(LemmaError::FixesAttractor) => {}
            Err(e) => return Err(lemma_to_harness(e)),
        }
        let h = LampElem::lamp(rng.random_range(0..=4));
        let g2 = LampElem::new([], -1);
        match conjugate_convergence(&m, &h, &g2, &m.basepoint(), cfg.n_max, threshold, &params) {
            Ok(out) => {
                convergence.instances += 1;
                if !out.inequality_ok {
                    convergence.inequality_failures += 1;
                }
                if !out.sequences_equivalent || !out.converges_to_repelling {
                    convergence.equivalence_failures += 1;
                }
            }
            Err(LemmaError::FixesAttractor) => {}
            Err(e) => return Err(lemma_to_harness(e)),
        }
    }

    Ok(LemmaSuiteReport {
        model: "lamplighter".into(),
        seed: cfg.seed,
        displacement,
        commutator,
        doubling,
        convergence,
    })
}

fn lemma_to_harness(e: LemmaError) -> HarnessError {
    HarnessError::PreconditionFail(e.to_string())
}

// ---------------------------------------------------------------------------
// Dichotomy harness
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceCell {
    pub conjugator: String,
    pub probe: String,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomRow {
    pub atom_id: usize,
    pub weight: String,
    pub subgroup_index: String,
    pub recurrence: Vec<RecurrenceCell>,
    pub recurrence_all_verified: bool,
    pub limit_set_equal: bool,
    pub limit_cylinders: usize,
    pub fixes_no_boundary_point: bool,
    pub in_radical: bool,
    pub classification: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionDichotomy {
    pub action_index: usize,
    pub points: usize,
    pub ergodic: bool,
    pub invariant: bool,
    pub atoms: Vec<AtomRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SourceRejection {
    pub description: String,
    pub rejection: String,
    pub recurrence_refutation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub model: String,
    pub seed: u64,
    pub depth: usize,
    pub limit_radius: usize,
    pub recurrence_bound: usize,
    pub general_type_certificate: String,
    pub scope_note: String,
    pub rejections: Vec<SourceRejection>,
    pub actions: Vec<ActionDichotomy>,
    pub inconsistent_rows: usize,
}

/// Classify every atom of the configured stabilizer IRS: recurrence grid,
/// limit-set comparison at depth D, boundary-fixed-point search, and the
/// radical membership probe.
pub fn run_dichotomy(cfg: &ExperimentConfig) -> Result<DichotomyReport, HarnessError> {
    if cfg.model != ModelSelect::Free {
        return Err(HarnessError::PreconditionFail(
            "the dichotomy harness drives the free model".into(),
        ));
    }
    let m = FreeGroupModel::new(cfg.rank);
    let gens = m.standard_generators();
    let at = action_type(&m, &gens, &ActionTypeParams::new(cfg.search_radius.max(2)))
        .map_err(|e| HarnessError::PreconditionFail(e.to_string()))?;
    if !at.verdict.is_general_type() {
        return Err(HarnessError::PreconditionFail(format!(
            "ambient action classified {}",
            at.verdict.kind_name()
        )));
    }
    let general_type_certificate = format!(
        "general-type at radius {} ({} loxodromics in a ball of {})",
        at.search_radius, at.loxodromic_count, at.ball_size
    );

    // Shared geometric context.
    let full_group = SubgroupHandle::from_generators(&m, &gens);
    let full_limit = limit_set_handle(&m, &full_group, cfg.depth, cfg.limit_radius)?;
    let boundary_candidates: Vec<crate::models::free::Ray> = {
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (_, p, q) in loxodromic_fixed_points_in_ball(&m, &gens, cfg.search_radius)? {
            for b in [p, q] {
                if seen.insert(b.clone()) {
                    out.push(b);
                }
            }
        }
        out
    };
    let probe = canonical_probe(&m);
    let conj_grid: Vec<Word> = vec![
        Word::parse("a", cfg.rank).unwrap(),
        Word::parse("b", cfg.rank).unwrap(),
        Word::parse("ab", cfg.rank).unwrap(),
    ];
    let probe_grid: Vec<(String, Vec<Word>)> = vec![
        ("ball-1".into(), ball(cfg.rank, 1)),
        ("ball-2".into(), ball(cfg.rank, 2)),
    ];

    let mut report = DichotomyReport {
        model: "free".into(),
        seed: cfg.seed,
        depth: cfg.depth,
        limit_radius: cfg.limit_radius,
        recurrence_bound: cfg.recurrence_bound,
        general_type_certificate,
        scope_note: "finitely supported measures only; density and radical verdicts carry their truncation parameters".into(),
        rejections: Vec::new(),
        actions: Vec::new(),
        inconsistent_rows: 0,
    };

    match cfg.irs_source {
        IrsSource::SeededActions => {
            let mut rng = cfg.rng();
            for action_index in 0..cfg.actions {
                let action = random_transitive_action(&mut rng, cfg.rank, cfg.max_points);
                let entry = classify_action_atoms(
                    &m,
                    cfg,
                    &action,
                    action_index,
                    &full_limit,
                    &boundary_candidates,
                    &probe,
                    &conj_grid,
                    &probe_grid,
                )?;
                report.inconsistent_rows += entry
                    .atoms
                    .iter()
                    .filter(|a| a.classification == "INCONSISTENT")
                    .count();
                report.actions.push(entry);
            }
        }
        IrsSource::DiracTrivial => {
            let mu = IrsMeasure::dirac(SubgroupHandle::trivial(&m), "dirac at the trivial subgroup");
            verify_invariance(&m, &mu, &gens, &probe)?;
            let atoms = classify_measure_atoms(
                &m,
                cfg,
                &mu,
                &full_limit,
                &boundary_candidates,
                &conj_grid,
                &probe_grid,
            )?;
            report.inconsistent_rows += atoms
                .iter()
                .filter(|a| a.classification == "INCONSISTENT")
                .count();
            report.actions.push(ActionDichotomy {
                action_index: 0,
                points: 1,
                ergodic: true,
                invariant: true,
                atoms,
            });
        }
        IrsSource::DiracCyclic => {
            let a_word = Word::parse("a", cfg.rank).unwrap();
            let b_word = Word::parse("b", cfg.rank).unwrap();
            let mu = IrsMeasure::dirac(
                SubgroupHandle::from_generators(&m, &[a_word.clone()]),
                "dirac at a cyclic axis subgroup",
            );
            match verify_invariance(&m, &mu, &gens, &[a_word.clone(), b_word.clone().mul(&a_word).mul(&b_word.inverse())]) {
                Ok(_) => {
                    return Err(HarnessError::PreconditionFail(
                        "handcrafted cyclic dirac unexpectedly verified as invariant".into(),
                    ))
                }
                Err(e) => {
                    let refutation = recurrence_check(
                        &m,
                        &SubgroupHandle::from_generators(&m, &[a_word.clone()]),
                        &b_word,
                        &[a_word],
                        cfg.recurrence_bound,
                    )?;
                    report.rejections.push(SourceRejection {
                        description: "dirac at a cyclic axis subgroup".into(),
                        rejection: e.to_string(),
                        recurrence_refutation: Some(format!("{:?}", refutation.status)),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn classify_action_atoms(
    m: &FreeGroupModel,
    cfg: &ExperimentConfig,
    action: &FiniteAction,
    action_index: usize,
    full_limit: &crate::isometry::LimitSetApprox<FreeGroupModel>,
    boundary_candidates: &[crate::models::free::Ray],
    probe: &[Word],
    conj_grid: &[Word],
    probe_grid: &[(String, Vec<Word>)],
) -> Result<ActionDichotomy, HarnessError> {
    let gens = m.standard_generators();
    let ergodic = verify_ergodicity(action)?.ergodic;
    if !ergodic {
        return Err(HarnessError::PreconditionFail(
            "IRS source action must be ergodic".into(),
        ));
    }
    let mu = stabilizer_irs(m, action);
    verify_invariance(m, &mu, &gens, probe)?;
    let atoms = classify_measure_atoms(
        m,
        cfg,
        &mu,
        full_limit,
        boundary_candidates,
        conj_grid,
        probe_grid,
    )?;
    Ok(ActionDichotomy {
        action_index,
        points: action.points(),
        ergodic,
        invariant: true,
        atoms,
    })
}

fn classify_measure_atoms(
    m: &FreeGroupModel,
    cfg: &ExperimentConfig,
    mu: &IrsMeasure<FreeGroupModel>,
    full_limit: &crate::isometry::LimitSetApprox<FreeGroupModel>,
    boundary_candidates: &[crate::models::free::Ray],
    conj_grid: &[Word],
    probe_grid: &[(String, Vec<Word>)],
) -> Result<Vec<AtomRow>, HarnessError> {
    let mut rows = Vec::new();
    for (atom_id, (handle, weight)) in mu.atoms.iter().enumerate() {
        // Recurrence grid.
        let mut recurrence = Vec::new();
        let mut all_verified = true;
        for g in conj_grid {
            for (name, f_set) in probe_grid {
                let verdict = recurrence_check(m, handle, g, f_set, cfg.recurrence_bound)?;
                let ok = matches!(verdict.status, RecurrenceStatus::Verified(_));
                all_verified &= ok;
                recurrence.push(RecurrenceCell {
                    conjugator: m.elem_string(g),
                    probe: name.clone(),
                    status: match verdict.status {
                        RecurrenceStatus::Verified(n) => format!("verified({n})"),
                        RecurrenceStatus::RefutedUpTo(n) => format!("refuted-up-to({n})"),
                    },
                });
            }
        }
        // Limit-set comparison at depth D.
        let atom_limit = limit_set_handle(m, handle, cfg.depth, cfg.limit_radius)?;
        let limit_set_equal = atom_limit.cylinders == full_limit.cylinders;
        // Fixed-boundary-point search over the candidate set: dense needs
        // some probe element to move every candidate.
        let probes = handle.probe_elements(m, 4, 64);
        let nontrivial: Vec<&Word> = probes.iter().filter(|w| !w.is_identity()).collect();
        let fixes_no_boundary_point = !nontrivial.is_empty()
            && boundary_candidates
                .iter()
                .all(|b| nontrivial.iter().any(|h| m.boundary_action(h, b) != *b));
        // Radical membership: every probe acts trivially on the samples.
        let in_radical = probes
            .iter()
            .all(|h| boundary_candidates.iter().all(|b| m.boundary_action(h, b) == *b));
        let classification = if in_radical {
            "InRadical"
        } else if limit_set_equal && fixes_no_boundary_point {
            "GeometricallyDense"
        } else {
            "INCONSISTENT"
        };
        rows.push(AtomRow {
            atom_id,
            weight: weight.to_string(),
            subgroup_index: match handle.index() {
                Ok(SubgroupIndex::Finite(n)) => n.to_string(),
                Ok(SubgroupIndex::Infinite) => "infinite".into(),
                Err(_) => "unknown".into(),
            },
            recurrence,
            recurrence_all_verified: all_verified,
            limit_set_equal,
            limit_cylinders: atom_limit.cylinders.len(),
            fixes_no_boundary_point,
            in_radical,
            classification: classification.into(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Radical suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RadicalCaseReport {
    pub case: String,
    pub fixes_limit_set: bool,
    pub normal_ok: bool,
    pub elliptic_ok: bool,
    pub limit_samples: usize,
    pub maximality_rivals_contained: usize,
    pub maximality_rivals_disqualified: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStepReport {
    pub k: i64,
    pub orbit_diameter: i64,
    pub witness_outside: bool,
    pub normal_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadicalSuiteReport {
    pub seed: u64,
    pub free_trivial: RadicalCaseReport,
    pub free_negative_control: RadicalCaseReport,
    pub half_plane_center: RadicalCaseReport,
    pub chain: Vec<ChainStepReport>,
    pub chain_parabolic_orbit_radius: f64,
    pub chain_loxodromics_in_ball: usize,
}

pub fn run_radical_suite(cfg: &ExperimentConfig) -> Result<RadicalSuiteReport, HarnessError> {
    let params = RadicalParams {
        search_radius: cfg.search_radius.max(3),
        ..RadicalParams::default()
    };

    let fm = FreeGroupModel::new(cfg.rank);
    let fgens = fm.standard_generators();
    let trivial = SubgroupHandle::trivial(&fm);
    let a_cyclic: SubgroupHandle<FreeGroupModel> =
        SubgroupHandle::Cyclic(Word::parse("a", cfg.rank).unwrap());
    let rivals: Vec<(String, SubgroupHandle<FreeGroupModel>)> = {
        // Cyclic handles over short ball elements: the normality probe
        // disqualifies each, witnessing that nothing larger qualifies.
        let mut out = Vec::new();
        for w in ball(cfg.rank, 2) {
            if !w.is_identity() {
                let (_, core) = w.cyclic_reduce();
                if core.len() == w.len() {
                    out.push((format!("cyclic <{w}>"), SubgroupHandle::Cyclic(w)));
                }
            }
        }
        out.truncate(8);
        out
    };
    let v = radical_verify(&fm, &trivial, &fgens, &params, &rivals)?;
    let free_trivial = RadicalCaseReport {
        case: "free-trivial".into(),
        fixes_limit_set: v.fixes_limit_set,
        normal_ok: v.normal_ok,
        elliptic_ok: v.elliptic_ok,
        limit_samples: v.limit_samples,
        maximality_rivals_contained: v
            .maximality
            .iter()
            .filter(|p| p.contained_in_candidate == Some(true))
            .count(),
        maximality_rivals_disqualified: v
            .maximality
            .iter()
            .filter(|p| !p.is_normal || !p.is_elliptic)
            .count(),
    };
    let v = radical_verify(&fm, &a_cyclic, &fgens, &params, &[])?;
    let free_negative_control = RadicalCaseReport {
        case: "free-cyclic-a".into(),
        fixes_limit_set: v.fixes_limit_set,
        normal_ok: v.normal_ok,
        elliptic_ok: v.elliptic_ok,
        limit_samples: v.limit_samples,
        maximality_rivals_contained: 0,
        maximality_rivals_disqualified: 0,
    };

    let hm = HalfPlaneModel::new();
    let hgens = hm.standard_generators();
    let center = SubgroupHandle::finite_set(
        &hm,
        vec![Mat2::identity(), Mat2::identity().neg()],
    );
    let s = Mat2::s();
    let hp_rivals: Vec<(String, SubgroupHandle<HalfPlaneModel>)> = vec![
        (
            "order-4 rotation".into(),
            SubgroupHandle::finite_set(
                &hm,
                vec![Mat2::identity(), s.clone(), s.pow(2), s.pow(3)],
            ),
        ),
        ("parabolic cyclic".into(), SubgroupHandle::Cyclic(Mat2::t())),
        (
            "loxodromic cyclic".into(),
            SubgroupHandle::Cyclic(Mat2::new(2, 1, 1, 1).expect("det 1")),
        ),
    ];
    let v = radical_verify(&hm, &center, &hgens, &params, &hp_rivals)?;
    let half_plane_center = RadicalCaseReport {
        case: "half-plane-center".into(),
        fixes_limit_set: v.fixes_limit_set,
        normal_ok: v.normal_ok,
        elliptic_ok: v.elliptic_ok,
        limit_samples: v.limit_samples,
        maximality_rivals_contained: v
            .maximality
            .iter()
            .filter(|p| p.contained_in_candidate == Some(true))
            .count(),
        maximality_rivals_disqualified: v
            .maximality
            .iter()
            .filter(|p| !p.is_normal || !p.is_elliptic)
            .count(),
    };

    let lm = LamplighterModel::new();
    let chain = lamplighter_no_maximal(&lm, cfg.chain_length.max(1))?;
    let chain_steps: Vec<ChainStepReport> = chain
        .steps
        .iter()
        .map(|s| ChainStepReport {
            k: s.k,
            orbit_diameter: s.orbit_diameter,
            witness_outside: s.witness_outside,
            normal_ok: s.normal_ok,
        })
        .collect();

    Ok(RadicalSuiteReport {
        seed: cfg.seed,
        free_trivial,
        free_negative_control,
        half_plane_center,
        chain: chain_steps,
        chain_parabolic_orbit_radius: chain.parabolic.orbit_radius.to_f64(),
        chain_loxodromics_in_ball: chain.parabolic.loxodromic_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_displacement_witnesses_always_certify() {
        let m = FreeGroupModel::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w = free_displacement_witness(&m, &mut rng);
            let v = check_displacement_criterion(&m, &w).unwrap();
            assert!(v.premises_strict, "constructed witness must certify");
            assert!(v.conclusion_loxodromic);
        }
    }

    #[test]
    fn dichotomy_small_run_is_consistent() {
        let cfg = ExperimentConfig {
            actions: 5,
            max_points: 6,
            ..ExperimentConfig::default()
        };
        let report = run_dichotomy(&cfg).unwrap();
        assert_eq!(report.inconsistent_rows, 0);
        assert_eq!(report.actions.len(), 5);
        for action in &report.actions {
            for atom in &action.atoms {
                assert_eq!(atom.classification, "GeometricallyDense");
                assert!(atom.recurrence_all_verified);
            }
        }
    }

    #[test]
    fn dichotomy_dirac_trivial_in_radical() {
        let cfg = ExperimentConfig {
            irs_source: IrsSource::DiracTrivial,
            ..ExperimentConfig::default()
        };
        let report = run_dichotomy(&cfg).unwrap();
        assert_eq!(report.actions.len(), 1);
        assert_eq!(report.actions[0].atoms.len(), 1);
        assert_eq!(report.actions[0].atoms[0].classification, "InRadical");
        assert_eq!(report.inconsistent_rows, 0);
    }

    #[test]
    fn dichotomy_dirac_cyclic_rejected() {
        let cfg = ExperimentConfig {
            irs_source: IrsSource::DiracCyclic,
            ..ExperimentConfig::default()
        };
        let report = run_dichotomy(&cfg).unwrap();
        assert_eq!(report.rejections.len(), 1);
        assert!(report.rejections[0]
            .recurrence_refutation
            .as_deref()
            .unwrap()
            .contains("RefutedUpTo"));
    }
}
