//! Classification of single isometries and whole actions, limit-set
//! approximation, north–south dynamics, and the endpoint-pair constructor.
//!
//! All verdicts about infinite behaviour are truncated: they carry the search
//! radius or budget they were certified at and never claim more.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::hyp::{converges_at_infinity, same_boundary_point, ConvergenceParams, ConvergenceVerdict};
use crate::model::{ball_elements, BallElement, ModelSpace};
use crate::models::free::FreeGroupModel;
use crate::scalar::{smax, Scalar};
use crate::subgroups::SubgroupHandle;
use crate::word::{alphabet, Word};

pub const DEFAULT_ORBIT_BUDGET: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("orbit budget {budget} exhausted without certifying growth or boundedness")]
    Inconclusive { budget: usize },
}

#[derive(Debug, Error)]
pub enum IsometryError {
    #[error("element is not loxodromic")]
    NotLoxodromic,
    #[error("start point equals the excluded fixed point")]
    DegenerateStart,
    #[error("generation radius {radius} is below twice the depth {depth}")]
    RadiusTooSmall { radius: usize, depth: usize },
    #[error("cylinders are not disjoint")]
    CylindersNotDisjoint,
    #[error("no one- or two-letter connector produced a verified axis")]
    NoConnector,
    #[error("evidence at radius {radius} is compatible with multiple classes: {detail}")]
    Inconclusive { radius: usize, detail: String },
    #[error("operation unsupported for this model: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Subgroup(#[from] crate::subgroups::SubgroupError),
}

/// Class of a single isometry, with a model-specific certificate.
#[derive(Clone, Debug)]
pub enum IsometryClass<M: ModelSpace> {
    /// Bounded orbit; the witness is the orbit radius seen from the basepoint.
    Elliptic { orbit_radius: M::Scalar },
    /// Unbounded orbit without an axis (half-plane trace ±2).
    Parabolic { certificate: String },
    Loxodromic {
        translation_length: M::Scalar,
        attracting: M::Boundary,
        repelling: M::Boundary,
    },
}

impl<M: ModelSpace> IsometryClass<M> {
    pub fn is_loxodromic(&self) -> bool {
        matches!(self, IsometryClass::Loxodromic { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            IsometryClass::Elliptic { .. } => "elliptic",
            IsometryClass::Parabolic { .. } => "parabolic",
            IsometryClass::Loxodromic { .. } => "loxodromic",
        }
    }

    pub fn fixed_pair(&self) -> Option<(&M::Boundary, &M::Boundary)> {
        match self {
            IsometryClass::Loxodromic {
                attracting,
                repelling,
                ..
            } => Some((attracting, repelling)),
            _ => None,
        }
    }
}

/// The two fixed boundary points (attracting, repelling) of a loxodromic.
pub fn fixed_points<M: ModelSpace>(
    m: &M,
    g: &M::Elem,
) -> Result<(M::Boundary, M::Boundary), IsometryError> {
    match m.classify(g, DEFAULT_ORBIT_BUDGET)? {
        IsometryClass::Loxodromic {
            attracting,
            repelling,
            ..
        } => Ok((attracting, repelling)),
        _ => Err(IsometryError::NotLoxodromic),
    }
}

/// Whether two loxodromics have disjoint fixed-point pairs.
pub fn independent<M: ModelSpace>(
    m: &M,
    g: &M::Elem,
    h: &M::Elem,
) -> Result<bool, IsometryError> {
    let (gp, gm) = fixed_points(m, g)?;
    let (hp, hm) = fixed_points(m, h)?;
    Ok(gp != hp && gp != hm && gm != hp && gm != hm)
}

#[derive(Clone, Debug)]
pub struct ActionTypeParams {
    pub search_radius: usize,
    pub orbit_budget: usize,
    /// Orbit radius at which an action without loxodromics is called
    /// parabolic (at truncation). Defaults to twice the search radius.
    pub parabolic_orbit_threshold: f64,
}

impl ActionTypeParams {
    pub fn new(search_radius: usize) -> ActionTypeParams {
        ActionTypeParams {
            search_radius,
            orbit_budget: DEFAULT_ORBIT_BUDGET,
            parabolic_orbit_threshold: 2.0 * search_radius as f64,
        }
    }
}

/// Verdict of the action-type census, with the witnesses the class needs.
#[derive(Clone, Debug)]
pub enum ActionVerdict<M: ModelSpace> {
    Elliptic {
        orbit_radius: M::Scalar,
    },
    Parabolic {
        orbit_radius: M::Scalar,
        common_fixed: Option<M::Boundary>,
    },
    Lineal {
        axis: (M::Boundary, M::Boundary),
        witness: M::Elem,
    },
    QuasiParabolic {
        fixed: M::Boundary,
        witness: M::Elem,
    },
    GeneralType {
        pair: (M::Elem, M::Elem),
    },
}

impl<M: ModelSpace> ActionVerdict<M> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ActionVerdict::Elliptic { .. } => "elliptic",
            ActionVerdict::Parabolic { .. } => "parabolic",
            ActionVerdict::Lineal { .. } => "lineal",
            ActionVerdict::QuasiParabolic { .. } => "quasi-parabolic",
            ActionVerdict::GeneralType { .. } => "general-type",
        }
    }

    pub fn is_general_type(&self) -> bool {
        matches!(self, ActionVerdict::GeneralType { .. })
    }
}

#[derive(Clone, Debug)]
pub struct ActionTypeReport<M: ModelSpace> {
    pub verdict: ActionVerdict<M>,
    pub search_radius: usize,
    pub ball_size: usize,
    pub loxodromic_count: usize,
    /// Max displacement of the basepoint over the ball.
    pub orbit_radius: M::Scalar,
}

/// Census of the word ball: classify every element, gather fixed points, and
/// classify the whole action. Verdicts are certificates at the search radius.
pub fn action_type<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    params: &ActionTypeParams,
) -> Result<ActionTypeReport<M>, IsometryError> {
    assert!(params.search_radius >= 1);
    let ball = ball_elements(m, gens, params.search_radius);
    let base = m.basepoint();
    let mut orbit_radius = M::Scalar::zero();
    let mut loxodromics: Vec<(M::Elem, M::Boundary, M::Boundary)> = Vec::new();
    for el in &ball {
        orbit_radius = smax(orbit_radius, m.distance(&base, &m.apply(&el.elem, &base)));
        if let IsometryClass::Loxodromic {
            attracting,
            repelling,
            ..
        } = m.classify(&el.elem, params.orbit_budget)?
        {
            loxodromics.push((el.elem.clone(), attracting, repelling));
        }
    }
    let report = |verdict| ActionTypeReport {
        verdict,
        search_radius: params.search_radius,
        ball_size: ball.len(),
        loxodromic_count: loxodromics.len(),
        orbit_radius,
    };

    if loxodromics.is_empty() {
        let reach = orbit_radius.to_f64();
        if reach >= params.parabolic_orbit_threshold {
            let common_fixed = m
                .boundary_sentinels()
                .into_iter()
                .find(|s| gens.iter().all(|g| m.boundary_action(g, s) == *s));
            return Ok(report(ActionVerdict::Parabolic {
                orbit_radius,
                common_fixed,
            }));
        }
        if reach >= params.search_radius as f64 {
            return Err(IsometryError::Inconclusive {
                radius: params.search_radius,
                detail: format!(
                    "no loxodromics; orbit radius {reach} between the search radius and the parabolic threshold"
                ),
            });
        }
        return Ok(report(ActionVerdict::Elliptic { orbit_radius }));
    }

    let pair_sets: BTreeSet<BTreeSet<M::Boundary>> = loxodromics
        .iter()
        .map(|(_, p, q)| BTreeSet::from([p.clone(), q.clone()]))
        .collect();
    if pair_sets.len() == 1 {
        let (g, p, q) = loxodromics[0].clone();
        return Ok(report(ActionVerdict::Lineal {
            axis: (p, q),
            witness: g,
        }));
    }

    let mut independent_pair = None;
    'outer: for (i, (g, gp, gm)) in loxodromics.iter().enumerate() {
        for (h, hp, hm) in loxodromics.iter().skip(i + 1) {
            if gp != hp && gp != hm && gm != hp && gm != hm {
                independent_pair = Some((g.clone(), h.clone()));
                break 'outer;
            }
        }
    }
    let pair = independent_pair.ok_or_else(|| IsometryError::Inconclusive {
        radius: params.search_radius,
        detail: "several distinct but overlapping fixed pairs".to_string(),
    })?;

    // Candidate global fixed points: every loxodromic fixed point plus the
    // model's structural sentinels.
    let mut candidates: BTreeSet<M::Boundary> = m.boundary_sentinels().into_iter().collect();
    for (_, p, q) in &loxodromics {
        candidates.insert(p.clone());
        candidates.insert(q.clone());
    }
    let common = candidates
        .into_iter()
        .find(|b| gens.iter().all(|g| m.boundary_action(g, b) == *b));
    match common {
        Some(fixed) => Ok(report(ActionVerdict::QuasiParabolic {
            fixed,
            witness: loxodromics[0].0.clone(),
        })),
        None => Ok(report(ActionVerdict::GeneralType { pair })),
    }
}

/// Truncated limit-set approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitSetApprox<M: ModelSpace> {
    pub depth: usize,
    pub generation_radius: usize,
    pub cylinders: CylinderSet<M>,
}

/// Depth-D cylinders (tree models: the vertex at distance D towards the
/// orbit point) or a sample of exact boundary points (half-plane).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CylinderSet<M: ModelSpace> {
    Vertices(BTreeSet<M::Point>),
    Boundary(BTreeSet<M::Boundary>),
}

impl<M: ModelSpace> CylinderSet<M> {
    pub fn len(&self) -> usize {
        match self {
            CylinderSet::Vertices(s) => s.len(),
            CylinderSet::Boundary(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Limit-set cylinders of the subgroup generated by `gens`, from orbit
/// points of expression length in [radius−2, radius]. Exponential in the
/// radius; prefer [`limit_set_handle`] for free-model subgroups.
pub fn limit_set_gens<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    depth: usize,
    radius: usize,
) -> Result<LimitSetApprox<M>, IsometryError> {
    if radius < 2 * depth {
        return Err(IsometryError::RadiusTooSmall { radius, depth });
    }
    let base = m.basepoint();
    let supports_prefixes = m.geodesic_prefix(&base, 0).is_some();
    if supports_prefixes {
        let mut out: BTreeSet<M::Point> = BTreeSet::new();
        let ball = ball_elements(m, gens, radius);
        for el in &ball {
            if el.expr.len() + 2 < radius {
                continue;
            }
            let pt = m.apply(&el.elem, &base);
            if let Some(prefix) = m.geodesic_prefix(&pt, depth) {
                out.insert(prefix);
            }
        }
        Ok(LimitSetApprox {
            depth,
            generation_radius: radius,
            cylinders: CylinderSet::Vertices(out),
        })
    } else {
        // Half-plane: sample attracting fixed points of loxodromic elements.
        let mut out: BTreeSet<M::Boundary> = BTreeSet::new();
        let ball = ball_elements(m, gens, radius);
        for el in &ball {
            if let IsometryClass::Loxodromic { attracting, .. } =
                m.classify(&el.elem, DEFAULT_ORBIT_BUDGET)?
            {
                out.insert(attracting);
            }
        }
        Ok(LimitSetApprox {
            depth,
            generation_radius: radius,
            cylinders: CylinderSet::Boundary(out),
        })
    }
}

/// Depth-D prefixes of subgroup orbit points with word length in
/// [radius−2, radius], computed by dynamic programming over the handle's
/// membership automaton rather than enumeration.
pub fn limit_set_handle(
    m: &FreeGroupModel,
    handle: &SubgroupHandle<FreeGroupModel>,
    depth: usize,
    radius: usize,
) -> Result<LimitSetApprox<FreeGroupModel>, IsometryError> {
    if radius < 2 * depth {
        return Err(IsometryError::RadiusTooSmall { radius, depth });
    }
    let automaton = handle.automaton(m)?;
    let rank = m.rank();
    let letters = alphabet(rank);
    let nstates = automaton.states();
    // reach[j][state][letter_key] = a reduced word of length j arriving at
    // `state` with the given last letter can be completed to the basepoint.
    let max_tail = radius.saturating_sub(depth.min(radius));
    let mut reach = vec![vec![vec![false; 2 * rank]; nstates]; max_tail + 1];
    for (s, row) in reach[0].iter_mut().enumerate() {
        let hit = s == automaton.base();
        for slot in row.iter_mut() {
            *slot = hit;
        }
    }
    for j in 1..=max_tail {
        for s in 0..nstates {
            for (ki, &last) in letters.iter().enumerate() {
                let mut ok = false;
                for &next in &letters {
                    if next == -last {
                        continue;
                    }
                    if let Some(s2) = automaton.step(s, next) {
                        if reach[j - 1][s2][crate::word::letter_key(next) as usize] {
                            ok = true;
                            break;
                        }
                    }
                }
                reach[j][s][ki] = ok;
            }
        }
    }
    let lo = radius.saturating_sub(2).max(depth);
    let mut cylinders: BTreeSet<Word> = BTreeSet::new();
    'prefix: for p in crate::word::sphere(rank, depth) {
        let mut state = automaton.base();
        for &l in p.letters() {
            match automaton.step(state, l) {
                Some(s2) => state = s2,
                None => continue 'prefix,
            }
        }
        let last_key = crate::word::letter_key(p.letters()[depth - 1]) as usize;
        for n in lo..=radius {
            let tail = n - depth;
            if reach[tail][state][last_key] {
                cylinders.insert(p.clone());
                continue 'prefix;
            }
        }
    }
    Ok(LimitSetApprox {
        depth,
        generation_radius: radius,
        cylinders: CylinderSet::Vertices(cylinders),
    })
}

/// Start of a north–south trajectory.
#[derive(Clone, Debug)]
pub enum NsStart<M: ModelSpace> {
    Point(M::Point),
    Boundary(M::Boundary),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsDirection {
    /// gⁿ s → g⁺
    Forward,
    /// g⁻ⁿ s → g⁻
    Backward,
}

/// Verify north–south dynamics at truncation: the forward orbit converges to
/// the attracting point (resp. backward to the repelling one), via tail
/// Gromov products for point starts and boundary Gromov products for
/// boundary starts.
pub fn north_south_verify<M: ModelSpace>(
    m: &M,
    g: &M::Elem,
    start: &NsStart<M>,
    direction: NsDirection,
    n_max: usize,
    threshold: M::Scalar,
    params: &ConvergenceParams<M::Scalar>,
) -> Result<ConvergenceVerdict<M>, IsometryError> {
    let (plus, minus) = fixed_points(m, g)?;
    let (step, target, excluded) = match direction {
        NsDirection::Forward => (g.clone(), plus, minus),
        NsDirection::Backward => (m.inv(g), minus, plus),
    };
    match start {
        NsStart::Point(s) => {
            let mut orbit = Vec::with_capacity(n_max + 1);
            let mut x = s.clone();
            for _ in 0..=n_max {
                orbit.push(x.clone());
                x = m.apply(&step, &x);
            }
            let approach = m.boundary_approach(&target, n_max + 1);
            let base = m.basepoint();
            let orbit_check = converges_at_infinity(m, &orbit, &base, threshold, params);
            if !orbit_check.converges {
                return Ok(orbit_check);
            }
            let same = same_boundary_point(m, &orbit, &approach, &base, threshold, params)
                .unwrap_or(false);
            Ok(ConvergenceVerdict {
                converges: same,
                product_trajectory: orbit_check.product_trajectory,
                threshold,
            })
        }
        NsStart::Boundary(b) => {
            if *b == excluded {
                return Err(IsometryError::DegenerateStart);
            }
            if *b == target {
                return Ok(ConvergenceVerdict {
                    converges: true,
                    product_trajectory: Vec::new(),
                    threshold,
                });
            }
            let mut trajectory = Vec::new();
            let mut converges = true;
            let mut cur = b.clone();
            for n in 0..=n_max {
                if n >= params.burn_in {
                    // cur ≠ target for all n since b avoids both fixed points.
                    let prox = m
                        .boundary_gromov(&cur, &target)
                        .unwrap_or_else(|| threshold + threshold);
                    if !(prox > threshold) {
                        converges = false;
                    }
                    trajectory.push(((n, n), prox));
                }
                cur = m.boundary_action(&step, &cur);
            }
            Ok(ConvergenceVerdict {
                converges,
                product_trajectory: trajectory,
                threshold,
            })
        }
    }
}

/// Construct a loxodromic whose attracting point lies in the cylinder over
/// `u` and repelling point in the cylinder over `v`, as u·c·v⁻¹ for a short
/// connector c, verified through its computed fixed points.
pub fn find_loxodromic_with_endpoints(
    m: &FreeGroupModel,
    u: &Word,
    v: &Word,
) -> Result<Word, IsometryError> {
    if u.is_empty() || v.is_empty() || u.starts_with(v) || v.starts_with(u) {
        return Err(IsometryError::CylindersNotDisjoint);
    }
    let letters = alphabet(m.rank());
    let verify = |candidate: &Word| -> bool {
        if candidate.is_identity() {
            return false;
        }
        match m.classify(candidate, DEFAULT_ORBIT_BUDGET) {
            Ok(IsometryClass::Loxodromic {
                attracting,
                repelling,
                ..
            }) => {
                attracting.word_prefix(u.len()) == *u && repelling.word_prefix(v.len()) == *v
            }
            _ => false,
        }
    };
    let v_inv = v.inverse();
    for &c in &letters {
        let candidate = u.mul(&Word::from_letters([c])).mul(&v_inv);
        if verify(&candidate) {
            return Ok(candidate);
        }
    }
    for &c1 in &letters {
        for &c2 in &letters {
            let candidate = u
                .mul(&Word::from_letters([c1, c2]))
                .mul(&v_inv);
            if verify(&candidate) {
                return Ok(candidate);
            }
        }
    }
    Err(IsometryError::NoConnector)
}

/// Classification row for sweep reports.
#[derive(Clone, Debug)]
pub struct ClassifyRow {
    pub element: String,
    pub class: &'static str,
    pub translation_length: Option<f64>,
    pub fixed_points: Option<(String, String)>,
}

/// Classify every element of the generator ball; rows come out in
/// deterministic ball order.
pub fn classify_sweep<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    radius: usize,
    orbit_budget: usize,
) -> Result<Vec<ClassifyRow>, IsometryError> {
    let mut rows = Vec::new();
    for BallElement { elem, .. } in ball_elements(m, gens, radius) {
        let class = m.classify(&elem, orbit_budget)?;
        let (tl, fps) = match &class {
            IsometryClass::Loxodromic {
                translation_length,
                attracting,
                repelling,
            } => (
                Some(translation_length.to_f64()),
                Some((m.boundary_string(attracting), m.boundary_string(repelling))),
            ),
            _ => (None, None),
        };
        rows.push(ClassifyRow {
            element: m.elem_string(&elem),
            class: class.kind_name(),
            translation_length: tl,
            fixed_points: fps,
        });
    }
    Ok(rows)
}

/// Fixed points of rotated powers: used as a dense family of boundary
/// samples (fixed points of loxodromics are dense in the limit set).
pub fn loxodromic_fixed_points_in_ball<M: ModelSpace>(
    m: &M,
    gens: &[M::Elem],
    radius: usize,
) -> Result<Vec<(M::Elem, M::Boundary, M::Boundary)>, IsometryError> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<(M::Boundary, M::Boundary)> = BTreeSet::new();
    for el in ball_elements(m, gens, radius) {
        if let IsometryClass::Loxodromic {
            attracting,
            repelling,
            ..
        } = m.classify(&el.elem, DEFAULT_ORBIT_BUDGET)?
        {
            if seen.insert((attracting.clone(), repelling.clone())) {
                out.push((el.elem, attracting, repelling));
            }
        }
    }
    Ok(out)
}
