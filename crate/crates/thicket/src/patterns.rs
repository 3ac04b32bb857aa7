//! Certificate-producing searches for arithmetic progressions, translated and
//! homothetic copies of finite sets, general monotone patterns, Gap-Lemma
//! intersections, and sumset covers.
//!
//! Everything runs against the depth-n construction cover C_n ⊇ C, so an
//! empty intersection certifies absence in C itself. Presence verdicts talk
//! about the cover; presence in C is claimed only when every pattern point is
//! separately certified in the set (construction endpoints and periodic
//! itineraries are decidable).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::SetDescriptor;
use crate::enclosure::Enc;
use crate::interval::{Interval, IntervalUnion};
use crate::maps::MonotoneMapSpec;
use crate::par;
use crate::rational::Q;
use crate::thickness::{thickness, Tau, ThicknessValue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("progression length must be at least 2, got {0}")]
    TooShort(u32),
    #[error("gap must be positive")]
    BadDelta,
    #[error("a pattern needs at least one point")]
    EmptyPattern,
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("hypothesis violated: window not inside every preimage of the hull")]
    WindowViolation,
    #[error("sumset needs at least two descriptors")]
    TooFewSummands,
    #[error("window must have positive length")]
    DegenerateWindow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Verdict {
    /// The depth-n cover contains the pattern; `in_true_set` is set when
    /// every pattern point is certified in C itself.
    PresentAtDepth { depth: u32, witness: Q, in_true_set: bool },
    /// Nonempty outer enclosure from a smooth query: presence in the cover is
    /// plausible but not exact.
    PresentCandidate { depth: u32, region: IntervalUnion },
    /// The depth-n intersection is empty; since C ⊆ C_n this certifies
    /// absence in C.
    CertifiedAbsentAtDepth { depth: u32 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_present(&self) -> bool {
        matches!(self, Verdict::PresentAtDepth { .. })
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Verdict::CertifiedAbsentAtDepth { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::PresentAtDepth { .. } => "present",
            Verdict::PresentCandidate { .. } => "present-candidate",
            Verdict::CertifiedAbsentAtDepth { .. } => "certified-absent",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub query: String,
    pub depth: u32,
    /// True when every operation on the way was exact rational arithmetic.
    pub exact: bool,
    pub parameters: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub provenance: Provenance,
}

const MEMBERSHIP_BUDGET: u32 = 64;

/// ∩_i (cover − s_i), with early exit once empty.
fn shifted_intersection(cover: &IntervalUnion, shifts: &[Q]) -> IntervalUnion {
    let mut acc: Option<IntervalUnion> = None;
    for s in shifts {
        let shifted = if s.is_zero() { cover.clone() } else { cover.translate(&-s) };
        acc = Some(match acc {
            None => shifted,
            Some(prev) => prev.intersect(&shifted),
        });
        if acc.as_ref().unwrap().is_empty() {
            break;
        }
    }
    acc.unwrap_or_else(|| cover.clone())
}

fn certify_points(d: &SetDescriptor, points: &[Q]) -> bool {
    points.iter().all(|p| d.membership(p, MEMBERSHIP_BUDGET).is_in_set())
}

fn presence_certificate(
    d: &SetDescriptor,
    cover: &IntervalUnion,
    shifts: &[Q],
    depth: u32,
    provenance: Provenance,
) -> Certificate {
    let inter = shifted_intersection(cover, shifts);
    let verdict = match inter.leftmost() {
        Some(witness) => {
            let witness = witness.clone();
            let points: Vec<Q> = shifts.iter().map(|s| &witness + s).collect();
            // Witness validity: every pattern point lies in the cover.
            for p in &points {
                debug_assert!(cover.contains(p), "witness point {p} escaped the cover");
            }
            Verdict::PresentAtDepth {
                depth,
                witness,
                in_true_set: certify_points(d, &points),
            }
        }
        None => Verdict::CertifiedAbsentAtDepth { depth },
    };
    Certificate { verdict, provenance }
}

/// Search for an m-term arithmetic progression with gap Δ in the depth-n
/// cover: the progression exists iff ∩_{k<m} (C_n − kΔ) is nonempty.
pub fn ap_search(
    d: &SetDescriptor,
    m: u32,
    delta: &Q,
    depth: u32,
) -> Result<Certificate, PatternError> {
    if m < 2 {
        return Err(PatternError::TooShort(m));
    }
    if !delta.is_positive() {
        return Err(PatternError::BadDelta);
    }
    let cover = d.refine(depth);
    let shifts: Vec<Q> = (0..m).map(|k| delta * &Q::from_int(k as i64)).collect();
    let provenance = Provenance {
        query: "arithmetic progression".into(),
        depth,
        exact: true,
        parameters: vec![("m".into(), m.to_string()), ("delta".into(), delta.to_string())],
    };
    Ok(presence_certificate(d, &cover, &shifts, depth, provenance))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSummary {
    pub present: usize,
    pub absent: usize,
    pub other: usize,
    /// Smallest grid value with a presence certificate.
    pub first_present: Option<Q>,
}

fn summarize(cells: &[(Q, Certificate)]) -> GridSummary {
    let mut s = GridSummary { present: 0, absent: 0, other: 0, first_present: None };
    for (v, c) in cells {
        match &c.verdict {
            Verdict::PresentAtDepth { .. } => {
                s.present += 1;
                if s.first_present.is_none() {
                    s.first_present = Some(v.clone());
                }
            }
            Verdict::CertifiedAbsentAtDepth { .. } => s.absent += 1,
            _ => s.other += 1,
        }
    }
    s
}

/// One certificate per Δ, evaluated in parallel, plus a summary.
pub fn ap_search_grid(
    d: &SetDescriptor,
    m: u32,
    deltas: &[Q],
    depth: u32,
) -> Result<(Vec<(Q, Certificate)>, GridSummary), PatternError> {
    if deltas.is_empty() {
        return Err(PatternError::EmptyGrid);
    }
    let cells_res = par::map_collect(deltas, |delta| {
        ap_search(d, m, delta, depth).map(|c| (delta.clone(), c))
    });
    let mut cells = Vec::with_capacity(cells_res.len());
    for c in cells_res {
        cells.push(c?);
    }
    let summary = summarize(&cells);
    Ok((cells, summary))
}

/// Translated copy of a finite point set: ∩_i (C_n − x_i).
pub fn translate_search(
    d: &SetDescriptor,
    points: &[Q],
    depth: u32,
) -> Result<Certificate, PatternError> {
    if points.is_empty() {
        return Err(PatternError::EmptyPattern);
    }
    let cover = d.refine(depth);
    let provenance = Provenance {
        query: "translated copy".into(),
        depth,
        exact: true,
        parameters: vec![(
            "points".into(),
            points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
        )],
    };
    Ok(presence_certificate(d, &cover, points, depth, provenance))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomothetyOutcome {
    pub per_lambda: Vec<(Q, Certificate)>,
    pub summary: GridSummary,
}

/// For each λ in the grid, search for λ·A + x ⊆ C_n.
pub fn homothety_search(
    d: &SetDescriptor,
    points: &[Q],
    lambdas: &[Q],
    depth: u32,
) -> Result<HomothetyOutcome, PatternError> {
    if points.is_empty() {
        return Err(PatternError::EmptyPattern);
    }
    if lambdas.is_empty() {
        return Err(PatternError::EmptyGrid);
    }
    let cells_res = par::map_collect(lambdas, |lambda| {
        let shifts: Vec<Q> = points.iter().map(|b| b * lambda).collect();
        translate_search(d, &shifts, depth).map(|mut c| {
            c.provenance.query = "homothetic copy".into();
            c.provenance.parameters.push(("lambda".into(), lambda.to_string()));
            (lambda.clone(), c)
        })
    });
    let mut per_lambda = Vec::with_capacity(cells_res.len());
    for c in cells_res {
        per_lambda.push(c?);
    }
    let summary = summarize(&per_lambda);
    Ok(HomothetyOutcome { per_lambda, summary })
}

#[derive(Clone, Debug)]
pub struct LongestApOptions {
    /// Cap on the progression length tried per candidate gap.
    pub m_max: u32,
    /// Cap on the number of candidate gaps examined after deduplication.
    pub budget: usize,
    /// Smallest candidate gap admitted; defaults to the shortest cover
    /// component so a progression cannot hide inside a single interval.
    pub min_delta: Option<Q>,
}

impl Default for LongestApOptions {
    fn default() -> Self {
        LongestApOptions { m_max: 64, budget: 20_000, min_delta: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongestApResult {
    /// Longest progression certified present in the depth-n cover.
    pub longest_at_depth: u32,
    pub best_delta: Option<Q>,
    pub best_witness: Option<Q>,
    /// Longest progression all of whose points are certified in C itself.
    pub longest_in_set: u32,
    pub in_set_delta: Option<Q>,
    pub in_set_witness: Option<Q>,
    /// True when the candidate budget was exhausted (result is a partial max).
    pub budget_exhausted: bool,
    pub candidates_tried: usize,
    pub depth: u32,
}

/// Longest arithmetic progression findable over the endpoint-difference
/// candidate grid (e − e′)/k, k ≤ m_max, floored at `min_delta`.
pub fn longest_ap(d: &SetDescriptor, depth: u32, options: &LongestApOptions) -> LongestApResult {
    let cover = d.refine(depth);
    let hull_len = d.hull().length();
    let min_delta = options
        .min_delta
        .clone()
        .unwrap_or_else(|| d.min_interval_length(depth));
    let endpoints = d.endpoints(depth);

    let mut candidates: BTreeSet<Q> = BTreeSet::new();
    'outer: for i in 0..endpoints.len() {
        for j in (i + 1)..endpoints.len() {
            let diff = &endpoints[j] - &endpoints[i];
            for k in 1..=options.m_max.max(1) {
                let delta = &diff / &Q::from_int(k as i64);
                if delta < min_delta {
                    break;
                }
                candidates.insert(delta);
                if candidates.len() >= options.budget.saturating_mul(2) {
                    break 'outer;
                }
            }
        }
    }
    let mut budget_exhausted = candidates.len() > options.budget;
    let grid: Vec<Q> = candidates.into_iter().take(options.budget).collect();

    // For each Δ, grow the progression until the running intersection dies.
    let per_delta = par::map_collect(&grid, |delta| {
        let mut inter = cover.clone();
        let mut m = 1u32;
        let mut shift = delta.clone();
        loop {
            if m >= options.m_max {
                break;
            }
            // Pigeonhole: the progression span cannot exceed the hull.
            if shift > hull_len {
                break;
            }
            let next = inter.intersect(&cover.translate(&-&shift));
            if next.is_empty() {
                break;
            }
            inter = next;
            m += 1;
            shift = &shift + delta;
        }
        let witness = inter.leftmost().cloned();
        (m, delta.clone(), witness)
    });

    let mut best: Option<(u32, Q, Q)> = None;
    let mut best_in_set: Option<(u32, Q, Q)> = None;
    for (m, delta, witness) in per_delta {
        let Some(witness) = witness else { continue };
        if best.as_ref().is_none_or(|(bm, ..)| m > *bm) {
            best = Some((m, delta.clone(), witness.clone()));
        }
        // Certified-in-set length for this candidate: walk the points while
        // membership stays decided-in.
        if m >= 2 {
            let current_best = best_in_set.as_ref().map_or(1, |(bm, ..)| *bm);
            if m > current_best {
                let mut certified = 0u32;
                for k in 0..m {
                    let p = &witness + &(&delta * &Q::from_int(k as i64));
                    if d.membership(&p, MEMBERSHIP_BUDGET).is_in_set() {
                        certified += 1;
                    } else {
                        break;
                    }
                }
                if certified >= 2 && best_in_set.as_ref().is_none_or(|(bm, ..)| certified > *bm) {
                    best_in_set = Some((certified, delta.clone(), witness.clone()));
                }
            }
        }
    }
    if grid.is_empty() {
        budget_exhausted = false;
    }
    let candidates_tried = grid.len();
    let (longest_at_depth, best_delta, best_witness) = match best {
        Some((m, d_, w)) => (m, Some(d_), Some(w)),
        None => (u32::from(!cover.is_empty()), None, None),
    };
    let (longest_in_set, in_set_delta, in_set_witness) = match best_in_set {
        Some((m, d_, w)) => (m, Some(d_), Some(w)),
        None => (0, None, None),
    };
    LongestApResult {
        longest_at_depth,
        best_delta,
        best_witness,
        longest_in_set,
        in_set_delta,
        in_set_witness,
        budget_exhausted,
        candidates_tried,
        depth,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GapLemmaVerdict {
    HypothesesHold { witness: Certificate },
    HypothesesFail { reason: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapLemmaOutcome {
    pub verdict: GapLemmaVerdict,
    /// Set when the hypotheses hold but the depth-n covers fail to intersect.
    /// The Gap Lemma makes that impossible for the true sets, so an alarm
    /// indicates an internal inconsistency, never a property of the input.
    pub alarm: bool,
    pub tau1: ThicknessValue,
    pub tau2: ThicknessValue,
}

fn product_exceeds_one(a: &Tau, b: &Tau) -> bool {
    match (a, b) {
        (Tau::Infinite, Tau::Infinite) => true,
        (Tau::Infinite, Tau::Finite(x)) | (Tau::Finite(x), Tau::Infinite) => x.is_positive(),
        (Tau::Finite(x), Tau::Finite(y)) => x * y > Q::one(),
    }
}

/// Does `hull` sit inside a bounded complementary gap of `cover`?
fn lies_in_gap(hull: &Interval, cover: &IntervalUnion) -> bool {
    cover
        .interior_gaps()
        .iter()
        .any(|g| g.lo() <= hull.lo() && hull.hi() <= g.hi())
}

/// Check the Gap Lemma hypotheses for two descriptors and search the depth-n
/// covers for an intersection witness.
pub fn gap_lemma_check(
    d1: &SetDescriptor,
    d2: &SetDescriptor,
    depth: u32,
) -> Result<GapLemmaOutcome, crate::thickness::ThicknessError> {
    let tau1 = thickness(d1, depth)?;
    let tau2 = thickness(d2, depth)?;
    let cover1 = d1.refine(depth);
    let cover2 = d2.refine(depth);

    let mut fail_reason: Option<String> = None;
    if !product_exceeds_one(&tau1.value, &tau2.value) {
        fail_reason = Some("product not > 1".into());
    } else if lies_in_gap(d1.hull(), &cover2) || lies_in_gap(d2.hull(), &cover1) {
        fail_reason = Some("lies in a gap".into());
    } else if d1.hull().intersect(d2.hull()).is_none() {
        fail_reason = Some("sets do not meet".into());
    }

    if let Some(reason) = fail_reason {
        return Ok(GapLemmaOutcome {
            verdict: GapLemmaVerdict::HypothesesFail { reason },
            alarm: false,
            tau1,
            tau2,
        });
    }

    let inter = cover1.intersect(&cover2);
    let provenance = Provenance {
        query: "gap-lemma intersection".into(),
        depth,
        exact: true,
        parameters: vec![
            ("tau1".into(), format!("{:?}", tau1.value)),
            ("tau2".into(), format!("{:?}", tau2.value)),
        ],
    };
    match inter.leftmost() {
        Some(w) => {
            let witness = w.clone();
            let in_true_set = d1.membership(&witness, MEMBERSHIP_BUDGET).is_in_set()
                && d2.membership(&witness, MEMBERSHIP_BUDGET).is_in_set();
            Ok(GapLemmaOutcome {
                verdict: GapLemmaVerdict::HypothesesHold {
                    witness: Certificate {
                        verdict: Verdict::PresentAtDepth { depth, witness, in_true_set },
                        provenance,
                    },
                },
                alarm: false,
                tau1,
                tau2,
            })
        }
        None => Ok(GapLemmaOutcome {
            verdict: GapLemmaVerdict::HypothesesHold {
                witness: Certificate {
                    verdict: Verdict::Inconclusive {
                        reason: "hypotheses hold but depth-n covers are disjoint".into(),
                    },
                    provenance,
                },
            },
            alarm: true,
            tau1,
            tau2,
        }),
    }
}

/// The filled depth-n target (−∞, t] ∪ C_n ∪ [t+λ, ∞) clipped to a window.
/// Closing the rays is exact here because the hull endpoints belong to every
/// cover.
fn filled_cover_clip(d: &SetDescriptor, cover: &IntervalUnion, clip: &Interval) -> IntervalUnion {
    let mut parts: Vec<Interval> = cover.clip(clip).into_parts();
    if clip.lo() < d.hull().lo() {
        parts.push(
            Interval::new(clip.lo().clone(), d.hull().lo().clone().min(clip.hi().clone()))
                .expect("ordered"),
        );
    }
    if clip.hi() > d.hull().hi() {
        parts.push(
            Interval::new(d.hull().hi().clone().max(clip.lo().clone()), clip.hi().clone())
                .expect("ordered"),
        );
    }
    IntervalUnion::from_intervals(parts)
}

/// General pattern query: compute window ∩ ∩_i f_i⁻¹(S_n) where
/// S_n = (−∞,t) ∪ C_n ∪ (t+λ,∞). Exact maps give exact verdicts; smooth maps
/// give outer enclosures, so presence is only a candidate while absence stays
/// certified.
pub fn pattern_search_general(
    d: &SetDescriptor,
    maps: &[MonotoneMapSpec],
    window: &Interval,
    depth: u32,
    bits: u32,
) -> Result<Certificate, PatternError> {
    if maps.is_empty() {
        return Err(PatternError::EmptyPattern);
    }
    if !window.length().is_positive() {
        return Err(PatternError::DegenerateWindow);
    }
    // Hypothesis: window ⊆ f⁻¹(hull) for every map, certified through inner
    // preimages.
    for f in maps {
        let inner = f
            .preimage_inner(d.hull(), bits)
            .ok_or(PatternError::WindowViolation)?;
        if !inner.contains_interval(window) {
            return Err(PatternError::WindowViolation);
        }
    }
    let cover = d.refine(depth);
    let exact = maps.iter().all(|f| f.is_exact());
    let mut result = IntervalUnion::from_interval(window.clone());
    for f in maps {
        let range = f
            .image_outer(window, bits)
            .ok_or(PatternError::WindowViolation)?;
        let target = filled_cover_clip(d, &cover, &range);
        let pre = f.preimage(&target, bits);
        result = result.intersect(&pre);
        if result.is_empty() {
            break;
        }
    }
    let provenance = Provenance {
        query: "general monotone pattern".into(),
        depth,
        exact,
        parameters: vec![
            ("maps".into(), maps.len().to_string()),
            ("window".into(), format!("[{}, {}]", window.lo(), window.hi())),
        ],
    };
    let verdict = if result.is_empty() {
        Verdict::CertifiedAbsentAtDepth { depth }
    } else if exact {
        let witness = result.leftmost().cloned().expect("nonempty");
        let points: Vec<Q> = maps
            .iter()
            .map(|f| f.apply_exact(&witness).expect("exact map"))
            .collect();
        Verdict::PresentAtDepth {
            depth,
            witness,
            in_true_set: points
                .iter()
                .all(|p| !d.hull().contains(p) || d.membership(p, MEMBERSHIP_BUDGET).is_in_set()),
        }
    } else {
        Verdict::PresentCandidate { depth, region: result }
    };
    Ok(Certificate { verdict, provenance })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadraticRejection {
    #[error("requires y_i >= 0")]
    NegativeY,
    #[error("requires b > max(x_i, y_i)")]
    BThreshold,
    #[error("window inequality fails: left endpoint {lhs:?} not below right endpoint {rhs:?}")]
    InequalityFails { lhs: (Q, Q), rhs: (Q, Q) },
    #[error("cannot separate the window inequality at the precision cap")]
    PrecisionExhausted,
}

#[derive(Clone, Debug)]
pub struct QuadraticSetup {
    /// Rational window rounded inward, so it certifiably sits inside the true
    /// window [max_i √(b−y_i)+x_i, min_j √(b+1−y_j)+x_j].
    pub window: Interval,
    /// Enclosure of c₁ = 2√(b − max y_i).
    pub c1: (Q, Q),
    /// Enclosure of c₂ = 2√(b + 1).
    pub c2: (Q, Q),
    pub maps: Vec<MonotoneMapSpec>,
}

/// Build the quadratic family P_i(x) = (x−x_i)² + y_i with its admissible
/// window, or reject when the defining inequality fails.
pub fn quadratic_pattern_setup(
    xs: &[Q],
    ys: &[Q],
    b: &Q,
    bits: u32,
) -> Result<QuadraticSetup, QuadraticRejection> {
    assert_eq!(xs.len(), ys.len(), "one y per x");
    assert!(!xs.is_empty(), "need at least one map");
    if ys.iter().any(Q::is_negative) {
        return Err(QuadraticRejection::NegativeY);
    }
    let max_xy = xs.iter().chain(ys.iter()).cloned().max().unwrap();
    if *b <= max_xy {
        return Err(QuadraticRejection::BThreshold);
    }

    let window_at = |bits: u32| -> ((Enc, Enc), Option<Interval>) {
        // lhs = max_i √(b−y_i)+x_i, rhs = min_j √(b+1−y_j)+x_j
        let mut lhs: Option<Enc> = None;
        let mut rhs: Option<Enc> = None;
        for (x, y) in xs.iter().zip(ys) {
            let left = Enc::exact(b - y).sqrt(bits).add(&Enc::exact(x.clone()));
            let right = Enc::exact(&(b + &Q::one()) - y)
                .sqrt(bits)
                .add(&Enc::exact(x.clone()));
            lhs = Some(match lhs {
                None => left,
                // max of enclosures: endpoint-wise max is a valid enclosure
                Some(prev) => Enc::new(
                    prev.lo().clone().max(left.lo().clone()),
                    prev.hi().clone().max(left.hi().clone()),
                ),
            });
            rhs = Some(match rhs {
                None => right,
                Some(prev) => Enc::new(
                    prev.lo().clone().min(right.lo().clone()),
                    prev.hi().clone().min(right.hi().clone()),
                ),
            });
        }
        let (lhs, rhs) = (lhs.unwrap(), rhs.unwrap());
        let window = Interval::new(lhs.hi().clone(), rhs.lo().clone()).ok();
        ((lhs, rhs), window)
    };

    let mut current_bits = bits.max(32);
    for _ in 0..5 {
        let ((lhs, rhs), window) = window_at(current_bits);
        if lhs.lo() >= rhs.hi() {
            return Err(QuadraticRejection::InequalityFails {
                lhs: (lhs.lo().clone(), lhs.hi().clone()),
                rhs: (rhs.lo().clone(), rhs.hi().clone()),
            });
        }
        if let Some(window) = window {
            if window.length().is_positive() {
                let max_y = ys.iter().cloned().max().unwrap();
                let c1 = Enc::exact(b - &max_y).sqrt(current_bits).mul_q(&Q::from_int(2));
                let c2 = Enc::exact(b + &Q::one()).sqrt(current_bits).mul_q(&Q::from_int(2));
                let maps = xs
                    .iter()
                    .zip(ys)
                    .map(|(x, y)| {
                        MonotoneMapSpec::Quadratic(
                            crate::maps::QuadraticMap::new(x.clone(), y.clone(), window.clone())
                                .expect("window right of every vertex"),
                        )
                    })
                    .collect();
                return Ok(QuadraticSetup {
                    window,
                    c1: (c1.lo().clone(), c1.hi().clone()),
                    c2: (c2.lo().clone(), c2.hi().clone()),
                    maps,
                });
            }
        }
        current_bits *= 2;
    }
    Err(QuadraticRejection::PrecisionExhausted)
}

/// Minkowski sum of depth-n covers: an exact interval union that
/// over-approximates the closure of the true sumset.
pub fn sumset_cover(ds: &[&SetDescriptor], depth: u32) -> Result<IntervalUnion, PatternError> {
    if ds.len() < 2 {
        return Err(PatternError::TooFewSummands);
    }
    let mut acc = ds[0].refine(depth);
    for d in &ds[1..] {
        acc = acc.minkowski_sum(&d.refine(depth));
    }
    Ok(acc)
}
