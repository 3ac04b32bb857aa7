//! The (α, β, c, ρ) potential game: rule validation, Alice's gap-erasing
//! strategy for thick compact sets, strategy transports and combinators, and
//! a finite-horizon play harness.
//!
//! A play stops once Bob's radius drops below a stop radius; the final
//! interval is then classified against the running erasure union and a
//! depth-matched cover of the target set. The limit rule `ρ_m → 0` is not
//! finitely checkable, so only the per-move rules plus the stop radius are
//! enforced; every transcript records that note.
//!
//! All legality checks are exact where the exponent allows (c = 0, c = 1,
//! single erasures, perfect powers) and adaptive directed-rounding
//! comparisons otherwise.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{GapRecord, SetDescriptor};
use crate::enclosure::{pow_q, power_sum_le_one, round_up, Enc};
use crate::interval::{Interval, IntervalUnion};
use crate::maps::{AffineMap, MonotoneMapSpec};
use crate::par;
use crate::rational::Q;
use crate::thickness::{thickness, Tau};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid parameters: need alpha > 0, 0 < beta < 1, c >= 0, rho > 0")]
    InvalidParams,
    #[error("descriptor not normalized to hull [0,1]")]
    NotNormalized,
    #[error("thickness must be positive to build the erasing strategy")]
    ZeroThickness,
    #[error("parameter widening must not shrink any parameter")]
    NotWider,
    #[error("similarity ratio must be nonzero")]
    ZeroRatio,
    #[error("bi-Lipschitz transport requires a base strategy with c = 0")]
    NeedsCZero,
    #[error("transported beta must stay below 1 (c2/c1 too large)")]
    TransportedBetaTooLarge,
    #[error("combination requires matching beta, c and rho across components")]
    MismatchedComponents,
    #[error("combination requires c > 0")]
    CombineNeedsPositiveC,
    #[error("combination needs at least one component")]
    NoComponents,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameParams {
    pub alpha: Q,
    pub beta: Q,
    pub c: Q,
    pub rho: Q,
}

impl GameParams {
    pub fn new(alpha: Q, beta: Q, c: Q, rho: Q) -> Result<GameParams, GameError> {
        let p = GameParams { alpha, beta, c, rho };
        if !p.alpha.is_positive()
            || !p.beta.is_positive()
            || p.beta >= Q::one()
            || p.c.is_negative()
            || !p.rho.is_positive()
        {
            return Err(GameError::InvalidParams);
        }
        Ok(p)
    }
}

/// Closed ball [center − radius, center + radius].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Q,
    pub radius: Q,
}

impl Ball {
    pub fn new(center: Q, radius: Q) -> Ball {
        Ball { center, radius }
    }

    pub fn interval(&self) -> Interval {
        Interval::ball(&self.center, &self.radius)
    }

    pub fn from_interval(iv: &Interval) -> Ball {
        Ball { center: iv.midpoint(), radius: iv.radius() }
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.interval().contains_interval(&other.interval())
    }

    /// |B| = diameter.
    pub fn diameter(&self) -> Q {
        &self.radius * &Q::from_int(2)
    }
}

/// Alice's move: a finite collection of erased balls; empty means pass.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceMove {
    pub erased: Vec<Ball>,
}

impl AliceMove {
    pub fn pass() -> AliceMove {
        AliceMove { erased: Vec::new() }
    }

    pub fn single(ball: Ball) -> AliceMove {
        AliceMove { erased: vec![ball] }
    }

    pub fn is_pass(&self) -> bool {
        self.erased.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RuleViolation {
    /// ρ_0 < ρ.
    FirstRadius { got: Q, need: Q },
    /// ρ_m < β·ρ_{m−1}.
    RadiusDecay { got: Q, need: Q },
    /// B_m ⊄ B_{m−1}.
    NotNested,
    NonPositiveRadius,
    /// c = 0 allows at most one erased ball per turn.
    TooManyErasures { count: usize },
    /// c = 0: the single ball must satisfy ρ₁ ≤ αρ_m.
    EraseRadiusBudget { got: Q, budget: Q },
    /// c > 0: Σ ρ_i^c exceeds (αρ_m)^c.
    ErasePowerBudget,
    /// The power-sum comparison could not be separated at the precision cap;
    /// flagged as a violation rather than silently accepted.
    PowerBudgetUndecided,
}

const POWER_BITS_CAP: u32 = 2048;

pub fn validate_bob_move(
    params: &GameParams,
    prev: Option<&Ball>,
    mv: &Ball,
) -> Result<(), RuleViolation> {
    if !mv.radius.is_positive() {
        return Err(RuleViolation::NonPositiveRadius);
    }
    match prev {
        None => {
            if mv.radius < params.rho {
                return Err(RuleViolation::FirstRadius {
                    got: mv.radius.clone(),
                    need: params.rho.clone(),
                });
            }
        }
        Some(p) => {
            let need = &params.beta * &p.radius;
            if mv.radius < need {
                return Err(RuleViolation::RadiusDecay { got: mv.radius.clone(), need });
            }
            if !p.contains_ball(mv) {
                return Err(RuleViolation::NotNested);
            }
        }
    }
    Ok(())
}

pub fn validate_alice_move(
    params: &GameParams,
    bob: &Ball,
    mv: &AliceMove,
) -> Result<(), RuleViolation> {
    if mv.is_pass() {
        return Ok(());
    }
    for b in &mv.erased {
        if !b.radius.is_positive() {
            return Err(RuleViolation::NonPositiveRadius);
        }
    }
    let budget = &params.alpha * &bob.radius;
    if params.c.is_zero() {
        if mv.erased.len() > 1 {
            return Err(RuleViolation::TooManyErasures { count: mv.erased.len() });
        }
        let r = &mv.erased[0].radius;
        if *r > budget {
            return Err(RuleViolation::EraseRadiusBudget { got: r.clone(), budget });
        }
        return Ok(());
    }
    if params.c == Q::one() {
        let total: Q = mv.erased.iter().map(|b| b.radius.clone()).sum();
        if total > budget {
            return Err(RuleViolation::ErasePowerBudget);
        }
        return Ok(());
    }
    // Normalize to Σ (ρ_i/(αρ_m))^c ≤ 1 so structured ties stay exact.
    let terms: Vec<Q> = mv.erased.iter().map(|b| &b.radius / &budget).collect();
    match power_sum_le_one(&terms, &params.c, POWER_BITS_CAP) {
        Some(true) => Ok(()),
        Some(false) => Err(RuleViolation::ErasePowerBudget),
        None => Err(RuleViolation::PowerBudgetUndecided),
    }
}

/// One side's strategy. A fresh instance is used per play; state accumulates
/// over the turns of a single play.
pub trait AliceStrategy: Send {
    fn params(&self) -> &GameParams;
    fn respond(&mut self, turn: usize, bob: &Ball) -> AliceMove;
}

pub trait BobStrategy: Send {
    fn next(&mut self, turn: usize, prev: Option<&Ball>, params: &GameParams) -> Ball;
}

// ---------------------------------------------------------------------------
// Alice: the gap-erasing strategy for a thick compact set

/// Alice's strategy for S = (−∞,0) ∪ C ∪ (1,∞): when Bob's ball meets a gap
/// G_n and |B| ≤ min(|L_n|, |R_n|), erase the ball whose closure is G_n's
/// closure, provided that is legal. Otherwise pass. The erased ball's two
/// extra endpoints lie in C and never need erasing.
///
/// Parameters are (1/(τβ), β, 0, β/2); gap records must be supplied deep
/// enough that every gap longer than the final ball diameter is present.
pub struct CantorAliceStrategy {
    params: GameParams,
    records: Arc<Vec<GapRecord>>,
    /// Indices (into `records`) ordered by gap position; gaps are disjoint,
    /// so the gaps meeting a ball form a contiguous run here.
    by_position: Arc<Vec<usize>>,
    /// Records still meeting Bob's (nested) balls, in canonical order.
    candidates: Option<Vec<usize>>,
    erased: Vec<usize>,
}

fn position_index(records: &[GapRecord]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.sort_by(|&a, &b| records[a].gap.lo().cmp(records[b].gap.lo()));
    idx
}

impl CantorAliceStrategy {
    /// Build the strategy from a descriptor normalized to hull [0,1]; α is
    /// 1/(τβ) with τ the (exact or depth-truncated) thickness, ρ = β/2 and
    /// c = 0. `depth` controls how many gap records the strategy knows.
    pub fn new(d: &SetDescriptor, beta: Q, depth: u32) -> Result<CantorAliceStrategy, GameError> {
        if d.hull() != &Interval::unit() {
            return Err(GameError::NotNormalized);
        }
        let tau = thickness(d, depth).map_err(|_| GameError::ZeroThickness)?;
        let alpha = match &tau.value {
            Tau::Finite(t) if t.is_positive() => (t * &beta).recip(),
            // An interval needs no erasures; any positive budget works.
            Tau::Infinite => beta.recip(),
            _ => return Err(GameError::ZeroThickness),
        };
        let rho = &beta / &Q::from_int(2);
        let params = GameParams::new(alpha, beta, Q::zero(), rho)?;
        let records = Arc::new(d.gaps(depth));
        Ok(Self::from_records(records, params))
    }

    pub fn from_records(records: Arc<Vec<GapRecord>>, params: GameParams) -> CantorAliceStrategy {
        let by_position = Arc::new(position_index(&records));
        CantorAliceStrategy { params, records, by_position, candidates: None, erased: Vec::new() }
    }

    /// Depth such that every gap longer than 2β·stop_radius is enumerated,
    /// which is what the end-of-play classification needs.
    pub fn recommended_depth(d: &SetDescriptor, beta: &Q, stop_radius: &Q) -> u32 {
        let threshold = Q::from_int(2) * beta * stop_radius;
        let mut depth = 1;
        while d.gap_length_bound_beyond(depth) > threshold {
            depth += 1;
            assert!(depth < 64, "stop radius too small for a finite gap table");
        }
        depth
    }

    fn refresh_candidates(&mut self, ball: &Interval) {
        match &mut self.candidates {
            Some(cand) => {
                cand.retain(|&i| self.records[i].gap.overlaps(ball));
            }
            None => {
                // Gaps are disjoint, so the ones meeting the ball form a
                // contiguous run in position order.
                let recs = &self.records;
                let pos = &self.by_position;
                let start = pos.partition_point(|&i| recs[i].gap.hi() < ball.lo());
                let end = pos.partition_point(|&i| recs[i].gap.lo() <= ball.hi());
                let mut cand: Vec<usize> = pos[start..end].to_vec();
                cand.sort_unstable();
                self.candidates = Some(cand);
            }
        }
    }
}

impl AliceStrategy for CantorAliceStrategy {
    fn params(&self) -> &GameParams {
        &self.params
    }

    fn respond(&mut self, _turn: usize, bob: &Ball) -> AliceMove {
        let ball = bob.interval();
        self.refresh_candidates(&ball);
        let diameter = bob.diameter();
        let budget = &self.params.alpha * &bob.radius;
        let candidates = self.candidates.as_ref().expect("refreshed");
        for &i in candidates {
            let rec = &self.records[i];
            if diameter > rec.min_flank() {
                continue;
            }
            // First (longest, then leftmost) gap meeting B with the flank
            // condition. Skip if already erased earlier in this play: the
            // erasure is still in force and each gap is erased at most once.
            if self.erased.contains(&i) {
                return AliceMove::pass();
            }
            let radius = rec.gap_length() / Q::from_int(2);
            if radius <= budget {
                self.erased.push(i);
                return AliceMove::single(Ball::new(rec.gap.midpoint(), radius));
            }
            return AliceMove::pass();
        }
        AliceMove::pass()
    }
}

// ---------------------------------------------------------------------------
// Combinators

/// Reuse a strategy under loosened parameters (α̃ ≥ α, β̃ ≥ β, c̃ ≥ c,
/// ρ̃ ≥ ρ). Every move legal under the original parameters stays legal: the
/// budget grows with α̃ and ρ-normalized power sums shrink with c̃.
pub struct WidenedStrategy {
    inner: Box<dyn AliceStrategy>,
    params: GameParams,
}

pub fn widen_params(
    inner: Box<dyn AliceStrategy>,
    params: GameParams,
) -> Result<WidenedStrategy, GameError> {
    let base = inner.params();
    if params.alpha < base.alpha
        || params.beta < base.beta
        || params.c < base.c
        || params.rho < base.rho
    {
        return Err(GameError::NotWider);
    }
    Ok(WidenedStrategy { inner, params })
}

impl AliceStrategy for WidenedStrategy {
    fn params(&self) -> &GameParams {
        &self.params
    }

    fn respond(&mut self, turn: usize, bob: &Ball) -> AliceMove {
        self.inner.respond(turn, bob)
    }
}

/// Conjugate a strategy by the similarity x ↦ λx + t: a strategy for S
/// becomes one for λS + t with parameters (α, β, c, |λ|ρ).
pub struct SimilarityStrategy {
    inner: Box<dyn AliceStrategy>,
    map: AffineMap,
    params: GameParams,
}

pub fn transport_similarity(
    inner: Box<dyn AliceStrategy>,
    lambda: Q,
    t: Q,
) -> Result<SimilarityStrategy, GameError> {
    if lambda.is_zero() {
        return Err(GameError::ZeroRatio);
    }
    let base = inner.params().clone();
    let params = GameParams::new(
        base.alpha.clone(),
        base.beta.clone(),
        base.c.clone(),
        &base.rho * &lambda.abs(),
    )?;
    let map = AffineMap::new(lambda, t).expect("nonzero ratio");
    Ok(SimilarityStrategy { inner, map, params })
}

pub fn conjugate_ball(map: &AffineMap, ball: &Ball) -> Ball {
    Ball {
        center: map.apply(&ball.center),
        radius: &ball.radius * &map.slope().abs(),
    }
}

impl AliceStrategy for SimilarityStrategy {
    fn params(&self) -> &GameParams {
        &self.params
    }

    fn respond(&mut self, turn: usize, bob: &Ball) -> AliceMove {
        let inverse = self.map.inverse_map();
        let inner_bob = conjugate_ball(&inverse, bob);
        let reply = self.inner.respond(turn, &inner_bob);
        AliceMove {
            erased: reply.erased.iter().map(|b| conjugate_ball(&self.map, b)).collect(),
        }
    }
}

/// Transport a c = 0 strategy through a monotone bi-Lipschitz map with
/// constants (c₁, c₂): the image set is (c₂/c₁·α, c₂/c₁·β, 0, c₂ρ)-winning.
/// Bob's balls are pulled back through the inverse (exactly for affine and
/// piecewise-linear maps), and Alice's erasures are pushed forward enclosed
/// in balls.
pub struct BilipStrategy {
    inner: Box<dyn AliceStrategy>,
    map: MonotoneMapSpec,
    params: GameParams,
    bits: u32,
}

pub fn transport_bilip(
    inner: Box<dyn AliceStrategy>,
    map: MonotoneMapSpec,
    bits: u32,
) -> Result<BilipStrategy, GameError> {
    let base = inner.params().clone();
    if !base.c.is_zero() {
        return Err(GameError::NeedsCZero);
    }
    let (c1, c2) = map.bilip_constants();
    if !c1.is_positive() {
        return Err(GameError::ZeroRatio);
    }
    let distortion = &c2 / &c1;
    let beta = &distortion * &base.beta;
    if beta >= Q::one() {
        return Err(GameError::TransportedBetaTooLarge);
    }
    let params = GameParams::new(
        &distortion * &base.alpha,
        beta,
        Q::zero(),
        &c2 * &base.rho,
    )?;
    Ok(BilipStrategy { inner, map, params, bits })
}

impl AliceStrategy for BilipStrategy {
    fn params(&self) -> &GameParams {
        &self.params
    }

    fn respond(&mut self, turn: usize, bob: &Ball) -> AliceMove {
        let pre = self.map.preimage(
            &IntervalUnion::from_interval(bob.interval()),
            self.bits,
        );
        let Some(hull) = pre.hull() else { return AliceMove::pass() };
        let inner_bob = Ball::from_interval(&hull);
        let reply = self.inner.respond(turn, &inner_bob);
        let mut erased = Vec::with_capacity(reply.erased.len());
        for b in &reply.erased {
            if let Some(img) = self.map.image_outer(&b.interval(), self.bits) {
                erased.push(Ball::from_interval(&img));
            }
        }
        AliceMove { erased }
    }
}

/// Intersection combinator: play all component strategies at once under a
/// combined α with α^c = Σ α_j^c. The combined α is the smallest
/// representable rational certified to satisfy α^c ≥ Σ α_j^c, so the
/// concatenated moves stay legal.
pub struct CombinedStrategy {
    components: Vec<Box<dyn AliceStrategy>>,
    params: GameParams,
}

pub fn combine_intersection(
    components: Vec<Box<dyn AliceStrategy>>,
) -> Result<CombinedStrategy, GameError> {
    if components.is_empty() {
        return Err(GameError::NoComponents);
    }
    let first = components[0].params().clone();
    if components.len() == 1 {
        return Ok(CombinedStrategy { params: first, components });
    }
    if !first.c.is_positive() {
        return Err(GameError::CombineNeedsPositiveC);
    }
    for s in &components[1..] {
        let p = s.params();
        if p.beta != first.beta || p.c != first.c || p.rho != first.rho {
            return Err(GameError::MismatchedComponents);
        }
    }
    let bits = 128;
    let mut sum = Enc::exact(Q::zero());
    for s in &components {
        sum = sum.add(&pow_q(&s.params().alpha, &first.c, bits));
    }
    // α = (Σ α_j^c)^{1/c}, rounded up until provably sufficient.
    let exponent = Enc::exact(first.c.recip());
    let alpha_enc = sum.pow(&exponent, bits);
    let mut alpha = round_up(alpha_enc.hi(), 64);
    loop {
        let terms: Vec<Q> = components
            .iter()
            .map(|s| &s.params().alpha / &alpha)
            .collect();
        match power_sum_le_one(&terms, &first.c, POWER_BITS_CAP) {
            Some(true) => break,
            _ => {
                alpha = &alpha * &Q::new(1 << 16 | 1, 1 << 16);
            }
        }
    }
    let params = GameParams::new(alpha, first.beta, first.c, first.rho)?;
    Ok(CombinedStrategy { components, params })
}

impl AliceStrategy for CombinedStrategy {
    fn params(&self) -> &GameParams {
        &self.params
    }

    fn respond(&mut self, turn: usize, bob: &Ball) -> AliceMove {
        let mut erased = Vec::new();
        for s in &mut self.components {
            erased.extend(s.respond(turn, bob).erased);
        }
        AliceMove { erased }
    }
}

// ---------------------------------------------------------------------------
// Bob strategies

/// Shrinks by a fixed factor, keeping a target point centered.
pub struct MidpointZoomBob {
    pub target: Q,
    pub factor: Q,
}

impl BobStrategy for MidpointZoomBob {
    fn next(&mut self, _turn: usize, prev: Option<&Ball>, params: &GameParams) -> Ball {
        match prev {
            None => Ball::new(self.target.clone(), params.rho.clone()),
            Some(p) => Ball::new(self.target.clone(), &p.radius * &self.factor),
        }
    }
}

/// Steers toward the longest gap meeting the current ball.
pub struct GapSeekerBob {
    gaps: Vec<Interval>,
    factor: Q,
    start: Ball,
}

impl GapSeekerBob {
    pub fn new(d: &SetDescriptor, depth: u32, factor: Q, start: Ball) -> GapSeekerBob {
        let gaps = d.gaps(depth).into_iter().map(|r| r.gap).collect();
        GapSeekerBob { gaps, factor, start }
    }
}

impl BobStrategy for GapSeekerBob {
    fn next(&mut self, _turn: usize, prev: Option<&Ball>, _params: &GameParams) -> Ball {
        let Some(p) = prev else { return self.start.clone() };
        let radius = &p.radius * &self.factor;
        let slack = &p.radius - &radius;
        let current = p.interval();
        let aim = self
            .gaps
            .iter()
            .find(|g| g.overlaps(&current))
            .map(|g| g.midpoint())
            .unwrap_or_else(|| p.center.clone());
        let lo = &p.center - &slack;
        let hi = &p.center + &slack;
        let center = aim.max(lo).min(hi);
        Ball::new(center, radius)
    }
}

/// Uniform-random legal moves on a small rational grid (deterministic per
/// seed).
pub struct RandomBob {
    rng: ChaCha8Rng,
}

impl RandomBob {
    pub fn new(seed: u64) -> RandomBob {
        RandomBob { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl BobStrategy for RandomBob {
    fn next(&mut self, _turn: usize, prev: Option<&Ball>, params: &GameParams) -> Ball {
        match prev {
            None => {
                let center = Q::new(self.rng.gen_range(0..=64), 64);
                let stretch = Q::new(self.rng.gen_range(8..=12), 8);
                Ball::new(center, &params.rho * &stretch)
            }
            Some(p) => {
                // factor k/64 ∈ [β, 7/8]: legal decay with guaranteed progress
                let k_min = (&params.beta * &Q::from_int(64)).ceil_big();
                let k_min = i64::try_from(&k_min).unwrap_or(63).clamp(1, 56);
                let k = self.rng.gen_range(k_min..=56);
                let radius = &p.radius * &Q::new(k, 64);
                let slack = &p.radius - &radius;
                let j = self.rng.gen_range(-16..=16i64);
                let center = &p.center + &(&slack * &Q::new(j, 16));
                Ball::new(center, radius)
            }
        }
    }
}

/// Replays a fixed list of moves; once exhausted, keeps shrinking in place by
/// β so the play terminates.
pub struct ScriptedBob {
    pub moves: Vec<Ball>,
    index: usize,
}

impl ScriptedBob {
    pub fn new(moves: Vec<Ball>) -> ScriptedBob {
        ScriptedBob { moves, index: 0 }
    }
}

impl BobStrategy for ScriptedBob {
    fn next(&mut self, _turn: usize, prev: Option<&Ball>, params: &GameParams) -> Ball {
        if self.index < self.moves.len() {
            let b = self.moves[self.index].clone();
            self.index += 1;
            return b;
        }
        match prev {
            Some(p) => Ball::new(p.center.clone(), &p.radius * &params.beta),
            None => Ball::new(Q::zero(), params.rho.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Play harness

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Actor {
    Bob,
    Alice,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Turn {
    pub bob: Ball,
    pub alice: AliceMove,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    /// Final interval inside the erased union: the outcome point was erased.
    Erased,
    /// Final interval inside (erased union) ∪ (depth-matched target cover):
    /// the winning guarantee "outcome erased or in S" holds.
    InTargetCover { cover_depth: u32 },
    Undetermined { final_interval: Interval },
    /// A strategy emitted an illegal move; play stopped there.
    Violation { turn: usize, actor: Actor, violation: RuleViolation },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameTranscript {
    pub params: GameParams,
    pub stop_radius: Q,
    pub turns: Vec<Turn>,
    pub erased: IntervalUnion,
    pub outcome: Outcome,
    /// The game's limit rule lim ρ_m = 0 is non-local and not finitely
    /// checkable; only per-move rules and the stop radius are enforced.
    pub rules_note: String,
}

impl GameTranscript {
    pub fn final_ball(&self) -> Option<&Ball> {
        self.turns.last().map(|t| &t.bob)
    }
}

/// Depth-matched covers of the target set, shared across plays.
pub struct TargetCover {
    descriptor: SetDescriptor,
    max_depth: u32,
    cache: Mutex<HashMap<u32, Arc<IntervalUnion>>>,
}

impl TargetCover {
    pub fn new(descriptor: SetDescriptor, max_depth: u32) -> TargetCover {
        TargetCover { descriptor, max_depth, cache: Mutex::new(HashMap::new()) }
    }

    fn cover(&self, depth: u32) -> Arc<IntervalUnion> {
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(depth)
            .or_insert_with(|| Arc::new(self.descriptor.refine(depth)))
            .clone()
    }

    /// Largest depth whose shortest cover interval is still at least the
    /// final ball diameter, clamped to [1, max_depth].
    fn matched_depth(&self, final_diameter: &Q) -> u32 {
        let mut depth = 1;
        while depth < self.max_depth
            && self.descriptor.min_interval_length(depth + 1) >= *final_diameter
        {
            depth += 1;
        }
        depth
    }

    /// Final interval ⊆ (−∞,t] ∪ C_n ∪ [t+λ,∞) ∪ erased, with n matched to
    /// the final radius (neighbouring depths are also tried).
    fn classify(&self, final_iv: &Interval, erased: &IntervalUnion) -> Option<u32> {
        let matched = self.matched_depth(&final_iv.length());
        let candidates = [matched, matched.saturating_sub(1), matched + 1];
        for depth in candidates {
            if depth == 0 || depth > self.max_depth {
                continue;
            }
            let cover = self.cover(depth);
            let hull = self.descriptor.hull();
            let mut parts: Vec<Interval> = cover.clip(final_iv).into_parts();
            if final_iv.lo() < hull.lo() {
                parts.push(
                    Interval::new(final_iv.lo().clone(), hull.lo().clone()).expect("ordered"),
                );
            }
            if final_iv.hi() > hull.hi() {
                parts.push(
                    Interval::new(hull.hi().clone(), final_iv.hi().clone()).expect("ordered"),
                );
            }
            let mut region = IntervalUnion::from_intervals(parts);
            region = region.union(&erased.clip(final_iv));
            if region.contains_union(&IntervalUnion::from_interval(final_iv.clone())) {
                return Some(depth);
            }
        }
        None
    }
}

const TURN_CAP: usize = 100_000;

/// Run one play to the stop radius, validating every move.
pub fn play(
    bob: &mut dyn BobStrategy,
    alice: &mut dyn AliceStrategy,
    stop_radius: &Q,
    target: Option<&TargetCover>,
) -> GameTranscript {
    let params = alice.params().clone();
    let rules_note =
        "per-move rules and stop radius enforced; the limit rule lim rho_m = 0 is non-local"
            .to_owned();
    let mut turns: Vec<Turn> = Vec::new();
    let mut erased_balls: Vec<Interval> = Vec::new();
    let mut prev: Option<Ball> = None;
    let mut outcome: Option<Outcome> = None;

    for turn in 0..TURN_CAP {
        let ball = bob.next(turn, prev.as_ref(), &params);
        if let Err(violation) = validate_bob_move(&params, prev.as_ref(), &ball) {
            outcome = Some(Outcome::Violation { turn, actor: Actor::Bob, violation });
            turns.push(Turn { bob: ball, alice: AliceMove::pass() });
            break;
        }
        let reply = alice.respond(turn, &ball);
        if let Err(violation) = validate_alice_move(&params, &ball, &reply) {
            outcome = Some(Outcome::Violation { turn, actor: Actor::Alice, violation });
            turns.push(Turn { bob: ball, alice: reply });
            break;
        }
        erased_balls.extend(reply.erased.iter().map(Ball::interval));
        let done = ball.radius < *stop_radius;
        prev = Some(ball.clone());
        turns.push(Turn { bob: ball, alice: reply });
        if done {
            break;
        }
    }

    let erased = IntervalUnion::from_intervals(erased_balls);
    let outcome = outcome.unwrap_or_else(|| {
        let final_iv = prev.expect("at least one turn").interval();
        if erased.contains_union(&IntervalUnion::from_interval(final_iv.clone())) {
            Outcome::Erased
        } else if let Some(depth) = target.and_then(|t| t.classify(&final_iv, &erased)) {
            Outcome::InTargetCover { cover_depth: depth }
        } else {
            Outcome::Undetermined { final_interval: final_iv }
        }
    });

    GameTranscript { params, stop_radius: stop_radius.clone(), turns, erased, outcome, rules_note }
}

/// Re-validate every recorded move under (possibly different) parameters.
/// Loosening (α̃ ≥ α, c̃ ≥ c, ρ̃ ≥ ρ) preserves Alice legality; Bob's decay
/// rule tightens with β̃, so callers widening β should expect Bob-side
/// reports.
pub fn revalidate_transcript(
    t: &GameTranscript,
    params: &GameParams,
) -> Result<(), (usize, Actor, RuleViolation)> {
    let mut prev: Option<&Ball> = None;
    for (i, turn) in t.turns.iter().enumerate() {
        validate_bob_move(params, prev, &turn.bob).map_err(|v| (i, Actor::Bob, v))?;
        validate_alice_move(params, &turn.bob, &turn.alice)
            .map_err(|v| (i, Actor::Alice, v))?;
        prev = Some(&turn.bob);
    }
    Ok(())
}

/// Conjugate a whole transcript by x ↦ λx + t (for equivariance checks).
pub fn conjugate_transcript(t: &GameTranscript, lambda: &Q, offset: &Q) -> GameTranscript {
    let map = AffineMap::new(lambda.clone(), offset.clone()).expect("nonzero ratio");
    let scale = lambda.abs();
    let conj_move = |m: &AliceMove| AliceMove {
        erased: m.erased.iter().map(|b| conjugate_ball(&map, b)).collect(),
    };
    GameTranscript {
        params: GameParams {
            alpha: t.params.alpha.clone(),
            beta: t.params.beta.clone(),
            c: t.params.c.clone(),
            rho: &t.params.rho * &scale,
        },
        stop_radius: &t.stop_radius * &scale,
        turns: t
            .turns
            .iter()
            .map(|turn| Turn { bob: conjugate_ball(&map, &turn.bob), alice: conj_move(&turn.alice) })
            .collect(),
        erased: {
            let scaled = t.erased.scale(lambda);
            scaled.translate(offset)
        },
        outcome: t.outcome.clone(),
        rules_note: t.rules_note.clone(),
    }
}

/// Outcome tallies over a batch of independent random plays.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BatchStats {
    pub plays: usize,
    pub erased: usize,
    pub in_cover: usize,
    pub undetermined: usize,
    pub violations: usize,
    /// Plays in which Alice erased the same ball twice (must stay 0).
    pub repeated_erasures: usize,
}

/// Run `plays` independent random-Bob plays against the gap-erasing strategy
/// on a normalized descriptor. Deterministic in `seed`; plays run in
/// parallel.
pub fn batch_random_plays(
    d: &SetDescriptor,
    beta: &Q,
    stop_radius: &Q,
    plays: usize,
    seed: u64,
) -> Result<(BatchStats, Vec<GameTranscript>), GameError> {
    let depth = CantorAliceStrategy::recommended_depth(d, beta, stop_radius);
    let prototype = CantorAliceStrategy::new(d, beta.clone(), depth)?;
    let records = prototype.records.clone();
    let params = prototype.params.clone();
    let target = TargetCover::new(d.clone(), depth);

    let transcripts: Vec<GameTranscript> = par::map_indices(plays, |i| {
        let mut alice = CantorAliceStrategy::from_records(records.clone(), params.clone());
        let mut bob = RandomBob::new(seed.wrapping_add(i as u64));
        play(&mut bob, &mut alice, stop_radius, Some(&target))
    });

    let mut stats = BatchStats { plays, ..Default::default() };
    for t in &transcripts {
        match &t.outcome {
            Outcome::Erased => stats.erased += 1,
            Outcome::InTargetCover { .. } => stats.in_cover += 1,
            Outcome::Undetermined { .. } => stats.undetermined += 1,
            Outcome::Violation { .. } => stats.violations += 1,
        }
        let mut seen: Vec<&Ball> = Vec::new();
        for turn in &t.turns {
            for b in &turn.alice.erased {
                if seen.iter().any(|s| *s == b) {
                    stats.repeated_erasures += 1;
                }
                seen.push(b);
            }
        }
    }
    Ok((stats, transcripts))
}
