//! Declarative descriptions of compact subsets of the line and their level-n
//! construction covers.
//!
//! A descriptor is one of
//!   * an explicit finite gap structure inside a hull,
//!   * a self-similar IFS of disjoint contractions listed left to right, or
//!   * the middle-ε Cantor set (sugar for the two-map IFS with ratio
//!     `(1−ε)/2`).
//!
//! IFS children are given in hull-relative coordinates and must start at the
//! left hull endpoint and end at the right one, so the declared hull really is
//! the convex hull of the attractor and construction-interval endpoints stay
//! in the set at every depth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalUnion};
use crate::maps::AffineMap;
use crate::rational::Q;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("degenerate set")]
    DegenerateHull,
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(Q),
    #[error("gap {0:?} does not lie strictly inside the hull")]
    GapOutsideHull(Interval),
    #[error("gaps {0:?} and {1:?} overlap")]
    GapsOverlap(Interval, Interval),
    #[error("gap {0:?} is empty")]
    EmptyGap(Interval),
    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("ratio {0} outside (0,1)")]
    BadRatio(Q),
    #[error("ratios and offsets have different lengths")]
    MismatchedIfs,
    #[error("IFS children must be disjoint and ordered left to right")]
    ChildrenOverlap,
    #[error("IFS children must span the hull (first offset 0, last child ending at 1)")]
    HullNotSpanned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetKind {
    /// Hull minus finitely many open gaps.
    ExplicitGaps { gaps: Vec<Interval> },
    /// Contractions with hull-relative ratios and offsets, left to right.
    SelfSimilarIfs { ratios: Vec<Q>, offsets: Vec<Q> },
    /// Middle-ε Cantor set.
    MiddleEpsilon { epsilon: Q },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDescriptor {
    hull: Interval,
    kind: SetKind,
}

/// One complementary interval together with the two closed pieces it leaves
/// behind when removed, in the decreasing-length removal order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub gap: Interval,
    pub left: Interval,
    pub right: Interval,
}

impl GapRecord {
    pub fn gap_length(&self) -> Q {
        self.gap.length()
    }

    pub fn min_flank(&self) -> Q {
        self.left.length().min(self.right.length())
    }
}

/// Result of the exact membership procedure for a rational point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// Certified in the set itself (not just a cover).
    InSet { depth: u32, reason: MembershipReason },
    /// Falls in a gap of the depth-`depth` cover, hence not in the set.
    NotInSet { depth: u32 },
    /// Still inside a construction interval at the depth budget.
    Undecided { depth: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipReason {
    /// The point is an endpoint of a construction interval.
    Endpoint,
    /// The rescaled itinerary of the point repeats, so it never escapes.
    PeriodicItinerary,
    /// Explicit-gap descriptor: the point avoids every gap.
    ExplicitRegion,
}

impl Membership {
    pub fn is_in_set(&self) -> bool {
        matches!(self, Membership::InSet { .. })
    }
}

impl SetDescriptor {
    pub fn new(hull: Interval, kind: SetKind) -> Result<SetDescriptor, DescriptorError> {
        let d = SetDescriptor { hull, kind };
        d.validate()?;
        Ok(d)
    }

    pub fn middle_epsilon(epsilon: Q) -> Result<SetDescriptor, DescriptorError> {
        SetDescriptor::new(Interval::unit(), SetKind::MiddleEpsilon { epsilon })
    }

    pub fn explicit_gaps(hull: Interval, gaps: Vec<Interval>) -> Result<SetDescriptor, DescriptorError> {
        SetDescriptor::new(hull, SetKind::ExplicitGaps { gaps })
    }

    pub fn ifs(hull: Interval, ratios: Vec<Q>, offsets: Vec<Q>) -> Result<SetDescriptor, DescriptorError> {
        SetDescriptor::new(hull, SetKind::SelfSimilarIfs { ratios, offsets })
    }

    pub fn hull(&self) -> &Interval {
        &self.hull
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn is_degenerate(&self) -> bool {
        self.hull.is_point()
    }

    fn validate(&self) -> Result<(), DescriptorError> {
        match &self.kind {
            SetKind::ExplicitGaps { gaps } => {
                if self.hull.is_point() && !gaps.is_empty() {
                    return Err(DescriptorError::GapOutsideHull(gaps[0].clone()));
                }
                let mut sorted: Vec<&Interval> = gaps.iter().collect();
                sorted.sort_by(|a, b| a.lo().cmp(b.lo()));
                for g in &sorted {
                    if g.is_point() {
                        return Err(DescriptorError::EmptyGap((*g).clone()));
                    }
                    if g.lo() <= self.hull.lo() || g.hi() >= self.hull.hi() {
                        return Err(DescriptorError::GapOutsideHull((*g).clone()));
                    }
                }
                for w in sorted.windows(2) {
                    // Open intervals may share an endpoint but not overlap.
                    if w[1].lo() < w[0].hi() {
                        return Err(DescriptorError::GapsOverlap(w[0].clone(), w[1].clone()));
                    }
                }
                Ok(())
            }
            SetKind::SelfSimilarIfs { ratios, offsets } => {
                if self.hull.is_point() {
                    return Err(DescriptorError::DegenerateHull);
                }
                if ratios.len() != offsets.len() {
                    return Err(DescriptorError::MismatchedIfs);
                }
                if ratios.len() < 2 {
                    return Err(DescriptorError::TooFewMaps(ratios.len()));
                }
                for r in ratios {
                    if !r.is_positive() || *r >= Q::one() {
                        return Err(DescriptorError::BadRatio(r.clone()));
                    }
                }
                let one = Q::one();
                if !offsets[0].is_zero() {
                    return Err(DescriptorError::HullNotSpanned);
                }
                for i in 0..ratios.len() {
                    let end = &offsets[i] + &ratios[i];
                    if i + 1 < ratios.len() {
                        if end >= offsets[i + 1] {
                            return Err(DescriptorError::ChildrenOverlap);
                        }
                    } else if end != one {
                        return Err(DescriptorError::HullNotSpanned);
                    }
                }
                Ok(())
            }
            SetKind::MiddleEpsilon { epsilon } => {
                if self.hull.is_point() {
                    return Err(DescriptorError::DegenerateHull);
                }
                if !epsilon.is_positive() || *epsilon >= Q::one() {
                    return Err(DescriptorError::BadEpsilon(epsilon.clone()));
                }
                Ok(())
            }
        }
    }

    /// Hull-relative `(offset, ratio)` pairs of the level-one children, for
    /// the IFS-like kinds.
    pub fn relative_children(&self) -> Option<Vec<(Q, Q)>> {
        match &self.kind {
            SetKind::ExplicitGaps { .. } => None,
            SetKind::SelfSimilarIfs { ratios, offsets } => {
                Some(offsets.iter().cloned().zip(ratios.iter().cloned()).collect())
            }
            SetKind::MiddleEpsilon { epsilon } => {
                // λ = (1−ε)/2; children at 0 and 1−λ.
                let lambda = (Q::one() - epsilon) / Q::from_int(2);
                Some(vec![
                    (Q::zero(), lambda.clone()),
                    (Q::one() - &lambda, lambda),
                ])
            }
        }
    }

    /// View of a middle-ε descriptor as the equivalent two-map IFS.
    pub fn as_ifs(&self) -> Option<SetDescriptor> {
        let children = self.relative_children()?;
        let (offsets, ratios) = children.into_iter().unzip();
        Some(SetDescriptor {
            hull: self.hull.clone(),
            kind: SetKind::SelfSimilarIfs { ratios, offsets },
        })
    }

    /// Gaps in canonical removal order: decreasing length, ties by ascending
    /// left endpoint. For explicit gaps only the first `depth` survive when
    /// `depth` is smaller than the gap count.
    fn gap_intervals(&self, depth: u32) -> Vec<Interval> {
        match &self.kind {
            SetKind::ExplicitGaps { gaps } => {
                let mut sorted = gaps.clone();
                sort_gaps(&mut sorted);
                sorted.truncate(depth.min(gaps.len() as u32) as usize);
                sorted
            }
            _ => {
                let children = self.relative_children().expect("ifs-like");
                let mut out = Vec::new();
                let mut level: Vec<Interval> = vec![self.hull.clone()];
                for _ in 0..depth {
                    let mut next = Vec::with_capacity(level.len() * children.len());
                    for parent in &level {
                        let len = parent.length();
                        let mut prev_end: Option<Q> = None;
                        for (off, ratio) in &children {
                            let lo = parent.lo() + &(off * &len);
                            let hi = &lo + &(ratio * &len);
                            if let Some(pe) = prev_end.take() {
                                out.push(Interval::new(pe, lo.clone()).expect("ordered children"));
                            }
                            prev_end = Some(hi.clone());
                            next.push(Interval::new(lo, hi).expect("ratio positive"));
                        }
                    }
                    level = next;
                }
                sort_gaps(&mut out);
                out
            }
        }
    }

    /// Depth-`n` construction cover `C_n`.
    pub fn refine(&self, depth: u32) -> IntervalUnion {
        match &self.kind {
            SetKind::ExplicitGaps { .. } => {
                let gaps = self.gap_intervals(depth);
                remove_gaps(&self.hull, &gaps)
            }
            _ => {
                let children = self.relative_children().expect("ifs-like");
                let mut level: Vec<Interval> = vec![self.hull.clone()];
                for _ in 0..depth {
                    let mut next = Vec::with_capacity(level.len() * children.len());
                    for parent in &level {
                        let len = parent.length();
                        for (off, ratio) in &children {
                            let lo = parent.lo() + &(off * &len);
                            let hi = &lo + &(ratio * &len);
                            next.push(Interval::new(lo, hi).expect("ratio positive"));
                        }
                    }
                    level = next;
                }
                IntervalUnion::from_intervals(level)
            }
        }
    }

    /// All complementary gaps of `refine(depth)` with the flanking pieces
    /// produced by removing them in decreasing-length order (ties broken by
    /// ascending left endpoint).
    pub fn gaps(&self, depth: u32) -> Vec<GapRecord> {
        let gaps = self.gap_intervals(depth);
        gap_records(&self.hull, &gaps)
    }

    /// Total number of gaps an explicit descriptor carries, or the gap count
    /// of the depth-`n` cover for IFS-like kinds.
    pub fn gap_count(&self, depth: u32) -> usize {
        match &self.kind {
            SetKind::ExplicitGaps { gaps } => gaps.len().min(depth as usize),
            _ => {
                let k = self.relative_children().expect("ifs-like").len();
                // (k-1)·(k^0 + … + k^{depth-1}) = k^depth − 1
                (k as u64).pow(depth) as usize - 1
            }
        }
    }

    /// Sorted, deduplicated endpoints of the depth-`n` cover.
    pub fn endpoints(&self, depth: u32) -> Vec<Q> {
        let cover = self.refine(depth);
        let mut out = Vec::with_capacity(cover.parts().len() * 2);
        for iv in cover.parts() {
            out.push(iv.lo().clone());
            if iv.lo() != iv.hi() {
                out.push(iv.hi().clone());
            }
        }
        out
    }

    /// Normalize to hull `[0,1]`, returning the affine map `T(x) = (x−t)/λ`
    /// that carries the original hull onto the unit interval. The gap
    /// structure (and hence thickness) is transported exactly.
    pub fn normalize(&self) -> Result<(SetDescriptor, AffineMap), DescriptorError> {
        let lambda = self.hull.length();
        if lambda.is_zero() {
            return Err(DescriptorError::DegenerateHull);
        }
        let t = self.hull.lo().clone();
        let map = AffineMap::new(lambda.recip(), -&t / &lambda).expect("nonzero slope");
        let kind = match &self.kind {
            SetKind::ExplicitGaps { gaps } => SetKind::ExplicitGaps {
                gaps: gaps
                    .iter()
                    .map(|g| {
                        Interval::new(map.apply(g.lo()), map.apply(g.hi())).expect("monotone")
                    })
                    .collect(),
            },
            other => other.clone(),
        };
        Ok((SetDescriptor { hull: Interval::unit(), kind }, map))
    }

    /// Exact membership of a rational point, up to a depth budget.
    pub fn membership(&self, x: &Q, max_depth: u32) -> Membership {
        if !self.hull.contains(x) {
            return Membership::NotInSet { depth: 0 };
        }
        match &self.kind {
            SetKind::ExplicitGaps { gaps } => {
                for g in gaps {
                    if g.contains_strictly(x) {
                        // Excluded once every gap has been removed.
                        return Membership::NotInSet { depth: gaps.len() as u32 };
                    }
                }
                Membership::InSet { depth: 0, reason: MembershipReason::ExplicitRegion }
            }
            _ => {
                let children = self.relative_children().expect("ifs-like");
                // Work in hull-relative coordinates and renormalize at each
                // level; rationals recur exactly when the itinerary cycles.
                let len = self.hull.length();
                if len.is_zero() {
                    return if x == self.hull.lo() {
                        Membership::InSet { depth: 0, reason: MembershipReason::Endpoint }
                    } else {
                        Membership::NotInSet { depth: 0 }
                    };
                }
                let mut t = (x - self.hull.lo()) / &len;
                let mut seen: Vec<Q> = Vec::new();
                for depth in 0..=max_depth {
                    if t.is_zero() || t == Q::one() {
                        return Membership::InSet { depth, reason: MembershipReason::Endpoint };
                    }
                    if seen.contains(&t) {
                        return Membership::InSet {
                            depth,
                            reason: MembershipReason::PeriodicItinerary,
                        };
                    }
                    seen.push(t.clone());
                    let mut next = None;
                    for (off, ratio) in &children {
                        let end = off + ratio;
                        if *off <= t && t <= end {
                            next = Some((&t - off) / ratio);
                            break;
                        }
                    }
                    match next {
                        // After `depth` descents the point still sits in a
                        // level-`depth` interval; a missing child means it
                        // falls in a gap of the next cover.
                        Some(nt) => t = nt,
                        None => return Membership::NotInSet { depth: depth + 1 },
                    }
                }
                Membership::Undecided { depth: max_depth }
            }
        }
    }

    /// Shortest component length of the depth-`n` cover, computed without
    /// enumerating the cover for IFS-like kinds.
    pub fn min_interval_length(&self, depth: u32) -> Q {
        match &self.kind {
            SetKind::ExplicitGaps { .. } => self
                .refine(depth)
                .parts()
                .iter()
                .map(|iv| iv.length())
                .min()
                .unwrap_or_else(Q::zero),
            _ => {
                let children = self.relative_children().expect("ifs-like");
                let min_ratio = children.iter().map(|(_, r)| r.clone()).min().expect("k >= 2");
                self.hull.length() * min_ratio.pow(depth as i32)
            }
        }
    }

    /// Upper bound on the length of any gap *not* present in the depth-`n`
    /// cover (i.e. introduced at deeper levels). Zero for explicit structures
    /// once every gap has been removed.
    pub fn gap_length_bound_beyond(&self, depth: u32) -> Q {
        match &self.kind {
            SetKind::ExplicitGaps { gaps } => {
                if depth as usize >= gaps.len() {
                    Q::zero()
                } else {
                    let mut sorted = gaps.clone();
                    sort_gaps(&mut sorted);
                    sorted[depth as usize].length()
                }
            }
            _ => {
                let children = self.relative_children().expect("ifs-like");
                let max_ratio = children.iter().map(|(_, r)| r.clone()).max().expect("k >= 2");
                let mut max_gap_rel = Q::zero();
                for w in children.windows(2) {
                    let gap = &w[1].0 - &(&w[0].0 + &w[0].1);
                    if gap > max_gap_rel {
                        max_gap_rel = gap;
                    }
                }
                // A level-(depth+1) gap sits inside a level-depth interval.
                self.hull.length() * max_gap_rel * max_ratio.pow(depth as i32)
            }
        }
    }
}

fn sort_gaps(gaps: &mut [Interval]) {
    gaps.sort_by(|a, b| {
        b.length().cmp(&a.length()).then_with(|| a.lo().cmp(b.lo()))
    });
}

fn remove_gaps(hull: &Interval, gaps: &[Interval]) -> IntervalUnion {
    let mut cuts: Vec<&Interval> = gaps.iter().collect();
    cuts.sort_by(|a, b| a.lo().cmp(b.lo()));
    let mut parts = Vec::with_capacity(gaps.len() + 1);
    let mut lo = hull.lo().clone();
    for g in cuts {
        parts.push(Interval::new(lo, g.lo().clone()).expect("gap inside hull"));
        lo = g.hi().clone();
    }
    parts.push(Interval::new(lo, hull.hi().clone()).expect("gap inside hull"));
    IntervalUnion::from_intervals(parts)
}

/// Remove `gaps` (already in canonical order) from the hull one at a time,
/// recording the piece each removal splits.
pub fn gap_records(hull: &Interval, gaps: &[Interval]) -> Vec<GapRecord> {
    // Pieces keyed by left endpoint.
    let mut pieces: BTreeMap<Q, Q> = BTreeMap::new();
    pieces.insert(hull.lo().clone(), hull.hi().clone());
    let mut records = Vec::with_capacity(gaps.len());
    for g in gaps {
        let (p_lo, p_hi) = pieces
            .range(..=g.lo().clone())
            .next_back()
            .map(|(lo, hi)| (lo.clone(), hi.clone()))
            .expect("gap lies inside some remaining piece");
        debug_assert!(&p_hi >= g.hi(), "gap escapes its piece");
        records.push(GapRecord {
            gap: g.clone(),
            left: Interval::new(p_lo.clone(), g.lo().clone()).expect("ordered"),
            right: Interval::new(g.hi().clone(), p_hi.clone()).expect("ordered"),
        });
        pieces.remove(&p_lo);
        pieces.insert(p_lo, g.lo().clone());
        pieces.insert(g.hi().clone(), p_hi);
    }
    records
}

/// Thickness of a finite interval union, used for window restrictions: its
/// interior gaps form an explicit structure.
pub fn records_of_union(u: &IntervalUnion) -> Option<Vec<GapRecord>> {
    let hull = u.hull()?;
    let mut gaps = u.interior_gaps();
    sort_gaps(&mut gaps);
    Some(gap_records(&hull, &gaps))
}

// -- JSON schema -------------------------------------------------------------
//
// {"hull":[a,b],"kind":"gaps"|"ifs"|"middle",
//  "gaps":[[a,b],...], "ifs":{"ratios":[...],"offsets":[...]}, "epsilon":"p/q"}

#[derive(Serialize, Deserialize)]
struct IfsRepr {
    ratios: Vec<Q>,
    offsets: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct DescriptorRepr {
    hull: Interval,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaps: Option<Vec<Interval>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ifs: Option<IfsRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Q>,
}

impl Serialize for SetDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match &self.kind {
            SetKind::ExplicitGaps { gaps } => DescriptorRepr {
                hull: self.hull.clone(),
                kind: "gaps".into(),
                gaps: Some(gaps.clone()),
                ifs: None,
                epsilon: None,
            },
            SetKind::SelfSimilarIfs { ratios, offsets } => DescriptorRepr {
                hull: self.hull.clone(),
                kind: "ifs".into(),
                gaps: None,
                ifs: Some(IfsRepr { ratios: ratios.clone(), offsets: offsets.clone() }),
                epsilon: None,
            },
            SetKind::MiddleEpsilon { epsilon } => DescriptorRepr {
                hull: self.hull.clone(),
                kind: "middle".into(),
                gaps: None,
                ifs: None,
                epsilon: Some(epsilon.clone()),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SetDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<SetDescriptor, D::Error> {
        use serde::de::Error;
        let repr = DescriptorRepr::deserialize(deserializer)?;
        let kind = match repr.kind.as_str() {
            "gaps" => SetKind::ExplicitGaps { gaps: repr.gaps.unwrap_or_default() },
            "ifs" => {
                let ifs = repr.ifs.ok_or_else(|| D::Error::custom("missing \"ifs\" object"))?;
                SetKind::SelfSimilarIfs { ratios: ifs.ratios, offsets: ifs.offsets }
            }
            "middle" => {
                let epsilon =
                    repr.epsilon.ok_or_else(|| D::Error::custom("missing \"epsilon\""))?;
                SetKind::MiddleEpsilon { epsilon }
            }
            other => return Err(D::Error::custom(format!("unknown kind `{other}`"))),
        };
        SetDescriptor::new(repr.hull, kind).map_err(D::Error::custom)
    }
}
