//! Newhouse thickness under the gap and chunk definitions, plus the
//! self-similar lower bound and window-restricted local estimates.
//!
//! All values are exact rationals (or +∞ for an interval). For infinite
//! constructions the reported number is the thickness of the depth-n
//! truncation; it is labelled exact only when every deeper gap provably
//! repeats a depth-1 flank/gap ratio (middle-ε and equal-ratio IFS whose
//! shortest relative gap is at least ratio × longest relative gap).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{records_of_union, GapRecord, SetDescriptor, SetKind};
use crate::interval::Interval;
use crate::par;
use crate::rational::Q;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThicknessError {
    #[error("not a gap: zero-length complementary interval at {0:?}")]
    NotAGap(Interval),
    #[error("set is connected at this depth")]
    Connected,
    #[error("descriptor is not self-similar")]
    NotSelfSimilar,
    #[error("radii must be strictly decreasing and positive")]
    BadRadii,
}

/// Thickness magnitude: a nonnegative rational, or +∞ for an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tau {
    Finite(Q),
    Infinite,
}

impl Tau {
    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            Tau::Finite(q) => Some(q),
            Tau::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Tau::Infinite)
    }

    /// τ/(τ+1), with the convention ∞ ↦ 1 (used by the sumset bound).
    pub fn astels_share(&self) -> Q {
        match self {
            Tau::Finite(t) => t / &(t + &Q::one()),
            Tau::Infinite => Q::one(),
        }
    }
}

impl PartialOrd for Tau {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tau {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Tau::*;
        match (self, other) {
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl Serialize for Tau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Tau::Finite(q) => q.serialize(s),
            Tau::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Tau, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "inf" {
            return Ok(Tau::Infinite);
        }
        raw.parse::<Q>().map(Tau::Finite).map_err(serde::de::Error::custom)
    }
}

/// How a reported value relates to the true thickness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauKind {
    /// Equals τ(C) exactly.
    Exact,
    /// A certified lower bound for τ(C).
    LowerBound,
    /// Thickness of the depth-n truncation C_n; the true infimum may be
    /// smaller.
    DepthTruncation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThicknessValue {
    pub value: Tau,
    pub kind: TauKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub justification: Option<String>,
}

/// inf over the records of min(|L|,|R|)/|G|. Empty input means no gap was
/// removed: an interval, thickness +∞.
pub fn thickness_gap(records: &[GapRecord]) -> Result<Tau, ThicknessError> {
    let mut best: Option<Q> = None;
    for rec in records {
        let g = rec.gap_length();
        if g.is_zero() {
            return Err(ThicknessError::NotAGap(rec.gap.clone()));
        }
        let ratio = rec.min_flank() / g;
        if best.as_ref().is_none_or(|b| ratio < *b) {
            best = Some(ratio);
        }
    }
    Ok(best.map_or(Tau::Infinite, Tau::Finite))
}

/// Does every deeper gap of the construction repeat a depth-1 ratio? True
/// for middle-ε, and for equal-ratio IFS whose shortest relative gap is at
/// least ratio × longest relative gap (levels then never interleave in the
/// removal order, so each level is an exact scaled copy of level one).
fn scale_invariance_note(d: &SetDescriptor) -> Option<String> {
    match d.kind() {
        SetKind::ExplicitGaps { .. } => None,
        SetKind::MiddleEpsilon { .. } => {
            Some("self-similar: every level repeats the depth-1 flank/gap ratio".into())
        }
        SetKind::SelfSimilarIfs { .. } => {
            let children = d.relative_children()?;
            let r0 = &children[0].1;
            if children.iter().any(|(_, r)| r != r0) {
                return None;
            }
            let mut gaps = Vec::new();
            for w in children.windows(2) {
                gaps.push(&w[1].0 - &(&w[0].0 + &w[0].1));
            }
            let gmin = gaps.iter().min()?.clone();
            let gmax = gaps.iter().max()?.clone();
            (gmin >= r0 * &gmax).then(|| {
                "equal-ratio IFS with non-interleaving levels: depth-1 ratios repeat at every level"
                    .into()
            })
        }
    }
}

fn classify(d: &SetDescriptor, depth: u32) -> (TauKind, Option<u32>, Option<String>) {
    match d.kind() {
        SetKind::ExplicitGaps { .. } => (TauKind::Exact, None, Some("finite gap structure".into())),
        _ => match scale_invariance_note(d) {
            Some(note) => (TauKind::Exact, Some(depth), Some(note)),
            None => (
                TauKind::DepthTruncation,
                Some(depth),
                Some("unequal-ratio construction: deeper gaps may lower the infimum".into()),
            ),
        },
    }
}

/// Thickness of a descriptor via the gap definition at the given depth.
/// Explicit structures always use their full gap set.
pub fn thickness(d: &SetDescriptor, depth: u32) -> Result<ThicknessValue, ThicknessError> {
    if d.is_degenerate() {
        return Ok(ThicknessValue {
            value: Tau::Finite(Q::zero()),
            kind: TauKind::Exact,
            depth: None,
            justification: Some("singleton".into()),
        });
    }
    let effective = match d.kind() {
        SetKind::ExplicitGaps { gaps } => gaps.len() as u32,
        _ => depth.max(1),
    };
    let records = d.gaps(effective);
    let value = thickness_gap(&records)?;
    let (kind, depth_used, justification) = classify(d, effective);
    Ok(ThicknessValue { value, kind, depth: depth_used, justification })
}

/// Thickness via the chunk definition: inf over chunks S of the depth-n
/// cover of diam(S)/dist(S, rest). Cut positions range over gap interiors
/// and hull ends, i.e. over contiguous component runs.
pub fn thickness_chunk(d: &SetDescriptor, depth: u32) -> Result<ThicknessValue, ThicknessError> {
    let effective = match d.kind() {
        SetKind::ExplicitGaps { gaps } => gaps.len() as u32,
        _ => depth.max(1),
    };
    let cover = d.refine(effective);
    let parts = cover.parts();
    let k = parts.len();
    if k < 2 {
        return Err(ThicknessError::Connected);
    }
    // Chunk = components i..=j, proper. dist to the rest is the nearer of the
    // two adjacent gaps; runs touching a hull end use the single inner gap.
    let per_start = par::map_indices(k, |i| {
        let mut best: Option<Q> = None;
        for j in i..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            let diam = parts[j].hi() - parts[i].lo();
            let left_gap = (i > 0).then(|| parts[i].lo() - parts[i - 1].hi());
            let right_gap = (j + 1 < k).then(|| parts[j + 1].lo() - parts[j].hi());
            let dist = match (left_gap, right_gap) {
                (Some(l), Some(r)) => l.min(r),
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => unreachable!("proper chunk"),
            };
            let ratio = diam / dist;
            if best.as_ref().is_none_or(|b| ratio < *b) {
                best = Some(ratio);
            }
        }
        best
    });
    let value = per_start
        .into_iter()
        .flatten()
        .min()
        .expect("at least one chunk");
    let (kind, depth_used, justification) = classify(d, effective);
    Ok(ThicknessValue { value: Tau::Finite(value), kind, depth: depth_used, justification })
}

/// The self-similar lower bound
/// min{ λ₁/h₁₂, λ₂/min(h₁₂,h₂₃), …, λ_k/h_{k−1,k} }.
/// Hull-relative lengths are used throughout; the scale cancels.
pub fn thickness_ifs_lower(d: &SetDescriptor) -> Result<ThicknessValue, ThicknessError> {
    let children = d.relative_children().ok_or(ThicknessError::NotSelfSimilar)?;
    let k = children.len();
    let mut gaps = Vec::with_capacity(k - 1);
    for w in children.windows(2) {
        gaps.push(&w[1].0 - &(&w[0].0 + &w[0].1));
    }
    let mut best: Option<Q> = None;
    for (i, (_, ratio)) in children.iter().enumerate() {
        let h = if i == 0 {
            gaps[0].clone()
        } else if i == k - 1 {
            gaps[k - 2].clone()
        } else {
            gaps[i - 1].clone().min(gaps[i].clone())
        };
        let candidate = if h.is_zero() {
            // Touching children cannot occur post-validation, but guard.
            continue;
        } else {
            ratio / &h
        };
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    Ok(ThicknessValue {
        value: best.map_or(Tau::Infinite, Tau::Finite),
        kind: TauKind::LowerBound,
        depth: None,
        justification: Some("self-similar chunk bound from the level-one children".into()),
    })
}

/// Window-restricted estimate: max over centers and radii of the thickness
/// of the clipped depth-n cover. A finite scan only approximates the
/// sup/limsup from below, so the result is a lower bound for τ_loc.
pub fn local_thickness(
    d: &SetDescriptor,
    centers: &[Q],
    radii: &[Q],
    depth: u32,
) -> Result<ThicknessValue, ThicknessError> {
    for w in radii.windows(2) {
        if w[1] >= w[0] {
            return Err(ThicknessError::BadRadii);
        }
    }
    if radii.iter().any(|r| !r.is_positive()) {
        return Err(ThicknessError::BadRadii);
    }
    let cover = d.refine(depth);
    let windows: Vec<Interval> = centers
        .iter()
        .flat_map(|x| radii.iter().map(move |r| Interval::ball(x, r)))
        .collect();
    let values = par::map_collect(&windows, |w| {
        let clipped = cover.clip(w);
        if clipped.is_empty() {
            return None;
        }
        let records = records_of_union(&clipped)?;
        thickness_gap(&records).ok()
    });
    let best = values.into_iter().flatten().max();
    Ok(ThicknessValue {
        value: best.unwrap_or(Tau::Finite(Q::zero())),
        kind: TauKind::LowerBound,
        depth: Some(depth),
        justification: Some("finite window scan approximates the local sup from below".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn iv(a: &str, b: &str) -> Interval {
        Interval::new(q(a), q(b)).unwrap()
    }

    fn middle(eps: &str) -> SetDescriptor {
        SetDescriptor::middle_epsilon(q(eps)).unwrap()
    }

    fn middle_closed_form(eps: &str) -> Q {
        let e = q(eps);
        (Q::one() - &e) / (Q::from_int(2) * e)
    }

    #[test]
    fn middle_epsilon_closed_form_every_depth() {
        for eps in ["1/3", "1/5", "1/2", "3/5"] {
            let d = middle(eps);
            for depth in 1..=6 {
                let t = thickness(&d, depth).unwrap();
                assert_eq!(t.value, Tau::Finite(middle_closed_form(eps)), "ε={eps} n={depth}");
                assert_eq!(t.kind, TauKind::Exact);
            }
        }
    }

    #[test]
    fn single_gap_example() {
        // hull [0,1], gap (2/5,1/2): min(2/5,1/2)/(1/10) = 4
        let d = SetDescriptor::explicit_gaps(Interval::unit(), vec![iv("2/5", "1/2")]).unwrap();
        let t = thickness(&d, 1).unwrap();
        assert_eq!(t.value, Tau::Finite(q("4")));
        assert_eq!(t.kind, TauKind::Exact);
        let c = thickness_chunk(&d, 1).unwrap();
        assert_eq!(c.value, Tau::Finite(q("4")));
    }

    #[test]
    fn interval_is_infinitely_thick() {
        let d = SetDescriptor::explicit_gaps(Interval::unit(), vec![]).unwrap();
        assert_eq!(thickness(&d, 0).unwrap().value, Tau::Infinite);
    }

    #[test]
    fn singleton_has_thickness_zero() {
        let d = SetDescriptor::explicit_gaps(Interval::point(q("2")), vec![]).unwrap();
        assert_eq!(thickness(&d, 0).unwrap().value, Tau::Finite(Q::zero()));
    }

    #[test]
    fn isolated_point_gives_zero() {
        // Two gaps sharing the endpoint 1/2 isolate it; the point flank makes
        // the infimum zero under both definitions.
        let d = SetDescriptor::explicit_gaps(
            Interval::unit(),
            vec![iv("1/4", "1/2"), iv("1/2", "3/4")],
        )
        .unwrap();
        let t = thickness(&d, 2).unwrap();
        assert_eq!(t.value, Tau::Finite(Q::zero()));
        let c = thickness_chunk(&d, 2).unwrap();
        assert_eq!(c.value, Tau::Finite(Q::zero()));
    }

    #[test]
    fn chunk_equals_gap_on_middle_thirds_depth_three() {
        let d = middle("1/3");
        let g = thickness(&d, 3).unwrap();
        let c = thickness_chunk(&d, 3).unwrap();
        assert_eq!(g.value, c.value);
        assert_eq!(g.value, Tau::Finite(Q::one()));
    }

    #[test]
    fn ifs_lower_examples() {
        // middle-thirds as IFS {x/3, x/3+2/3}: min{1,1} = 1
        let d = SetDescriptor::ifs(
            Interval::unit(),
            vec![q("1/3"), q("1/3")],
            vec![q("0"), q("2/3")],
        )
        .unwrap();
        assert_eq!(thickness_ifs_lower(&d).unwrap().value, Tau::Finite(Q::one()));

        // 3 maps, ratios 1/5 at 0, 2/5, 4/5: all λ/h = 1
        let d = SetDescriptor::ifs(
            Interval::unit(),
            vec![q("1/5"), q("1/5"), q("1/5")],
            vec![q("0"), q("2/5"), q("4/5")],
        )
        .unwrap();
        assert_eq!(thickness_ifs_lower(&d).unwrap().value, Tau::Finite(Q::one()));

        // λ₁=1/2, λ₂=1/4, gap 1/4: min{2, 1} = 1
        let d = SetDescriptor::ifs(
            Interval::unit(),
            vec![q("1/2"), q("1/4")],
            vec![q("0"), q("3/4")],
        )
        .unwrap();
        assert_eq!(thickness_ifs_lower(&d).unwrap().value, Tau::Finite(Q::one()));
    }

    #[test]
    fn local_thickness_examples() {
        // Self-similar: estimate at least the ifs lower bound.
        let d = middle("1/3");
        let est = local_thickness(&d, &[q("1/6")], &[q("1/6"), q("1/18")], 4).unwrap();
        assert!(est.value >= Tau::Finite(Q::one()));

        // Window inside the interval part of {0} ∪ [1/2,1]: +∞ reported.
        let d = SetDescriptor::explicit_gaps(
            iv("-1", "1"),
            vec![iv("-3/4", "1/2")],
        )
        .unwrap();
        let est = local_thickness(&d, &[q("3/4")], &[q("1/8")], 1).unwrap();
        assert_eq!(est.value, Tau::Infinite);

        // Middle-thirds window [0,1/3] at depth 4: the window is a scaled
        // copy, thickness 1.
        let d = middle("1/3");
        let est = local_thickness(&d, &[q("1/6")], &[q("1/6")], 4).unwrap();
        assert_eq!(est.value, Tau::Finite(Q::one()));

        // All windows empty → 0.
        let est = local_thickness(&d, &[q("10")], &[q("1/4")], 2).unwrap();
        assert_eq!(est.value, Tau::Finite(Q::zero()));
    }

    #[test]
    fn zero_length_gap_is_rejected() {
        let rec = GapRecord {
            gap: Interval::point(q("1/2")),
            left: iv("0", "1/2"),
            right: iv("1/2", "1"),
        };
        assert!(matches!(thickness_gap(&[rec]), Err(ThicknessError::NotAGap(_))));
    }

    #[test]
    fn normalization_preserves_thickness_exactly() {
        let d = SetDescriptor::explicit_gaps(
            iv("2", "5"),
            vec![iv("3", "4"), iv("9/2", "19/4")],
        )
        .unwrap();
        let (nd, _) = d.normalize().unwrap();
        assert_eq!(thickness(&d, 2).unwrap().value, thickness(&nd, 2).unwrap().value);
    }
}
