//! Closed intervals with rational endpoints and canonical finite unions.
//!
//! An [`IntervalUnion`] is kept sorted, pairwise disjoint and non-touching
//! (two components never share an endpoint), so emptiness, membership and set
//! algebra are all exact. Degenerate (point) components are allowed; pattern
//! witnesses are frequently single construction endpoints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Q;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("interval endpoints out of order: {0} > {1}")]
    Reversed(Q, Q),
}

/// Closed interval `[lo, hi]`, possibly a point. Some call sites use the same
/// type for open gaps; openness there is a property of the context (a gap is
/// stored by its closure, with `lo < hi`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "(Q, Q)", try_from = "(Q, Q)")]
pub struct Interval {
    lo: Q,
    hi: Q,
}

impl std::fmt::Debug for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<Interval> for (Q, Q) {
    fn from(iv: Interval) -> (Q, Q) {
        (iv.lo, iv.hi)
    }
}

impl TryFrom<(Q, Q)> for Interval {
    type Error = IntervalError;
    fn try_from((lo, hi): (Q, Q)) -> Result<Interval, IntervalError> {
        Interval::new(lo, hi)
    }
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Result<Interval, IntervalError> {
        if lo > hi {
            return Err(IntervalError::Reversed(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    /// Like [`Interval::new`] but swaps reversed endpoints.
    pub fn spanning(a: Q, b: Q) -> Interval {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: Q) -> Interval {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn unit() -> Interval {
        Interval { lo: Q::zero(), hi: Q::one() }
    }

    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn length(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Q {
        (&self.lo + &self.hi) / Q::from_int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Strict interior membership.
    pub fn contains_strictly(&self, x: &Q) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn translate(&self, t: &Q) -> Interval {
        Interval { lo: &self.lo + t, hi: &self.hi + t }
    }

    /// Image under `x ↦ s·x`; a negative factor flips the endpoints.
    pub fn scale(&self, s: &Q) -> Interval {
        Interval::spanning(&self.lo * s, &self.hi * s)
    }

    pub fn minkowski_sum(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() },
            hi: if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() },
        }
    }

    /// Closed ball representation `[c − r, c + r]`.
    pub fn ball(center: &Q, radius: &Q) -> Interval {
        Interval { lo: center - radius, hi: center + radius }
    }

    pub fn radius(&self) -> Q {
        self.length() / Q::from_int(2)
    }
}

/// Finite union of disjoint closed intervals in canonical form: sorted, with
/// `hi_j < lo_{j+1}` strictly (touching components are merged).
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl std::fmt::Debug for IntervalUnion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(&self.parts).finish()
    }
}

impl IntervalUnion {
    pub fn empty() -> IntervalUnion {
        IntervalUnion { parts: Vec::new() }
    }

    pub fn from_interval(iv: Interval) -> IntervalUnion {
        IntervalUnion { parts: vec![iv] }
    }

    /// Canonicalize an arbitrary collection: sort, then merge overlapping or
    /// touching intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(items: I) -> IntervalUnion {
        let mut parts: Vec<Interval> = items.into_iter().collect();
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalUnion { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.parts.len()
    }

    pub fn leftmost(&self) -> Option<&Q> {
        self.parts.first().map(|iv| &iv.lo)
    }

    pub fn hull(&self) -> Option<Interval> {
        match (self.parts.first(), self.parts.last()) {
            (Some(first), Some(last)) => {
                Some(Interval { lo: first.lo.clone(), hi: last.hi.clone() })
            }
            _ => None,
        }
    }

    pub fn total_length(&self) -> Q {
        self.parts.iter().map(|iv| iv.length()).sum()
    }

    pub fn contains(&self, x: &Q) -> bool {
        // Binary search on the sorted components.
        let idx = self.parts.partition_point(|iv| &iv.hi < x);
        self.parts.get(idx).is_some_and(|iv| iv.contains(x))
    }

    pub fn contains_union(&self, other: &IntervalUnion) -> bool {
        other.parts.iter().all(|iv| {
            let idx = self.parts.partition_point(|p| p.hi < iv.lo);
            self.parts.get(idx).is_some_and(|p| p.contains_interval(iv))
        })
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let a = &self.parts[i];
            let b = &other.parts[j];
            if let Some(iv) = a.intersect(b) {
                out.push(iv);
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pairwise intersections of canonical unions are already disjoint and
        // sorted, but two touching outputs can share an endpoint when a point
        // component coincides with a neighbour's endpoint; re-canonicalize.
        IntervalUnion::from_intervals(out)
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        IntervalUnion::from_intervals(self.parts.iter().chain(&other.parts).cloned())
    }

    pub fn translate(&self, t: &Q) -> IntervalUnion {
        IntervalUnion { parts: self.parts.iter().map(|iv| iv.translate(t)).collect() }
    }

    pub fn scale(&self, s: &Q) -> IntervalUnion {
        if s.is_zero() {
            return if self.is_empty() {
                IntervalUnion::empty()
            } else {
                IntervalUnion::from_interval(Interval::point(Q::zero()))
            };
        }
        let mut parts: Vec<Interval> = self.parts.iter().map(|iv| iv.scale(s)).collect();
        if s.is_negative() {
            parts.reverse();
        }
        IntervalUnion { parts }
    }

    pub fn minkowski_sum(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut sums = Vec::with_capacity(self.parts.len() * other.parts.len());
        for a in &self.parts {
            for b in &other.parts {
                sums.push(a.minkowski_sum(b));
            }
        }
        IntervalUnion::from_intervals(sums)
    }

    pub fn clip(&self, window: &Interval) -> IntervalUnion {
        let parts = self
            .parts
            .iter()
            .filter_map(|iv| iv.intersect(window))
            .collect::<Vec<_>>();
        IntervalUnion { parts }
    }

    /// Open complementary intervals strictly inside the hull of the union.
    /// Returned as interval values `(hi_j, lo_{j+1})` with `lo < hi` strict by
    /// canonicity.
    pub fn interior_gaps(&self) -> Vec<Interval> {
        self.parts
            .windows(2)
            .map(|w| Interval { lo: w[0].hi.clone(), hi: w[1].lo.clone() })
            .collect()
    }

    pub fn into_parts(self) -> Vec<Interval> {
        self.parts
    }
}

impl FromIterator<Interval> for IntervalUnion {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> IntervalUnion {
        IntervalUnion::from_intervals(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn iv(a: &str, b: &str) -> Interval {
        Interval::new(q(a), q(b)).unwrap()
    }

    #[test]
    fn canonicalization_merges_touching() {
        let u = IntervalUnion::from_intervals(vec![iv("0", "1/3"), iv("1/3", "1/2"), iv("2/3", "1")]);
        assert_eq!(u.parts(), &[iv("0", "1/2"), iv("2/3", "1")]);
    }

    #[test]
    fn intersect_example() {
        // ([0,1/3] ∪ [2/3,1]) ∩ [1/6,1/2] = [1/6,1/3]
        let u = IntervalUnion::from_intervals(vec![iv("0", "1/3"), iv("2/3", "1")]);
        let w = IntervalUnion::from_interval(iv("1/6", "1/2"));
        assert_eq!(u.intersect(&w).parts(), &[iv("1/6", "1/3")]);
    }

    #[test]
    fn translate_example() {
        let u = IntervalUnion::from_interval(iv("0", "1"));
        assert_eq!(u.translate(&q("-1/2")).parts(), &[iv("-1/2", "1/2")]);
    }

    #[test]
    fn minkowski_sum_of_depth_one_thirds_cover() {
        // ([0,1/3] ∪ [2/3,1]) + itself = [0,2]: union of the four pairwise sums
        // [0,2/3], [2/3,4/3], [2/3,4/3], [4/3,2].
        let u = IntervalUnion::from_intervals(vec![iv("0", "1/3"), iv("2/3", "1")]);
        assert_eq!(u.minkowski_sum(&u).parts(), &[iv("0", "2")]);
    }

    #[test]
    fn minkowski_sum_single_intervals_exact() {
        let a = IntervalUnion::from_interval(iv("1", "2"));
        let b = IntervalUnion::from_interval(iv("5", "7"));
        assert_eq!(a.minkowski_sum(&b).parts(), &[iv("6", "9")]);
    }

    #[test]
    fn membership_and_gaps() {
        let u = IntervalUnion::from_intervals(vec![iv("0", "1/3"), iv("2/3", "1")]);
        assert!(u.contains(&q("1/3")));
        assert!(!u.contains(&q("1/2")));
        assert_eq!(u.interior_gaps(), vec![iv("1/3", "2/3")]);
    }

    #[test]
    fn degenerate_points_are_first_class() {
        let u = IntervalUnion::from_intervals(vec![Interval::point(q("0")), iv("1/2", "1")]);
        assert_eq!(u.component_count(), 2);
        assert!(u.contains(&q("0")));
        assert_eq!(u.total_length(), q("1/2"));
    }

    #[test]
    fn scale_negative_flips() {
        let u = IntervalUnion::from_intervals(vec![iv("0", "1"), iv("2", "3")]);
        let s = u.scale(&q("-1"));
        assert_eq!(s.parts(), &[iv("-3", "-2"), iv("-1", "0")]);
    }
}
