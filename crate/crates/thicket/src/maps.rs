//! Strictly monotone real maps with computable inverses.
//!
//! Affine and piecewise-linear maps are exact; the quadratic family
//! `x ↦ (x−x₀)² + y₀` (restricted to its increasing branch) has an exact
//! forward map and an outward-rounded inverse; arbitrary smooth maps are
//! supplied as enclosure-valued evaluator pairs. Preimages of interval unions
//! are exact for the exact variants and guaranteed *outer* enclosures
//! otherwise, so an empty preimage intersection certifies true emptiness.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::enclosure::Enc;
use crate::interval::{Interval, IntervalUnion};
use crate::rational::Q;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("affine map needs a nonzero slope")]
    ZeroSlope,
    #[error("map must be strictly increasing on its domain")]
    NotIncreasing,
    #[error("piecewise-linear map needs at least one breakpoint")]
    NoBreakpoints,
    #[error("quadratic branch domain must sit right of the vertex")]
    BadQuadraticDomain,
    #[error("derivative bounds must satisfy 0 < c1 <= c2")]
    BadDerivativeBounds,
    #[error("inverse evaluator inconsistent with forward map at x = {0}")]
    InverseMismatch(Q),
    #[error("point {0} outside the map domain")]
    OutsideDomain(Q),
}

/// `x ↦ a·x + b`, `a ≠ 0`. Negative slopes are allowed (orientation
/// reversing).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    a: Q,
    b: Q,
}

impl AffineMap {
    pub fn new(a: Q, b: Q) -> Result<AffineMap, MapError> {
        if a.is_zero() {
            return Err(MapError::ZeroSlope);
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity() -> AffineMap {
        AffineMap { a: Q::one(), b: Q::zero() }
    }

    pub fn slope(&self) -> &Q {
        &self.a
    }

    pub fn offset(&self) -> &Q {
        &self.b
    }

    pub fn apply(&self, x: &Q) -> Q {
        &self.a * x + &self.b
    }

    pub fn invert(&self, y: &Q) -> Q {
        (y - &self.b) / &self.a
    }

    pub fn apply_interval(&self, iv: &Interval) -> Interval {
        Interval::spanning(self.apply(iv.lo()), self.apply(iv.hi()))
    }

    pub fn invert_interval(&self, iv: &Interval) -> Interval {
        Interval::spanning(self.invert(iv.lo()), self.invert(iv.hi()))
    }

    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap { a: &self.a * &inner.a, b: &self.a * &inner.b + &self.b }
    }

    pub fn inverse_map(&self) -> AffineMap {
        AffineMap { a: self.a.recip(), b: -&self.b / &self.a }
    }
}

/// Strictly increasing piecewise-linear map, extended affinely beyond the
/// first and last breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinearMap {
    points: Vec<(Q, Q)>,
    left_slope: Q,
    right_slope: Q,
}

impl PiecewiseLinearMap {
    pub fn new(points: Vec<(Q, Q)>, left_slope: Q, right_slope: Q) -> Result<Self, MapError> {
        if points.is_empty() {
            return Err(MapError::NoBreakpoints);
        }
        if !left_slope.is_positive() || !right_slope.is_positive() {
            return Err(MapError::NotIncreasing);
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(MapError::NotIncreasing);
            }
        }
        Ok(PiecewiseLinearMap { points, left_slope, right_slope })
    }

    pub fn apply(&self, x: &Q) -> Q {
        let first = &self.points[0];
        let last = self.points.last().unwrap();
        if x <= &first.0 {
            return &first.1 + &(&self.left_slope * &(x - &first.0));
        }
        if x >= &last.0 {
            return &last.1 + &(&self.right_slope * &(x - &last.0));
        }
        let idx = self.points.partition_point(|(px, _)| px < x);
        let (x0, y0) = &self.points[idx - 1];
        let (x1, y1) = &self.points[idx];
        y0 + &((y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn invert(&self, y: &Q) -> Q {
        let first = &self.points[0];
        let last = self.points.last().unwrap();
        if y <= &first.1 {
            return &first.0 + &(&(y - &first.1) / &self.left_slope);
        }
        if y >= &last.1 {
            return &last.0 + &(&(y - &last.1) / &self.right_slope);
        }
        let idx = self.points.partition_point(|(_, py)| py < y);
        let (x0, y0) = &self.points[idx - 1];
        let (x1, y1) = &self.points[idx];
        x0 + &((x1 - x0) * (y - y0) / (y1 - y0))
    }

    pub fn slope_bounds(&self) -> (Q, Q) {
        let mut lo = self.left_slope.clone().min(self.right_slope.clone());
        let mut hi = self.left_slope.clone().max(self.right_slope.clone());
        for w in self.points.windows(2) {
            let s = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            if s < lo {
                lo = s.clone();
            }
            if s > hi {
                hi = s;
            }
        }
        (lo, hi)
    }
}

/// The increasing branch of `x ↦ (x−x₀)² + y₀` on a domain right of the
/// vertex. The forward map is exact on rationals; the inverse rounds
/// outward through a square-root enclosure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticMap {
    x0: Q,
    y0: Q,
    domain: Interval,
}

impl QuadraticMap {
    pub fn new(x0: Q, y0: Q, domain: Interval) -> Result<QuadraticMap, MapError> {
        if domain.lo() < &x0 {
            return Err(MapError::BadQuadraticDomain);
        }
        Ok(QuadraticMap { x0, y0, domain })
    }

    pub fn apply(&self, x: &Q) -> Q {
        let d = x - &self.x0;
        &d * &d + &self.y0
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    /// Derivative bounds 2(x−x₀) over the domain, exact.
    pub fn derivative_bounds(&self) -> (Q, Q) {
        let two = Q::from_int(2);
        (
            &two * &(self.domain.lo() - &self.x0),
            &two * &(self.domain.hi() - &self.x0),
        )
    }

    /// Outer enclosure of `x₀ + √(y − y₀)`; `y` must satisfy `y ≥ y₀`.
    pub fn invert_enc(&self, y: &Q, bits: u32) -> Enc {
        let shifted = y - &self.y0;
        assert!(!shifted.is_negative(), "inverse below the vertex");
        Enc::exact(shifted).sqrt(bits).add(&Enc::exact(self.x0.clone()))
    }
}

/// Smooth monotone map given by enclosure evaluators. The forward and
/// inverse evaluators take a rational point and a precision and return a
/// guaranteed enclosure of the image.
#[derive(Clone)]
pub struct CustomMap {
    pub forward: Arc<dyn Fn(&Q, u32) -> Enc + Send + Sync>,
    pub inverse: Arc<dyn Fn(&Q, u32) -> Enc + Send + Sync>,
    pub domain: Interval,
    pub c1: Q,
    pub c2: Q,
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap")
            .field("domain", &self.domain)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish_non_exhaustive()
    }
}

/// A strictly monotone map together with everything preimage computations
/// need.
#[derive(Clone, Debug)]
pub enum MonotoneMapSpec {
    Affine(AffineMap),
    PiecewiseLinear(PiecewiseLinearMap),
    Quadratic(QuadraticMap),
    Custom(CustomMap),
}

impl MonotoneMapSpec {
    pub fn affine(a: Q, b: Q) -> Result<MonotoneMapSpec, MapError> {
        AffineMap::new(a, b).map(MonotoneMapSpec::Affine)
    }

    pub fn translation(t: Q) -> MonotoneMapSpec {
        MonotoneMapSpec::Affine(AffineMap::new(Q::one(), t).expect("slope one"))
    }

    /// Preimages are exact (no outward rounding) for this variant.
    pub fn is_exact(&self) -> bool {
        matches!(self, MonotoneMapSpec::Affine(_) | MonotoneMapSpec::PiecewiseLinear(_))
    }

    pub fn domain(&self) -> Option<&Interval> {
        match self {
            MonotoneMapSpec::Affine(_) | MonotoneMapSpec::PiecewiseLinear(_) => None,
            MonotoneMapSpec::Quadratic(m) => Some(&m.domain),
            MonotoneMapSpec::Custom(m) => Some(&m.domain),
        }
    }

    /// Bi-Lipschitz constants `(c1, c2)` on the domain.
    pub fn bilip_constants(&self) -> (Q, Q) {
        match self {
            MonotoneMapSpec::Affine(m) => (m.a.abs(), m.a.abs()),
            MonotoneMapSpec::PiecewiseLinear(m) => m.slope_bounds(),
            MonotoneMapSpec::Quadratic(m) => m.derivative_bounds(),
            MonotoneMapSpec::Custom(m) => (m.c1.clone(), m.c2.clone()),
        }
    }

    /// Exact image of a rational point, when the forward map is rational.
    pub fn apply_exact(&self, x: &Q) -> Option<Q> {
        match self {
            MonotoneMapSpec::Affine(m) => Some(m.apply(x)),
            MonotoneMapSpec::PiecewiseLinear(m) => Some(m.apply(x)),
            MonotoneMapSpec::Quadratic(m) => Some(m.apply(x)),
            MonotoneMapSpec::Custom(_) => None,
        }
    }

    pub fn apply_enc(&self, x: &Q, bits: u32) -> Enc {
        match self {
            MonotoneMapSpec::Custom(m) => (m.forward)(x, bits),
            _ => Enc::exact(self.apply_exact(x).expect("exact forward")),
        }
    }

    /// Outer enclosure of the image of an interval (after clipping to the
    /// domain when there is one). `None` when the clip is empty.
    pub fn image_outer(&self, iv: &Interval, bits: u32) -> Option<Interval> {
        let clipped = match self.domain() {
            Some(dom) => iv.intersect(dom)?,
            None => iv.clone(),
        };
        match self {
            MonotoneMapSpec::Affine(m) => Some(m.apply_interval(&clipped)),
            MonotoneMapSpec::PiecewiseLinear(m) => Some(Interval::spanning(
                m.apply(clipped.lo()),
                m.apply(clipped.hi()),
            )),
            MonotoneMapSpec::Quadratic(m) => Some(
                Interval::new(m.apply(clipped.lo()), m.apply(clipped.hi())).expect("increasing"),
            ),
            MonotoneMapSpec::Custom(m) => {
                let lo = (m.forward)(clipped.lo(), bits);
                let hi = (m.forward)(clipped.hi(), bits);
                Some(Interval::new(lo.lo().clone(), hi.hi().clone()).expect("increasing"))
            }
        }
    }

    /// Preimage of an interval union: exact for affine and piecewise-linear,
    /// an outer enclosure (⊇ the true preimage restricted to the domain)
    /// otherwise.
    pub fn preimage(&self, u: &IntervalUnion, bits: u32) -> IntervalUnion {
        match self {
            MonotoneMapSpec::Affine(m) => IntervalUnion::from_intervals(
                u.parts().iter().map(|iv| m.invert_interval(iv)),
            ),
            MonotoneMapSpec::PiecewiseLinear(m) => IntervalUnion::from_intervals(
                u.parts()
                    .iter()
                    .map(|iv| Interval::spanning(m.invert(iv.lo()), m.invert(iv.hi()))),
            ),
            MonotoneMapSpec::Quadratic(m) => {
                let range = Interval::new(m.apply(m.domain.lo()), m.apply(m.domain.hi()))
                    .expect("increasing");
                let mut out = Vec::new();
                for iv in u.clip(&range).parts() {
                    let lo = m.invert_enc(iv.lo(), bits);
                    let hi = m.invert_enc(iv.hi(), bits);
                    let outer = Interval::new(lo.lo().clone(), hi.hi().clone())
                        .expect("increasing");
                    if let Some(clipped) = outer.intersect(&m.domain) {
                        out.push(clipped);
                    }
                }
                IntervalUnion::from_intervals(out)
            }
            MonotoneMapSpec::Custom(m) => {
                let range_lo = (m.forward)(m.domain.lo(), bits);
                let range_hi = (m.forward)(m.domain.hi(), bits);
                let range = Interval::new(range_lo.lo().clone(), range_hi.hi().clone())
                    .expect("increasing");
                let mut out = Vec::new();
                for iv in u.clip(&range).parts() {
                    let lo = (m.inverse)(iv.lo(), bits);
                    let hi = (m.inverse)(iv.hi(), bits);
                    let outer = Interval::new(
                        lo.lo().clone().min(hi.lo().clone()),
                        hi.hi().clone().max(lo.hi().clone()),
                    )
                    .expect("ordered");
                    if let Some(clipped) = outer.intersect(&m.domain) {
                        out.push(clipped);
                    }
                }
                IntervalUnion::from_intervals(out)
            }
        }
    }

    /// Inner approximation of the preimage of an interval (⊆ the true
    /// preimage), used to *prove* window containments. `None` when the inner
    /// interval is empty or cannot be certified.
    pub fn preimage_inner(&self, iv: &Interval, bits: u32) -> Option<Interval> {
        match self {
            MonotoneMapSpec::Affine(m) => Some(m.invert_interval(iv)),
            MonotoneMapSpec::PiecewiseLinear(m) => {
                Some(Interval::spanning(m.invert(iv.lo()), m.invert(iv.hi())))
            }
            MonotoneMapSpec::Quadratic(m) => {
                let range =
                    Interval::new(m.apply(m.domain.lo()), m.apply(m.domain.hi())).ok()?;
                let clipped = iv.intersect(&range)?;
                let lo = m.invert_enc(clipped.lo(), bits);
                let hi = m.invert_enc(clipped.hi(), bits);
                Interval::new(lo.hi().clone(), hi.lo().clone()).ok()
            }
            MonotoneMapSpec::Custom(m) => {
                let lo = (m.inverse)(iv.lo(), bits);
                let hi = (m.inverse)(iv.hi(), bits);
                Interval::new(lo.hi().clone(), hi.lo().clone())
                    .ok()?
                    .intersect(&m.domain)
            }
        }
    }

    /// Check `inverse ∘ forward = identity` at the given sample points
    /// (exactly for exact variants, through enclosures otherwise).
    pub fn validate(&self, samples: &[Q], bits: u32) -> Result<(), MapError> {
        for x in samples {
            if let Some(dom) = self.domain() {
                if !dom.contains(x) {
                    return Err(MapError::OutsideDomain(x.clone()));
                }
            }
            match self {
                MonotoneMapSpec::Affine(m) => {
                    if m.invert(&m.apply(x)) != *x {
                        return Err(MapError::InverseMismatch(x.clone()));
                    }
                }
                MonotoneMapSpec::PiecewiseLinear(m) => {
                    if m.invert(&m.apply(x)) != *x {
                        return Err(MapError::InverseMismatch(x.clone()));
                    }
                }
                MonotoneMapSpec::Quadratic(m) => {
                    if !m.invert_enc(&m.apply(x), bits).contains(x) {
                        return Err(MapError::InverseMismatch(x.clone()));
                    }
                }
                MonotoneMapSpec::Custom(m) => {
                    let y = (m.forward)(x, bits);
                    let back_lo = (m.inverse)(y.lo(), bits);
                    let back_hi = (m.inverse)(y.hi(), bits);
                    let hull = Interval::new(
                        back_lo.lo().clone().min(back_hi.lo().clone()),
                        back_hi.hi().clone().max(back_lo.hi().clone()),
                    )
                    .map_err(|_| MapError::InverseMismatch(x.clone()))?;
                    if !hull.contains(x) {
                        return Err(MapError::InverseMismatch(x.clone()));
                    }
                }
            }
        }
        Ok(())
    }
}
