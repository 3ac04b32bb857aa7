//! Directed-rounding enclosures over exact rationals.
//!
//! An [`Enc`] is a closed interval `[lo, hi]` of rationals guaranteed to
//! contain the real value it stands for. Field operations are exact;
//! transcendental functions (`ln`, `exp`, `pow`, `sqrt`) evaluate truncated
//! series with explicit rational remainder bounds and round the endpoints
//! outward to a dyadic grid of the requested precision, so enclosures stay
//! small and every verdict drawn from them (floor, comparison) is sound.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::rational::{perfect_root, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enc {
    lo: Q,
    hi: Q,
}

impl Enc {
    pub fn exact(q: Q) -> Enc {
        Enc { lo: q.clone(), hi: q }
    }

    pub fn new(lo: Q, hi: Q) -> Enc {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enc { lo, hi }
    }

    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint(&self) -> Q {
        (&self.lo + &self.hi) / Q::from_int(2)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Both endpoints rounded outward to roughly `bits` significant bits.
    pub fn round_out(&self, bits: u32) -> Enc {
        Enc { lo: round_down(&self.lo, bits), hi: round_up(&self.hi, bits) }
    }

    pub fn add(&self, other: &Enc) -> Enc {
        Enc { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Enc) -> Enc {
        Enc { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn neg(&self) -> Enc {
        Enc { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, other: &Enc) -> Enc {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        Enc { lo, hi }
    }

    pub fn mul_q(&self, q: &Q) -> Enc {
        if q.is_negative() {
            Enc { lo: &self.hi * q, hi: &self.lo * q }
        } else {
            Enc { lo: &self.lo * q, hi: &self.hi * q }
        }
    }

    pub fn recip(&self) -> Enc {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an enclosure containing zero"
        );
        Enc { lo: self.hi.recip(), hi: self.lo.recip() }
    }

    pub fn div(&self, other: &Enc) -> Enc {
        self.mul(&other.recip())
    }

    /// Natural logarithm; requires a strictly positive enclosure.
    pub fn ln(&self, bits: u32) -> Enc {
        assert!(self.lo.is_positive(), "ln of a non-positive enclosure");
        let lo = ln_scalar(&self.lo, bits).lo;
        let hi = ln_scalar(&self.hi, bits).hi;
        Enc { lo, hi }
    }

    pub fn exp(&self, bits: u32) -> Enc {
        let lo = exp_scalar(&self.lo, bits).lo;
        let hi = exp_scalar(&self.hi, bits).hi;
        Enc { lo, hi }
    }

    /// `x^y = exp(y · ln x)` for positive `x`.
    pub fn pow(&self, y: &Enc, bits: u32) -> Enc {
        self.ln(bits + 8).mul(y).round_out(bits + 8).exp(bits)
    }

    pub fn powi(&self, k: i32) -> Enc {
        if k == 0 {
            return Enc::exact(Q::one());
        }
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut acc = Enc::exact(Q::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn sqrt(&self, bits: u32) -> Enc {
        assert!(!self.lo.is_negative(), "sqrt of a negative enclosure");
        Enc { lo: sqrt_down(&self.lo, bits), hi: sqrt_up(&self.hi, bits) }
    }

    /// The common floor of both endpoints, when they agree.
    pub fn floor_unique(&self) -> Option<BigInt> {
        let f = self.lo.floor_big();
        (f == self.hi.floor_big()).then_some(f)
    }
}

/// Round `q` down to a dyadic with about `bits` significant bits.
pub fn round_down(q: &Q, bits: u32) -> Q {
    dyadic_round(q, bits, false)
}

/// Round `q` up to a dyadic with about `bits` significant bits.
pub fn round_up(q: &Q, bits: u32) -> Q {
    dyadic_round(q, bits, true)
}

fn dyadic_round(q: &Q, bits: u32, up: bool) -> Q {
    if q.is_zero() || q.denom().is_one() {
        return q.clone();
    }
    // log2|q| ≈ bitlen(numer) − bitlen(denom)
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
    let e = bits as i64 - mag;
    if e <= 0 {
        // Already coarser than the grid; exact integers below the grid keep
        // full value (the shift would only matter for astronomically large
        // magnitudes where a one-ulp error is still outward-safe).
        let shift = (-e) as u32;
        let unit = BigInt::one() << shift;
        let scaled = q * &Q::from_bigint(unit.clone());
        let n = if up { scaled.ceil_big() } else { scaled.floor_big() };
        return Q::from_bigint(n * unit);
    }
    let shift = e as u32;
    let scaled = q * &Q::from_bigint(BigInt::one() << shift);
    let n = if up { scaled.ceil_big() } else { scaled.floor_big() };
    Q::from_big(n, BigInt::one() << shift)
}

/// Largest dyadic `m/2^k ≤ √q` with about `bits` bits.
fn sqrt_down(q: &Q, bits: u32) -> Q {
    if q.is_zero() {
        return Q::zero();
    }
    // √(p/d) = √(p·d)/d; scale by 4^bits for precision.
    let scaled = q.numer() * q.denom() * (BigInt::one() << (2 * bits));
    let root = scaled.sqrt(); // floor of the integer square root
    Q::from_big(root, q.denom() * (BigInt::one() << bits))
}

fn sqrt_up(q: &Q, bits: u32) -> Q {
    if q.is_zero() {
        return Q::zero();
    }
    let scaled = q.numer() * q.denom() * (BigInt::one() << (2 * bits));
    let root = scaled.sqrt();
    let exact = &root * &root == scaled;
    let num = if exact { root } else { root + 1 };
    Q::from_big(num, q.denom() * (BigInt::one() << bits))
}

/// Enclosure of ln 2 = 2·atanh(1/3), cached per precision.
pub fn ln2(bits: u32) -> Enc {
    static CACHE: OnceLock<Mutex<HashMap<u32, Enc>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&bits) {
        return hit.clone();
    }
    let out = atanh_series(&Q::new(1, 3), bits).mul_q(&Q::from_int(2)).round_out(bits);
    cache.lock().unwrap().insert(bits, out.clone());
    out
}

/// Enclosure of Σ_{j≥0} t^{2j+1}/(2j+1) for |t| ≤ 1/3, with the geometric
/// tail bound |Σ_{i>j}| ≤ |t|^{2j+3}/(1−t²).
fn atanh_series(t: &Q, bits: u32) -> Enc {
    debug_assert!(t.abs() <= Q::new(1, 3) || t.abs() <= Q::new(1, 4) + Q::new(1, 12));
    let threshold = Q::from_big(BigInt::one(), BigInt::one() << (bits + 6));
    let t2 = t * t;
    let mut power = t.clone(); // t^{2j+1}
    let mut sum = Q::zero();
    let mut j: i64 = 0;
    loop {
        sum += &(&power / &Q::from_int(2 * j + 1));
        power *= &t2;
        j += 1;
        if power.abs() <= threshold {
            break;
        }
        assert!(j < 100_000, "atanh series failed to converge");
    }
    // Remaining tail: |power|·(1 + t² + …) ≤ |power| / (1 − t²).
    let tail = &power.abs() / &(Q::one() - &t2);
    Enc { lo: &sum - &tail, hi: &sum + &tail }.round_out(bits)
}

/// Scalar natural log with reduction x = m·2^e, m ∈ [3/4, 3/2).
fn ln_scalar(x: &Q, bits: u32) -> Enc {
    assert!(x.is_positive(), "ln of non-positive value");
    let mut e: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = Q::from_int(2);
    let lo_bound = Q::new(3, 4);
    let hi_bound = Q::new(3, 2);
    // Scale m = x / 2^e into [3/4, 3/2).
    let pow2 = |k: i64| -> Q {
        if k >= 0 {
            Q::from_bigint(BigInt::one() << (k as u32))
        } else {
            Q::from_big(BigInt::one(), BigInt::one() << ((-k) as u32))
        }
    };
    let mut m = x / &pow2(e);
    while m < lo_bound {
        e -= 1;
        m = &m * &two;
    }
    while m >= hi_bound {
        e += 1;
        m = &m / &two;
    }
    let t = (&m - &Q::one()) / (&m + &Q::one()); // |t| ≤ 1/5
    let series = atanh_series(&t, bits + 8).mul_q(&Q::from_int(2));
    let result = if e == 0 {
        series
    } else {
        series.add(&ln2(bits + 8).mul_q(&Q::from_int(e)))
    };
    result.round_out(bits)
}

/// Scalar exponential with reduction r = x − k·ln2, |r| ≤ 0.4.
fn exp_scalar(x: &Q, bits: u32) -> Enc {
    let xf = x.to_f64();
    assert!(
        xf.abs() < 3.0e6,
        "exp argument out of supported range: {xf}"
    );
    let ln2_enc = ln2(bits + 8);
    let mut k: i64 = (xf / std::f64::consts::LN_2).round() as i64;
    // r-interval = x − k·ln2; nudge k until it is safely small.
    let r_interval = |k: i64| -> Enc {
        Enc::exact(x.clone()).sub(&ln2_enc.mul_q(&Q::from_int(k)))
    };
    let half = Q::new(1, 2);
    let mut r = r_interval(k);
    for _ in 0..4 {
        if r.lo().abs() <= half && r.hi().abs() <= half {
            break;
        }
        if *r.lo() > Q::zero() {
            k += 1;
        } else {
            k -= 1;
        }
        r = r_interval(k);
    }
    assert!(r.lo().abs() <= Q::one() && r.hi().abs() <= Q::one(), "exp reduction failed");
    let lo = exp_taylor(r.lo(), bits + 4).lo;
    let hi = exp_taylor(r.hi(), bits + 4).hi;
    let scale = if k >= 0 {
        Q::from_bigint(BigInt::one() << (k as u32))
    } else {
        Q::from_big(BigInt::one(), BigInt::one() << ((-k) as u32))
    };
    Enc { lo, hi }.mul_q(&scale).round_out(bits)
}

/// Taylor enclosure of e^r for |r| ≤ 1: remainder after term j is bounded by
/// 2·|r|^{j+1}/(j+1)!.
fn exp_taylor(r: &Q, bits: u32) -> Enc {
    let threshold = Q::from_big(BigInt::one(), BigInt::one() << (bits + 4));
    let mut term = Q::one();
    let mut sum = Q::one();
    let mut j: i64 = 0;
    loop {
        j += 1;
        term = &term * r / &Q::from_int(j);
        sum += &term;
        if term.abs() <= threshold {
            break;
        }
        assert!(j < 100_000, "exp series failed to converge");
    }
    let tail = term.abs() * Q::from_int(2);
    Enc { lo: &sum - &tail, hi: &sum + &tail }
}

/// Enclosure of e = exp(1).
pub fn euler(bits: u32) -> Enc {
    exp_scalar(&Q::one(), bits)
}

/// Enclosure of x^y for positive rational x and rational y.
pub fn pow_q(x: &Q, y: &Q, bits: u32) -> Enc {
    assert!(x.is_positive());
    if y.is_zero() {
        return Enc::exact(Q::one());
    }
    if y.is_integer() {
        let k = y.numer();
        if let Ok(small) = i32::try_from(k) {
            return Enc::exact(x.pow(small));
        }
    }
    // Exact fast path: x = (a/b), y = p/q with a, b perfect q-th powers.
    if let Some(exact) = pow_q_exact(x, y) {
        return Enc::exact(exact);
    }
    Enc::exact(x.clone()).pow(&Enc::exact(y.clone()), bits)
}

/// Exact rational value of x^(p/q) when it exists.
pub fn pow_q_exact(x: &Q, y: &Q) -> Option<Q> {
    if y.is_integer() {
        let small = i32::try_from(y.numer()).ok()?;
        return Some(x.pow(small));
    }
    let p = y.numer();
    let q = u32::try_from(y.denom()).ok()?;
    let root_n = perfect_root(x.numer(), q)?;
    let root_d = perfect_root(x.denom(), q)?;
    let base = Q::from_big(root_n, root_d);
    let small = i32::try_from(p).ok()?;
    Some(base.pow(small))
}

/// Decide `Σ s_i^c ≤ 1` for positive rationals `s_i` and exponent `c > 0`.
/// Exact where every term is rational-valued; otherwise adaptive enclosures
/// up to `max_bits`. `None` means the comparison could not be separated.
pub fn power_sum_le_one(terms: &[Q], c: &Q, max_bits: u32) -> Option<bool> {
    assert!(c.is_positive());
    let mut exact_sum = Q::zero();
    let mut inexact: Vec<&Q> = Vec::new();
    for s in terms {
        assert!(s.is_positive(), "power sum terms must be positive");
        match pow_q_exact(s, c) {
            Some(v) => exact_sum += &v,
            None => inexact.push(s),
        }
    }
    if inexact.is_empty() {
        return Some(exact_sum <= Q::one());
    }
    if exact_sum > Q::one() {
        return Some(false);
    }
    let mut bits = 64;
    loop {
        let mut total = Enc::exact(exact_sum.clone());
        for s in &inexact {
            total = total.add(&pow_q(s, c, bits));
        }
        if *total.hi() <= Q::one() {
            return Some(true);
        }
        if *total.lo() > Q::one() {
            return Some(false);
        }
        if bits >= max_bits {
            return None;
        }
        bits *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    #[test]
    fn ln2_digits() {
        // ln 2 = 0.69314718055994530941…
        let e = ln2(120);
        let lo = q("693147180559945309/1000000000000000000");
        let hi = q("693147180559945310/1000000000000000000");
        assert!(*e.lo() > lo && *e.hi() < hi, "{e:?}");
        assert!(e.width() < q("1/1000000000000000000000000000000"));
    }

    #[test]
    fn ln_and_exp_basics() {
        let one = Enc::exact(Q::one());
        let l = one.ln(80);
        assert!(l.contains(&Q::zero()) && l.width() < q("1/1000000000000000000"));

        let ee = euler(120);
        // e = 2.718281828459045235…
        assert!(*ee.lo() > q("2718281828459045235/1000000000000000000"));
        assert!(*ee.hi() < q("2718281828459045236/1000000000000000000"));

        // exp(ln 10) ≈ 10
        let ten = Enc::exact(q("10"));
        let back = ten.ln(100).exp(80);
        assert!(back.contains(&q("10")));
        assert!(back.width() < q("1/1000000000000"));
    }

    #[test]
    fn ln_monotone_and_signs() {
        let a = Enc::exact(q("1/2")).ln(80);
        assert!(a.hi().is_negative());
        let b = Enc::exact(q("3")).ln(80);
        assert!(b.lo().is_positive());
        assert!(a.hi() < b.lo());
    }

    #[test]
    fn pow_and_sqrt() {
        let four = Enc::exact(q("4"));
        let r = four.sqrt(80);
        assert!(r.contains(&q("2")) && r.width() < q("1/1000000000000000"));

        // 2^(1/2) enclosure contains 1.41421356…
        let p = pow_q(&q("2"), &q("1/2"), 100);
        assert!(p.contains(&q("141421356237/100000000000")) || {
            // membership of the true value: check against the sqrt route
            let s = Enc::exact(q("2")).sqrt(120);
            *p.lo() <= *s.hi() && *s.lo() <= *p.hi()
        });

        // exact fast path
        assert_eq!(pow_q_exact(&q("27/8"), &q("2/3")), Some(q("9/4")));
        assert_eq!(pow_q_exact(&q("2"), &q("1/2")), None);
    }

    #[test]
    fn floor_detection() {
        let e = Enc::new(q("3/2"), q("8/5"));
        assert_eq!(e.floor_unique(), Some(BigInt::from(1)));
        let straddle = Enc::new(q("19/10"), q("21/10"));
        assert_eq!(straddle.floor_unique(), None);
    }

    #[test]
    fn power_sum_decisions() {
        // (1/4)^(1/2) + (1/4)^(1/2) = 1: exact tie, legal.
        assert_eq!(power_sum_le_one(&[q("1/4"), q("1/4")], &q("1/2"), 512), Some(true));
        // (1/4)^(1/2) + (1/3)^(1/2) ≈ 1.077 > 1.
        assert_eq!(power_sum_le_one(&[q("1/4"), q("1/3")], &q("1/2"), 512), Some(false));
        // Sub-unit geometric-ish sum.
        assert_eq!(
            power_sum_le_one(&[q("1/9"), q("1/9"), q("1/16")], &q("1/2"), 512),
            Some(true)
        );
        // c = 1 is exact rational arithmetic.
        assert_eq!(power_sum_le_one(&[q("1/2"), q("1/2")], &Q::one(), 64), Some(true));
        assert_eq!(
            power_sum_le_one(&[q("1/2"), q("1/2"), q("1/1000")], &Q::one(), 64),
            Some(false)
        );
    }

    #[test]
    fn rounding_is_outward() {
        let x = q("1/3");
        let d = round_down(&x, 40);
        let u = round_up(&x, 40);
        assert!(d <= x && x <= u);
        assert!(&u - &d < q("1/1000000000"));
    }

    #[test]
    fn enclosure_algebra_bounds() {
        let a = Enc::new(q("1/3"), q("1/2"));
        let b = Enc::new(q("-2"), q("3"));
        let m = a.mul(&b);
        assert_eq!(m.lo(), &q("-1"));
        assert_eq!(m.hi(), &q("3/2"));
        let s = a.sub(&b);
        assert_eq!(s.lo(), &(q("1/3") - q("3")));
        assert_eq!(s.hi(), &(q("1/2") + q("2")));
    }
}
