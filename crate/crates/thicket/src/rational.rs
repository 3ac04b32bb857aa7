//! Exact rational scalar used for every endpoint, radius and parameter.
//!
//! `Q` wraps [`num_rational::BigRational`] and fixes the serialization the
//! rest of the crate relies on: a rational is written as the string `"p/q"`
//! (or just `"p"` when the denominator is one) and read back from a string,
//! an integer, or a float (floats convert exactly from their binary value).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(BigRational);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Q {
    pub fn zero() -> Q {
        Q(BigRational::zero())
    }

    pub fn one() -> Q {
        Q(BigRational::one())
    }

    pub fn new(numer: i64, denom: i64) -> Q {
        assert!(denom != 0, "zero denominator");
        Q(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: i64) -> Q {
        Q(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Q {
        Q(BigRational::from_integer(n))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Q {
        assert!(!denom.is_zero(), "zero denominator");
        Q(BigRational::new(numer, denom))
    }

    /// Exact conversion from a finite float (every finite f64 is a rational).
    pub fn from_f64_exact(x: f64) -> Option<Q> {
        BigRational::from_float(x).map(Q)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        Q(self.0.recip())
    }

    pub fn min(self, other: Q) -> Q {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Q) -> Q {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn pow(&self, exp: i32) -> Q {
        if exp == 0 {
            return Q::one();
        }
        if self.is_zero() {
            assert!(exp > 0, "zero to a negative power");
            return Q::zero();
        }
        Q(self.0.pow(exp))
    }

    pub fn floor_big(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil_big(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Lossy conversion for plotting and estimates only; never used in a
    /// verdict.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back through a scaled division when numer/denom overflow f64.
            let bits = self.numer().bits().max(self.denom().bits());
            let shift = bits.saturating_sub(62) as u32;
            let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    /// Nearest integer, ties toward even (used only to pick series shifts).
    pub fn round_big(&self) -> BigInt {
        self.0.round().to_integer()
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Q {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Q, ParseRationalError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let parse_int = |t: &str| -> Result<BigInt, ParseRationalError> {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| ParseRationalError::Invalid(s.to_owned()))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let numer = parse_int(n)?;
                let denom = parse_int(d)?;
                if denom.is_zero() {
                    return Err(ParseRationalError::ZeroDenominator(s.to_owned()));
                }
                Ok(Q(BigRational::new(numer, denom)))
            }
            None => {
                if let Some((int, frac)) = s.split_once('.') {
                    // Decimal literals are exact: a.b = (a*10^k + b) / 10^k.
                    let digits = frac
                        .chars()
                        .all(|c| c.is_ascii_digit())
                        .then_some(())
                        .ok_or_else(|| ParseRationalError::Invalid(s.to_owned()))?;
                    let _ = digits;
                    let int_part = if int.is_empty() || int == "-" || int == "+" {
                        BigInt::zero()
                    } else {
                        parse_int(int)?
                    };
                    let scale = BigInt::from(10u32).pow(frac.len() as u32);
                    let frac_part = if frac.is_empty() {
                        BigInt::zero()
                    } else {
                        parse_int(frac)?
                    };
                    let negative = s.starts_with('-');
                    let mut numer = int_part * &scale;
                    if negative {
                        numer -= &frac_part;
                    } else {
                        numer += &frac_part;
                    }
                    Ok(Q(BigRational::new(numer, scale)))
                } else {
                    Ok(Q(BigRational::from_integer(parse_int(s)?)))
                }
            }
        }
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::from_int(n)
    }
}

impl From<BigInt> for Q {
    fn from(n: BigInt) -> Q {
        Q::from_bigint(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Q {
            type Output = Q;
            fn $method(self, rhs: Q) -> Q {
                Q((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Q> for &Q {
            type Output = Q;
            fn $method(self, rhs: &Q) -> Q {
                Q((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Q> for Q {
            type Output = Q;
            fn $method(self, rhs: &Q) -> Q {
                Q((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Q> for &Q {
            type Output = Q;
            fn $method(self, rhs: Q) -> Q {
                Q((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-&self.0)
    }
}

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, rhs: &Q) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, rhs: Q) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, rhs: &Q) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Q> for Q {
    fn mul_assign(&mut self, rhs: &Q) {
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Q> for Q {
    fn sum<I: Iterator<Item = &'a Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |a, b| a + b)
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct QVisitor;

impl de::Visitor<'_> for QVisitor {
    type Value = Q;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a rational as \"p/q\" string, integer, or float")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
        Ok(Q::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
        Ok(Q::from_bigint(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Q, E> {
        Q::from_f64_exact(v).ok_or_else(|| E::custom("non-finite float"))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Q, D::Error> {
        deserializer.deserialize_any(QVisitor)
    }
}

/// Compare `a/b` against `c/d` without constructing the quotients.
pub fn cmp_ratio(a: &Q, b: &Q, c: &Q, d: &Q) -> Ordering {
    assert!(b.is_positive() && d.is_positive());
    (a * d).cmp(&(c * b))
}

/// Integer part of the k-th root when the argument is a perfect k-th power.
pub fn perfect_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        if k % 2 == 0 {
            return None;
        }
        return perfect_root(&(-n), k).map(|r| -r);
    }
    let r = n.nth_root(k);
    (r.pow(k) == *n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["1/3", "-7/2", "5", "0", "-12"] {
            let q: Q = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert_eq!("4/6".parse::<Q>().unwrap(), Q::new(2, 3));
        assert_eq!("0.25".parse::<Q>().unwrap(), Q::new(1, 4));
        assert_eq!("-0.5".parse::<Q>().unwrap(), Q::new(-1, 2));
        assert!("1/0".parse::<Q>().is_err());
        assert!("abc".parse::<Q>().is_err());
    }

    #[test]
    fn arithmetic() {
        let a = Q::new(1, 3);
        let b = Q::new(1, 6);
        assert_eq!(&a + &b, Q::new(1, 2));
        assert_eq!(&a - &b, Q::new(1, 6));
        assert_eq!(&a * &b, Q::new(1, 18));
        assert_eq!(&a / &b, Q::from_int(2));
        assert_eq!(a.pow(-2), Q::from_int(9));
    }

    #[test]
    fn serde_as_string() {
        let q = Q::new(2, 5);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "\"2/5\"");
        let back: Q = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        let from_int: Q = serde_json::from_str("3").unwrap();
        assert_eq!(from_int, Q::from_int(3));
        let from_float: Q = serde_json::from_str("0.5").unwrap();
        assert_eq!(from_float, Q::new(1, 2));
    }

    #[test]
    fn perfect_roots() {
        assert_eq!(perfect_root(&BigInt::from(27), 3), Some(BigInt::from(3)));
        assert_eq!(perfect_root(&BigInt::from(16), 4), Some(BigInt::from(2)));
        assert_eq!(perfect_root(&BigInt::from(10), 2), None);
        assert_eq!(perfect_root(&BigInt::from(-8), 3), Some(BigInt::from(-2)));
        assert_eq!(perfect_root(&BigInt::from(-4), 2), None);
    }
}
