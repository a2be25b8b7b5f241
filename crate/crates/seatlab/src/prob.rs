//! Arbitrary-precision rational probabilities.
//!
//! The exact engine's contracts are rational identities, so probabilities
//! are carried as `BigInt` fractions in lowest terms and serialized as
//! `"p/q"` strings. The denominator is always printed, even when it is 1:
//! consumers parse one shape.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProbError {
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("malformed rational literal {0:?}, expected \"p/q\"")]
    Malformed(String),
}

/// An exact rational, kept in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self, ProbError> {
        if denominator.is_zero() {
            return Err(ProbError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numerator, denominator)))
    }

    /// Ratio of two machine integers; panics if `q == 0`.
    pub fn ratio(p: u64, q: u64) -> Self {
        assert!(q != 0, "denominator must be nonzero");
        Self(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    /// True when the value lies in `[0, 1]`.
    pub fn is_probability(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Complement `1 - p`.
    pub fn complement(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }

    /// Nearest `f64`, for display and for the float-tolerance statistics.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back to a long-division approximation for huge terms.
            let scale = BigInt::from(1u64 << 60);
            let scaled = (self.0.numer() * &scale) / self.0.denom();
            scaled.to_f64().unwrap_or(f64::NAN) / scale.to_f64().unwrap()
        })
    }

    pub(crate) fn from_big_rational(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactProb {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ProbError::Malformed(s.to_owned());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num.trim()).map_err(|_| malformed())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| malformed())?;
        Self::new(num, den).map_err(|_| malformed())
    }
}

impl Serialize for ExactProb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactProb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactProb {
            type Output = ExactProb;
            fn $method(self, rhs: ExactProb) -> ExactProb {
                ExactProb((self.0).$method(rhs.0))
            }
        }

        impl<'a> $trait<&'a ExactProb> for &'a ExactProb {
            type Output = ExactProb;
            fn $method(self, rhs: &'a ExactProb) -> ExactProb {
                ExactProb((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&ExactProb> for ExactProb {
    fn add_assign(&mut self, rhs: &ExactProb) {
        self.0 += &rhs.0;
    }
}

impl Sum for ExactProb {
    fn sum<I: Iterator<Item = ExactProb>>(iter: I) -> Self {
        iter.fold(Self::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms_with_positive_denominator() {
        let p = ExactProb::new(BigInt::from(2), BigInt::from(4)).unwrap();
        assert_eq!(p, ExactProb::ratio(1, 2));
        let q = ExactProb::new(BigInt::from(-1), BigInt::from(-3)).unwrap();
        assert_eq!(q.to_string(), "1/3");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            ExactProb::new(BigInt::from(1), BigInt::from(0)),
            Err(ProbError::ZeroDenominator)
        );
    }

    #[test]
    fn display_always_includes_denominator() {
        assert_eq!(ExactProb::one().to_string(), "1/1");
        assert_eq!(ExactProb::zero().to_string(), "0/1");
        assert_eq!(ExactProb::ratio(3, 12).to_string(), "1/4");
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["0/1", "1/1", "1/3", "7/12"] {
            let p: ExactProb = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!("2/4".parse::<ExactProb>().unwrap().to_string(), "1/2");
        assert_eq!("1".parse::<ExactProb>().unwrap(), ExactProb::one());
        assert!("x/3".parse::<ExactProb>().is_err());
        assert!("1/0".parse::<ExactProb>().is_err());
    }

    #[test]
    fn arithmetic_and_sum() {
        let half = ExactProb::ratio(1, 2);
        let third = ExactProb::ratio(1, 3);
        assert_eq!(&half * &third, ExactProb::ratio(1, 6));
        assert_eq!(&half + &third, ExactProb::ratio(5, 6));
        assert_eq!(half.complement(), ExactProb::ratio(1, 2));
        let sum: ExactProb = (1..=4).map(|q| ExactProb::ratio(1, q)).sum();
        assert_eq!(sum, ExactProb::new(BigInt::from(25), BigInt::from(12)).unwrap());
        assert!(!sum.is_probability());
        assert!(third.is_probability());
    }

    #[test]
    fn serde_as_string() {
        let p = ExactProb::ratio(1, 3);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"1/3\"");
        let back: ExactProb = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
