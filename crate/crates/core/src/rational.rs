//! Exact rationals and half-integers.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

#[inline]
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[inline]
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[inline]
pub fn zero() -> Q {
    Q::zero()
}

#[inline]
pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(x: &Q) -> f64 {
    // BigRational::to_f64 handles huge numerators and denominators correctly.
    x.to_f64().unwrap_or(f64::NAN)
}

/// Canonical `p/q` text, with integers written without the denominator.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// A number in `½ℤ`, stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn to_q(self) -> Q {
        qr(self.0 as i64, 2)
    }

    pub fn add_int(self, k: i32) -> Self {
        HalfInt(self.0 + 2 * k)
    }

    /// Parses `1/2`, `-3/2`, `0`, `2` or a decimal such as `0.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        let t = s.trim();
        if let Ok(x) = parse_q(t) {
            let twice = x * q(2);
            if twice.is_integer() {
                return twice.to_integer().to_i32().map(HalfInt).ok_or_else(bad);
            }
            return Err(bad());
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        let twice = v * 2.0;
        if libm::trunc(twice) != twice || twice.abs() > i32::MAX as f64 {
            return Err(bad());
        }
        Ok(HalfInt(twice as i32))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl core::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_round_trip() {
        for (n, d) in [(0, 1), (3, 1), (-1, 2), (7, -21), (22, 7)] {
            let x = qr(n, d);
            assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
        }
        assert_eq!(format_q(&qr(-2, 4)), "-1/2");
        assert_eq!(format_q(&q(5)), "5");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn half_int_parsing() {
        assert_eq!(HalfInt::parse("1/2").unwrap(), HalfInt::HALF);
        assert_eq!(HalfInt::parse("-0.5").unwrap(), -HalfInt::HALF);
        assert_eq!(HalfInt::parse("3").unwrap(), HalfInt::from_int(3));
        assert!(HalfInt::parse("1/3").is_err());
        assert!(HalfInt::parse("0.25").is_err());
        assert_eq!(HalfInt::from_twice(-3).to_string(), "-3/2");
        assert_eq!(HalfInt::from_twice(4).to_string(), "2");
    }
}
