//! Exact densities in `[0, 1]`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational density.
///
/// Declared densities, expected atom densities and field-image values are all
/// carried as `Density` so that product and normalization identities hold
/// exactly. Floats enter only through [`Density::from_f64`], which is exact
/// (every finite `f64` is a dyadic rational).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density(BigRational);

impl Density {
    pub fn zero() -> Self {
        Density(BigRational::zero())
    }

    pub fn one() -> Self {
        Density(BigRational::one())
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Density(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Density(r)
    }

    /// Exact value of a finite float.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Density)
            .ok_or_else(|| Error::Parse(x.to_string()))
    }

    /// The shortest decimal that round-trips to `x`, read exactly: `0.3` becomes `3/10`.
    pub fn from_f64_decimal(x: f64) -> Result<Self> {
        x.to_string().parse()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Density(BigRational::one() - &self.0)
    }

    pub fn is_open_unit(&self) -> bool {
        self.0.is_positive() && self.0 < BigRational::one()
    }

    pub fn check_open_unit(self, what: &'static str) -> Result<Self> {
        if self.is_open_unit() {
            Ok(self)
        } else {
            Err(Error::OutOfUnitInterval { what, value: self.to_string() })
        }
    }

    pub fn half(&self) -> Self {
        Density(&self.0 / BigInt::from(2))
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn checked_div(&self, other: &Density) -> Option<Density> {
        (!other.0.is_zero()).then(|| Density(&self.0 / &other.0))
    }

    /// `floor(self * 2^bits)` for a value in `[0, 1)`.
    pub fn to_fixed(&self, bits: u32) -> BigUint {
        let scaled = &self.0 * BigRational::from_integer(BigInt::one() << bits);
        scaled.floor().to_integer().to_biguint().unwrap_or_default()
    }

    /// `floor(self * 2^128)`, saturating at `u128::MAX` for values `>= 1`.
    pub fn to_fixed_u128(&self) -> u128 {
        if self.0 >= BigRational::one() {
            return u128::MAX;
        }
        self.to_fixed(128).to_u128().unwrap_or(u128::MAX)
    }

    /// `floor(self * 2^64)`, saturating at `u64::MAX` for values `>= 1`.
    pub fn to_fixed_u64(&self) -> u64 {
        if self.0 >= BigRational::one() {
            return u64::MAX;
        }
        self.to_fixed(64).to_u64().unwrap_or(u64::MAX)
    }
}

impl FromStr for Density {
    type Err = Error;

    /// Accepts `p/q`, integers and plain decimals (`0.125`, `1e-3`); all parsed exactly.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Density(BigRational::new(n, d)));
        }
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (negative, mantissa) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
        let digits = digits / BigInt::from(10);
        let shift = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let mut r = BigRational::from_integer(digits);
        if shift >= 0 {
            r *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
        } else {
            r /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
        }
        if negative {
            r = -r;
        }
        Ok(Density(r))
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density({})", self.0)
    }
}

impl Add for &Density {
    type Output = Density;
    fn add(self, rhs: &Density) -> Density {
        Density(&self.0 + &rhs.0)
    }
}

impl Add for Density {
    type Output = Density;
    fn add(self, rhs: Density) -> Density {
        Density(self.0 + rhs.0)
    }
}

impl Sub for &Density {
    type Output = Density;
    fn sub(self, rhs: &Density) -> Density {
        Density(&self.0 - &rhs.0)
    }
}

impl Mul for &Density {
    type Output = Density;
    fn mul(self, rhs: &Density) -> Density {
        Density(&self.0 * &rhs.0)
    }
}

impl Mul for Density {
    type Output = Density;
    fn mul(self, rhs: Density) -> Density {
        Density(self.0 * rhs.0)
    }
}

impl std::iter::Sum for Density {
    fn sum<I: Iterator<Item = Density>>(iter: I) -> Density {
        iter.fold(Density::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Density {
    fn product<I: Iterator<Item = Density>>(iter: I) -> Density {
        iter.fold(Density::one(), |a, b| a * b)
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Density {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Float(x) => Density::from_f64_decimal(x).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("0.3".parse::<Density>().unwrap(), Density::new(3, 10));
        assert_eq!("3/10".parse::<Density>().unwrap(), Density::new(3, 10));
        assert_eq!("5e-3".parse::<Density>().unwrap(), Density::new(1, 200));
        assert_eq!(".5".parse::<Density>().unwrap(), Density::new(1, 2));
        assert_eq!(Density::from_f64_decimal(0.7).unwrap(), Density::new(7, 10));
        assert!("x".parse::<Density>().is_err());
        assert!("1/0".parse::<Density>().is_err());
    }

    #[test]
    fn fixed_point() {
        assert_eq!(Density::new(1, 2).to_fixed_u128(), 1u128 << 127);
        assert_eq!(Density::new(3, 4).to_fixed_u64(), 3u64 << 62);
        assert_eq!(Density::one().to_fixed_u64(), u64::MAX);
    }

    #[test]
    fn from_f64_is_exact() {
        let d = Density::from_f64(0.3).unwrap();
        assert_ne!(d, Density::new(3, 10));
        assert_eq!(d.to_f64(), 0.3);
    }
}
