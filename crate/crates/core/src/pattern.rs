use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::Density;

/// A sign pattern `σ ∈ 2^k`: bit `j` selects `A_j` (1) or its complement (0).
///
/// Displayed as `σ(0)σ(1)…σ(k−1)`; ordered lexicographically in that reading.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern {
    bits: u64,
    len: u32,
}

impl SignPattern {
    pub const MAX_LEN: u32 = 63;

    /// `bits` bit `j` is `σ(j)`.
    pub fn new(bits: u64, len: u32) -> Self {
        assert!(len <= Self::MAX_LEN, "pattern too long");
        SignPattern { bits: bits & ((1u64 << len) - 1), len }
    }

    /// All `2^len` patterns in index order (bit `j` of the index is `σ(j)`).
    pub fn all(len: u32) -> impl Iterator<Item = SignPattern> {
        (0..1u64 << len).map(move |b| SignPattern::new(b, len))
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: u32) -> bool {
        (self.bits >> j) & 1 == 1
    }

    /// Index in `0..2^len` with bit `j` equal to `σ(j)`.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn restrict(&self, len: u32) -> SignPattern {
        SignPattern::new(self.bits, len.min(self.len))
    }

    /// `∏_j (σ(j)·p_j + (1−σ(j))·(1−p_j))`.
    pub fn expected_density(&self, densities: &[Density]) -> Density {
        densities
            .iter()
            .enumerate()
            .take(self.len as usize)
            .map(|(j, p)| if self.get(j as u32) { p.clone() } else { p.complement() })
            .product()
    }

    fn lex_key(&self) -> u64 {
        (0..self.len).fold(0, |acc, j| (acc << 1) | self.get(j) as u64)
    }
}

impl Ord for SignPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        self.restrict(common)
            .lex_key()
            .cmp(&other.restrict(common).lex_key())
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for SignPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ{self}")
    }
}

impl FromStr for SignPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.len() > Self::MAX_LEN as usize || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::BadPattern(s.to_string()));
        }
        let bits = s.chars().enumerate().fold(0u64, |acc, (j, c)| acc | ((c == '1') as u64) << j);
        Ok(SignPattern::new(bits, s.len() as u32))
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let p = SignPattern::new(0b001, 3);
        assert_eq!(p.to_string(), "100");
        assert_eq!("100".parse::<SignPattern>().unwrap(), p);
        assert!("10a".parse::<SignPattern>().is_err());
    }

    #[test]
    fn lexicographic_order() {
        let mut ps: Vec<SignPattern> = SignPattern::all(3).collect();
        ps.sort();
        let strs: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(strs, ["000", "001", "010", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn expected_densities_normalize() {
        let ps = [Density::new(3, 10), Density::new(1, 2), Density::new(7, 10)];
        let total: Density = SignPattern::all(3).map(|s| s.expected_density(&ps)).sum();
        assert_eq!(total, Density::one());
        assert_eq!("111".parse::<SignPattern>().unwrap().expected_density(&ps), Density::new(105, 1000));
    }
}
