//! Threshold sets of irrational rotations: `{n : frac(n·√r) < p}`.
//!
//! `frac(n·√r)` is computed in 128-bit fixed point. The fractional part of
//! `√r` is taken as `⌊√r · 2^128⌋ mod 2^128` (exact integer square root), so
//! `n · step mod 2^128` is `frac(n·√r) · 2^128` up to an error below `n`
//! units, i.e. below `2^-64` for every `n: u64`. Comparisons against the
//! threshold use a guard band of `2^-40`; indices inside the band are counted
//! as members and reported through [`OmegaSet::guard_band_hits`].

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Density;
use crate::family::Family;
use crate::omega::{Descriptor, OmegaSet, Oracle};

/// Guard band half-width, in units of `2^-128`.
const GUARD: u128 = 1 << (128 - 40);

pub fn is_square_free(r: u64) -> bool {
    if r < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= r {
        if r.is_multiple_of(d * d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Seed irrational `√radicand` and threshold `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KwSeed {
    pub radicand: u64,
    pub threshold: Density,
}

impl KwSeed {
    pub fn new(radicand: u64, threshold: Density) -> Result<Self> {
        if !is_square_free(radicand) {
            return Err(Error::NotSquareFree(radicand));
        }
        let threshold = threshold.check_open_unit("threshold")?;
        Ok(KwSeed { radicand, threshold })
    }

    /// Shorthand taking the threshold as a decimal float (`0.3` means `3/10`).
    pub fn with_decimal(radicand: u64, threshold: f64) -> Result<Self> {
        Self::new(radicand, Density::from_f64_decimal(threshold)?)
    }
}

/// `⌊frac(√r) · 2^128⌋`.
fn frac_sqrt_fixed(r: u64) -> u128 {
    let scaled = (BigUint::from(r) << 256u32).sqrt();
    let mask = (BigUint::from(1u8) << 128u32) - 1u8;
    (scaled & mask).to_u128().expect("masked to 128 bits")
}

struct Rotation {
    step: u128,
    threshold: u128,
}

impl Rotation {
    #[inline]
    fn phase(&self, n: u64) -> u128 {
        (n as u128).wrapping_mul(self.step)
    }

    #[inline]
    fn in_band(&self, n: u64) -> bool {
        self.phase(n).abs_diff(self.threshold) < GUARD
    }
}

impl Oracle for Rotation {
    #[inline]
    fn contains(&self, n: u64) -> bool {
        self.phase(n) < self.threshold.saturating_add(GUARD)
    }

    fn guard_band_hits(&self, n: u64) -> Option<u64> {
        Some((0..n).filter(|&k| self.in_band(k)).count() as u64)
    }
}

/// `{n : frac(n·√r) < p}` for the seed `(r, p)`.
pub fn kw_set(seed: &KwSeed) -> Result<OmegaSet> {
    let seed = KwSeed::new(seed.radicand, seed.threshold.clone())?;
    let rotation = Rotation {
        step: frac_sqrt_fixed(seed.radicand),
        threshold: seed.threshold.to_fixed_u128(),
    };
    Ok(OmegaSet::new(
        rotation,
        Descriptor::Kw { radicand: seed.radicand, threshold: seed.threshold },
    ))
}

/// One threshold set per seed, named `sqrt<r>`, with declared densities equal
/// to the thresholds. Radicands must be pairwise distinct.
pub fn kw_family(seeds: &[KwSeed]) -> Result<Family> {
    if seeds.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut seen = HashSet::new();
    let mut family = Family::default();
    for seed in seeds {
        if !seen.insert(seed.radicand) {
            return Err(Error::DuplicateRadicand(seed.radicand));
        }
        family.push(format!("sqrt{}", seed.radicand), kw_set(seed)?, seed.threshold.clone())?;
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::prefix_density;
    use num_traits::ToPrimitive;

    /// frac(n·√r) < p decided with 256-bit integers: ⌊n·√r·2^k⌋ = isqrt(n²·r·2^(2k)).
    fn oracle_member(r: u64, p: &Density, n: u64) -> bool {
        let k = 192u32;
        let scaled = ((BigUint::from(n) * BigUint::from(n) * BigUint::from(r)) << (2 * k)).sqrt();
        let frac = scaled % (BigUint::from(1u8) << k);
        // frac / 2^k < p
        frac < p.to_fixed(k)
    }

    #[test]
    fn square_free() {
        assert!([2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 30].iter().all(|&r| is_square_free(r)));
        assert!(![0, 1, 4, 8, 9, 12, 18, 25, 49].iter().any(|&r| is_square_free(r)));
        assert_eq!(KwSeed::with_decimal(4, 0.5), Err(Error::NotSquareFree(4)));
        assert!(KwSeed::with_decimal(2, 1.0).is_err());
        assert!(KwSeed::with_decimal(2, 0.0).is_err());
    }

    #[test]
    fn fixed_point_sqrt2() {
        let step = frac_sqrt_fixed(2) as f64 / 2f64.powi(128);
        assert!((step - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn first_index_against_sqrt2_digits() {
        // frac(√2) = 0.41421356…
        let below = kw_set(&KwSeed::with_decimal(2, 0.4142).unwrap()).unwrap();
        let above = kw_set(&KwSeed::with_decimal(2, 0.4143).unwrap()).unwrap();
        assert!(!below.contains(1));
        assert!(above.contains(1));
        let near_one = kw_set(&KwSeed::with_decimal(2, 0.999).unwrap()).unwrap();
        assert!(near_one.contains(1));
        // n = 0 has fractional part 0
        assert!(below.contains(0));
    }

    #[test]
    fn membership_matches_wide_integer_oracle() {
        for (r, p) in [(2u64, "3/10"), (3, "1/2"), (5, "7/10"), (7, "0.123456789")] {
            let p: Density = p.parse().unwrap();
            let s = kw_set(&KwSeed::new(r, p.clone()).unwrap()).unwrap();
            for n in (0..2000u64).chain((0..200).map(|i| 1_000_000_007 * i + 13)) {
                assert_eq!(s.contains(n), oracle_member(r, &p, n), "r={r} n={n}");
            }
        }
    }

    #[test]
    fn equidistributed_densities() {
        for (r, p) in [(2u64, 0.5), (3, 0.25)] {
            let s = kw_set(&KwSeed::with_decimal(r, p).unwrap()).unwrap();
            let d = prefix_density(&s, 1_000_000).unwrap().to_f64().unwrap();
            assert!((d - p).abs() <= 5e-3, "r={r}: {d}");
        }
    }

    #[test]
    fn guard_band_is_rarely_hit() {
        let s = kw_set(&KwSeed::with_decimal(2, 0.3).unwrap()).unwrap();
        let n = 1_000_000u64;
        let hits = s.guard_band_hits(n).unwrap();
        assert!(hits as f64 <= 2.0 * n as f64 * 2f64.powi(-40) + 1.0);
    }

    #[test]
    fn family_preconditions() {
        assert_eq!(kw_family(&[]).unwrap_err(), Error::EmptyFamily);
        let dup = [KwSeed::with_decimal(2, 0.3).unwrap(), KwSeed::with_decimal(2, 0.6).unwrap()];
        assert_eq!(kw_family(&dup).unwrap_err(), Error::DuplicateRadicand(2));
        let f = kw_family(&[KwSeed::with_decimal(2, 0.3).unwrap(), KwSeed::with_decimal(3, 0.5).unwrap()]).unwrap();
        assert_eq!(f.names(), vec!["sqrt2", "sqrt3"]);
        assert_eq!(f.members()[0].density, Density::new(3, 10));
    }
}
