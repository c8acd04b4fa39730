//! Subsets of the naturals as pure membership oracles.
//!
//! An [`OmegaSet`] answers `n ∈ S` for any `n: u64` and, when it can, reports
//! `|S ∩ [0, n)|` without scanning. Sets are cheap to clone (shared oracle)
//! and safe to query from many threads.

mod expr;
mod thin;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exact::Density;
use crate::error::{Error, Result};

pub use expr::SetExpr;

/// A membership oracle over ω.
///
/// `contains` must be a pure function of `n`. `count_below`, when it returns
/// `Some`, must equal the number of `k < n` with `contains(k)`.
pub trait Oracle: Send + Sync {
    fn contains(&self, n: u64) -> bool;

    fn count_below(&self, _n: u64) -> Option<u64> {
        None
    }

    /// Number of indices below `n` whose membership was decided inside a
    /// precision guard band. `None` for oracles with exact membership.
    fn guard_band_hits(&self, _n: u64) -> Option<u64> {
        None
    }
}

/// Provenance of a set: which constructor made it and with what parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Descriptor {
    Omega,
    Empty,
    Complement { of: Box<Descriptor> },
    Scale { of: Box<Descriptor>, factor: u64 },
    Thin { of: Box<Descriptor> },
    Intersect { of: Vec<Descriptor> },
    Union { of: Vec<Descriptor> },
    SymDiff { of: Vec<Descriptor> },
    Kw { radicand: u64, threshold: Density },
    Coded { prefix: String, depth: u32 },
    Block { source: Box<Descriptor> },
    RandomExtension {
        distinguished: Box<Descriptor>,
        t1: Density,
        t0: Density,
        seed: u64,
        rng: String,
    },
    Custom { label: String },
}

/// A subset of ω given by its membership oracle and provenance.
#[derive(Clone)]
pub struct OmegaSet {
    oracle: Arc<dyn Oracle>,
    descriptor: Arc<Descriptor>,
}

impl fmt::Debug for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmegaSet").field("descriptor", &self.descriptor).finish()
    }
}

struct Full;

impl Oracle for Full {
    fn contains(&self, _n: u64) -> bool {
        true
    }
    fn count_below(&self, n: u64) -> Option<u64> {
        Some(n)
    }
}

struct Nothing;

impl Oracle for Nothing {
    fn contains(&self, _n: u64) -> bool {
        false
    }
    fn count_below(&self, _n: u64) -> Option<u64> {
        Some(0)
    }
}

struct Complement(OmegaSet);

impl Oracle for Complement {
    fn contains(&self, n: u64) -> bool {
        !self.0.contains(n)
    }
    fn count_below(&self, n: u64) -> Option<u64> {
        self.0.count_hint(n).map(|c| n - c)
    }
    fn guard_band_hits(&self, n: u64) -> Option<u64> {
        self.0.guard_band_hits(n)
    }
}

struct Scaled {
    inner: OmegaSet,
    factor: u64,
}

impl Oracle for Scaled {
    fn contains(&self, k: u64) -> bool {
        k.is_multiple_of(self.factor) && self.inner.contains(k / self.factor)
    }
    // members below n are factor*j with j < ceil(n / factor)
    fn count_below(&self, n: u64) -> Option<u64> {
        Some(self.inner.prefix_count(n.div_ceil(self.factor)))
    }
}

struct FromFn<F>(F);

impl<F: Fn(u64) -> bool + Send + Sync> Oracle for FromFn<F> {
    fn contains(&self, n: u64) -> bool {
        (self.0)(n)
    }
}

impl OmegaSet {
    pub fn new(oracle: impl Oracle + 'static, descriptor: Descriptor) -> Self {
        OmegaSet { oracle: Arc::new(oracle), descriptor: Arc::new(descriptor) }
    }

    /// A set from a closure. The closure must be pure.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Self::new(FromFn(f), Descriptor::Custom { label: label.into() })
    }

    pub fn omega() -> Self {
        Self::new(Full, Descriptor::Omega)
    }

    pub fn empty() -> Self {
        Self::new(Nothing, Descriptor::Empty)
    }

    /// `m·ω`, the multiples of `m`.
    pub fn multiples(m: u64) -> Result<Self> {
        Self::omega().scale(m)
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        self.oracle.contains(n)
    }

    /// The closed-form count `|S ∩ [0, n)|`, if this set has one.
    #[inline]
    pub fn count_hint(&self, n: u64) -> Option<u64> {
        self.oracle.count_below(n)
    }

    /// Exact `|S ∩ [0, n)|`; falls back to evaluating every `k < n`.
    pub fn prefix_count(&self, n: u64) -> u64 {
        self.count_hint(n)
            .unwrap_or_else(|| (0..n).filter(|&k| self.contains(k)).count() as u64)
    }

    pub fn guard_band_hits(&self, n: u64) -> Option<u64> {
        self.oracle.guard_band_hits(n)
    }

    /// `ω ∖ S`.
    pub fn complement(&self) -> OmegaSet {
        let descriptor = Descriptor::Complement { of: Box::new(self.descriptor().clone()) };
        Self::new(Complement(self.clone()), descriptor)
    }

    /// `m·S = {m·a : a ∈ S}`.
    pub fn scale(&self, m: u64) -> Result<OmegaSet> {
        if m == 0 {
            return Err(Error::ZeroScale);
        }
        let descriptor = Descriptor::Scale { of: Box::new(self.descriptor().clone()), factor: m };
        Ok(Self::new(Scaled { inner: self.clone(), factor: m }, descriptor))
    }

    /// `{x_0, x_2, x_4, …}` for the increasing enumeration `(x_k)` of `S`.
    ///
    /// A finite `S` yields its even-indexed elements.
    pub fn thin(&self) -> OmegaSet {
        let descriptor = Descriptor::Thin { of: Box::new(self.descriptor().clone()) };
        Self::new(thin::Thinned::new(self.clone()), descriptor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn evens() -> OmegaSet {
        OmegaSet::multiples(2).unwrap()
    }

    fn brute(s: &OmegaSet, n: u64) -> u64 {
        (0..n).filter(|&k| s.contains(k)).count() as u64
    }

    #[test]
    fn membership_of_multiples() {
        assert!(evens().contains(4));
        assert!(!evens().contains(5));
        assert!(evens().complement().contains(5));
    }

    #[test]
    fn prefix_counts() {
        assert_eq!(evens().prefix_count(10), 5);
        assert_eq!(OmegaSet::omega().prefix_count(1234), 1234);
        assert_eq!(OmegaSet::multiples(3).unwrap().prefix_count(10), 4);
        assert_eq!(evens().complement().prefix_count(10), 5);
        for n in [0, 1, 17, 1000] {
            assert_eq!(OmegaSet::omega().complement().prefix_count(n), 0);
        }
    }

    #[test]
    fn complement_is_an_involution() {
        let s = OmegaSet::from_fn("squares", |n| {
            let r = (n as f64).sqrt() as u64;
            r * r == n
        });
        let cc = s.complement().complement();
        assert!((0..10_000).all(|n| s.contains(n) == cc.contains(n)));
    }

    #[test]
    fn scaling() {
        assert!(OmegaSet::omega().scale(0).is_err());
        let six = OmegaSet::omega().scale(2).unwrap().scale(3).unwrap();
        assert_eq!(six.prefix_count(12), 2);
        assert!((0..1000).all(|n| six.contains(n) == (n % 6 == 0)));
    }

    #[test]
    fn thin_of_omega_is_evens() {
        let t = OmegaSet::omega().thin();
        assert!((0..10_000).all(|n| t.contains(n) == (n % 2 == 0)));
        let t4 = evens().thin();
        assert!((0..10_000).all(|n| t4.contains(n) == (n % 4 == 0)));
    }

    #[test]
    fn thin_without_hint_uses_the_cache() {
        let s = OmegaSet::from_fn("1 mod 3 or 7 mod 11", |n| n % 3 == 1 || n % 11 == 7);
        assert!(s.count_hint(10).is_none());
        let t = s.thin();
        // query far ahead first, then backwards
        let far = t.prefix_count(20_000);
        assert_eq!(far, brute(&s, 20_000).div_ceil(2));
        for n in (0..3000).rev() {
            assert_eq!(t.prefix_count(n), brute(&s, n).div_ceil(2), "n = {n}");
        }
        assert_eq!(brute(&t, 3000), t.prefix_count(3000));
    }

    #[test]
    fn thin_of_a_finite_set() {
        let s = OmegaSet::from_fn("{3,5,9,10}", |n| matches!(n, 3 | 5 | 9 | 10));
        let t = s.thin();
        let members: Vec<u64> = (0..100).filter(|&n| t.contains(n)).collect();
        assert_eq!(members, vec![3, 9]);
    }

    #[test]
    fn thin_is_consistent_across_threads() {
        let s = OmegaSet::from_fn("not 5 mod 7", |n| n % 7 != 5);
        let t = s.thin();
        let serial: Vec<bool> = (0..40_000).map(|n| t.contains(n)).collect();
        let t2 = s.thin();
        let parts: Vec<Vec<bool>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4u64)
                .rev()
                .map(|w| {
                    let t2 = &t2;
                    scope.spawn(move || (w * 10_000..(w + 1) * 10_000).map(|n| t2.contains(n)).collect())
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).rev().collect()
        });
        assert_eq!(serial, parts.concat());
    }

    fn arb_set() -> impl Strategy<Value = OmegaSet> {
        prop_oneof![
            (1u64..9).prop_map(|m| OmegaSet::multiples(m).unwrap()),
            (2u64..9, 0u64..9).prop_map(|(m, r)| OmegaSet::from_fn("residue", move |n| n % m == r % m)),
            (1u64..5).prop_map(|m| OmegaSet::multiples(m).unwrap().complement()),
            Just(OmegaSet::from_fn("squares", |n| {
                let r = (n as f64).sqrt() as u64;
                r * r == n
            })),
        ]
    }

    proptest! {
        #[test]
        fn counts_are_exact_monotone_and_bounded(s in arb_set(), n in 0u64..3000) {
            let c = s.prefix_count(n);
            prop_assert_eq!(c, brute(&s, n));
            prop_assert!(c <= n);
            prop_assert!(c <= s.prefix_count(n + 1));
            prop_assert_eq!(c + s.complement().prefix_count(n), n);
        }

        #[test]
        fn thin_halves_counts(s in arb_set(), n in 0u64..3000) {
            prop_assert_eq!(s.thin().prefix_count(n), s.prefix_count(n).div_ceil(2));
            prop_assert_eq!(brute(&s.thin(), n), s.prefix_count(n).div_ceil(2));
        }

        #[test]
        fn scaling_is_a_bijection(s in arb_set(), m in 1u64..7, n in 0u64..500) {
            let scaled = s.scale(m).unwrap();
            prop_assert_eq!(scaled.prefix_count(m * n), s.prefix_count(n));
            prop_assert_eq!(brute(&scaled, m * n), s.prefix_count(n));
        }
    }
}
