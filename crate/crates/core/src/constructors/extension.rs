//! Extension of a family by an independent biased coin per index.
//!
//! Given a distinguished member `A` with density `a` and a target `s`, set
//! `ε = ½·min{a(1−s), s(1−a)}`, `x₁ = sa + ε`, `x₀ = s(1−a) − ε`,
//! `t₁ = x₁/a`, `t₀ = x₀/(1−a)`. Index `n` joins `B` with probability `t₁`
//! when `n ∈ A` and `t₀` otherwise. Then `t₁a + t₀(1−a) = s`, so `B` has
//! density `s` almost surely, while `d(B ∩ A) = x₁ = sa + ε` breaks the
//! product rule with `A` by exactly `ε`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Density;
use crate::family::Family;
use crate::omega::{Descriptor, OmegaSet, Oracle};

/// Identifier recorded with every seed: the coin at index `n` is the ChaCha8
/// output word pair at word position `2n` of the stream keyed by
/// `ChaCha8Rng::seed_from_u64(seed)`, compared against `⌊t · 2^64⌋`.
pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64/word-2n/u64-threshold";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionParams {
    pub a: Density,
    pub s: Density,
    pub epsilon: Density,
    pub x0: Density,
    pub x1: Density,
    pub t0: Density,
    pub t1: Density,
}

impl ExtensionParams {
    pub fn new(a: Density, s: Density) -> Result<Self> {
        let a = a.check_open_unit("a")?;
        let s = s.check_open_unit("s")?;
        let epsilon = (&a * &s.complement()).min(&s * &a.complement()).half();
        let x1 = &(&s * &a) + &epsilon;
        let x0 = &(&s * &a.complement()) - &epsilon;
        let t1 = x1.checked_div(&a).expect("a > 0");
        let t0 = x0.checked_div(&a.complement()).expect("a < 1");
        Ok(ExtensionParams { a, s, epsilon, x0, x1, t0, t1 })
    }

    /// `t₁a + t₀(1−a)`, which equals `s`.
    pub fn mixture(&self) -> Density {
        &(&self.t1 * &self.a) + &(&self.t0 * &self.a.complement())
    }

    /// The gap `|d(B ∩ A) − d(B)·d(A)|` in the limit.
    pub fn product_gap(&self) -> Density {
        &self.x1 - &(&self.s * &self.a)
    }
}

/// A counter-based uniform `u64` stream: the value at `n` depends only on `(seed, n)`.
#[derive(Clone)]
pub struct KeyedCoin {
    key: [u8; 32],
    seed: u64,
}

impl KeyedCoin {
    pub fn new(seed: u64) -> Self {
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        KeyedCoin { key, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&self, n: u64) -> u64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_word_pos(2 * n as u128);
        rng.next_u64()
    }

    /// A coin landing heads with probability `threshold / 2^64`.
    pub fn flip(&self, n: u64, threshold: u64) -> bool {
        self.uniform(n) < threshold
    }
}

struct BiasedCoins {
    coin: KeyedCoin,
    distinguished: OmegaSet,
    inside: u64,
    outside: u64,
}

impl Oracle for BiasedCoins {
    fn contains(&self, n: u64) -> bool {
        let t = if self.distinguished.contains(n) { self.inside } else { self.outside };
        self.coin.flip(n, t)
    }
}

/// Samples `B` keyed by `seed`, biased by membership in the member named `distinguished`.
pub fn random_extension(
    family: &Family,
    distinguished: &str,
    s: Density,
    seed: u64,
) -> Result<(OmegaSet, ExtensionParams)> {
    let member = family.get(distinguished).ok_or_else(|| Error::UnknownName(distinguished.to_string()))?;
    let params = ExtensionParams::new(member.density.clone(), s)?;
    let oracle = BiasedCoins {
        coin: KeyedCoin::new(seed),
        distinguished: member.set.clone(),
        inside: params.t1.to_fixed_u64(),
        outside: params.t0.to_fixed_u64(),
    };
    let descriptor = Descriptor::RandomExtension {
        distinguished: Box::new(member.set.descriptor().clone()),
        t1: params.t1.clone(),
        t0: params.t0.clone(),
        seed,
        rng: RNG_ALGORITHM.to_string(),
    };
    Ok((OmegaSet::new(oracle, descriptor), params))
}
