//! A classical independent family indexed by infinite binary strings.
//!
//! Block `Y_n` lists every subset `A ⊆ 2^n` (length-`n` binary strings), so it
//! has `2^(2^n)` positions. Blocks are laid out consecutively from 0; within
//! `Y_n` the offset of `A` is the integer whose bit `t` says whether the
//! `t`-th string of length `n` in lexicographic order belongs to `A`. The set
//! coded by `σ` contains position `(n, A)` iff `σ↾n ∈ A`.

use crate::error::{Error, Result};
use crate::omega::{Descriptor, OmegaSet, Oracle};

pub const MAX_DEPTH: u32 = 5;

/// First index of block `Y_n`.
pub fn block_start(n: u32) -> u64 {
    (0..n).map(|j| 1u64 << (1u64 << j)).sum()
}

/// Size `2^(2^n)` of block `Y_n`.
pub fn block_len(n: u32) -> u64 {
    1u64 << (1u64 << n)
}

/// Lexicographic rank of `σ↾n` among strings of length `n` (`σ(0)` most significant).
pub fn lex_rank(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

struct Coded {
    prefix: Vec<bool>,
    end: u64,
}

impl Oracle for Coded {
    fn contains(&self, k: u64) -> bool {
        if k >= self.end {
            return false;
        }
        let mut n = 0u32;
        while k >= block_start(n + 1) {
            n += 1;
        }
        let offset = k - block_start(n);
        let t = lex_rank(&self.prefix[..n as usize]);
        (offset >> t) & 1 == 1
    }
}

/// The set `X_σ` restricted to blocks `Y_0, …, Y_depth_limit`; indices past
/// the last complete block are excluded.
pub fn coded_independent_set(sigma: impl Fn(usize) -> bool, depth_limit: u32) -> Result<OmegaSet> {
    if depth_limit > MAX_DEPTH {
        return Err(Error::DepthTooLarge(depth_limit));
    }
    let prefix: Vec<bool> = (0..depth_limit as usize).map(sigma).collect();
    let label: String = prefix.iter().map(|&b| if b { '1' } else { '0' }).collect();
    Ok(OmegaSet::new(
        Coded { prefix, end: block_start(depth_limit + 1) },
        Descriptor::Coded { prefix: label, depth: depth_limit },
    ))
}

/// Same as [`coded_independent_set`] with `σ` given as a `0`/`1` string
/// (positions past its end read as `0`).
pub fn coded_from_bits(bits: &str, depth_limit: u32) -> Result<OmegaSet> {
    if !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::BadPattern(bits.to_string()));
    }
    let bits: Vec<bool> = bits.chars().map(|c| c == '1').collect();
    coded_independent_set(|i| bits.get(i).copied().unwrap_or(false), depth_limit)
}
