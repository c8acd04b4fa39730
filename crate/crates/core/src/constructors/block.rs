//! The parity block transform from a classical independent family to a
//! density-independent one.
//!
//! ω is cut into consecutive blocks `I_m` with `|I_m| = 2^m·(m+1)!`. Inside
//! `I_m`, position `o` belongs to the residue class `σ = o mod 2^m`, read as a
//! string in `2^m` with `σ(i)` = bit `i`. Each class is a translate of
//! `I_m ∩ 2^m·ω`. The transformed set of a classical set `B` keeps class `σ`
//! iff `Σ_{i ∈ B ∩ m} σ(i)` is odd.

use crate::error::Result;
use crate::exact::Density;
use crate::family::Family;
use crate::omega::{Descriptor, OmegaSet, Oracle};
use crate::sweep;

/// Largest block index whose end fits in `u64`.
pub const MAX_BLOCK: u32 = 15;

/// Block geometry.
pub struct BlockLayout;

impl BlockLayout {
    /// `|I_m| = 2^m · (m+1)!`.
    pub fn len(m: u32) -> u64 {
        (1..=m as u64 + 1).product::<u64>() << m
    }

    pub fn start(m: u32) -> u64 {
        (0..m).map(Self::len).sum()
    }

    pub fn end(m: u32) -> u64 {
        Self::start(m + 1)
    }

    /// `(m, offset)` with `k = start(m) + offset`, or `None` past block [`MAX_BLOCK`].
    pub fn locate(k: u64) -> Option<(u32, u64)> {
        let mut start = 0u64;
        for m in 0..=MAX_BLOCK {
            let len = Self::len(m);
            if k - start < len {
                return Some((m, k - start));
            }
            start += len;
        }
        None
    }
}

/// `1_{B ∩ 16}` packed as bits.
pub fn source_mask(source: &OmegaSet) -> u64 {
    (0..=MAX_BLOCK as u64).filter(|&i| source.contains(i)).fold(0, |acc, i| acc | 1 << i)
}

fn low_bits(m: u32) -> u64 {
    (1u64 << m) - 1
}

/// Number of `r < limit` (with `limit ≤ 2^m`) such that `popcount(r & mask)` is odd.
fn odd_residues_below(limit: u64, mask: u64) -> u64 {
    let mut count = 0;
    let mut parity_above = 0u32;
    for b in (0..64).rev() {
        if (limit >> b) & 1 == 0 {
            continue;
        }
        // r shares limit's bits above b and has bit b clear; bits below b free
        let below = mask & low_bits(b);
        if below != 0 {
            count += 1u64 << b >> 1;
        } else if parity_above % 2 == 1 {
            count += 1u64 << b;
        }
        parity_above += ((mask >> b) & 1) as u32;
    }
    count
}

struct Parity {
    mask: u64,
}

impl Oracle for Parity {
    fn contains(&self, k: u64) -> bool {
        match BlockLayout::locate(k) {
            Some((m, offset)) => ((offset & low_bits(m)) & self.mask).count_ones() % 2 == 1,
            None => false,
        }
    }

    fn count_below(&self, n: u64) -> Option<u64> {
        let mut total = 0;
        let mut m = 0;
        while m <= MAX_BLOCK {
            let mask = self.mask & low_bits(m);
            let (start, len) = (BlockLayout::start(m), BlockLayout::len(m));
            let cycle_members = if mask == 0 { 0 } else { 1u64 << m >> 1 };
            if n >= start + len {
                total += (len >> m) * cycle_members;
            } else {
                let offset = n.saturating_sub(start);
                total += (offset >> m) * cycle_members + odd_residues_below(offset & low_bits(m), mask);
                return Some(total);
            }
            m += 1;
        }
        Some(total)
    }
}

/// The transformed set `A` of a classical set `B`.
pub fn block_set(source: &OmegaSet) -> OmegaSet {
    OmegaSet::new(
        Parity { mask: source_mask(source) },
        Descriptor::Block { source: Box::new(source.descriptor().clone()) },
    )
}

/// Transforms each classical set; members are named `A0, A1, …` with declared density ½.
pub fn block_transform(classical: &[OmegaSet]) -> Result<Family> {
    let named: Vec<(String, OmegaSet)> =
        classical.iter().enumerate().map(|(j, b)| (format!("A{j}"), b.clone())).collect();
    block_family(&named)
}

pub fn block_family(classical: &[(String, OmegaSet)]) -> Result<Family> {
    let mut family = Family::default();
    for (name, b) in classical {
        family.push(name.clone(), block_set(b), Density::new(1, 2))?;
    }
    Ok(family)
}

/// Rank over 𝔽₂ of bit vectors.
pub fn f2_rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let reduced = basis.iter().fold(v, |x, &b| x.min(x ^ b));
        if reduced != 0 {
            basis.push(reduced);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// 𝔽₂ rank of `{1_{B_j ∩ m}}` for `m = 0..=MAX_BLOCK`.
pub fn rank_profile(classical: &[OmegaSet]) -> Vec<usize> {
    let masks: Vec<u64> = classical.iter().map(source_mask).collect();
    (0..=MAX_BLOCK)
        .map(|m| f2_rank(&masks.iter().map(|x| x & low_bits(m)).collect::<Vec<_>>()))
        .collect()
}

/// First `m ≤ max_block` at which the rank reaches the number of sets, if any.
pub fn first_full_rank_block(classical: &[OmegaSet], max_block: u32) -> Option<u32> {
    rank_profile(classical)
        .into_iter()
        .take(max_block.min(MAX_BLOCK) as usize + 1)
        .position(|r| r == classical.len())
        .map(|m| m as u32)
}

/// Atom occupancy inside `I_m`, counted by sweeping every index of the block.
/// Entry `τ` counts indices whose membership pattern is `τ` (bit `j` for set `j`).
pub fn block_atom_counts(sets: &[OmegaSet], m: u32, workers: usize) -> Vec<u64> {
    let (start, end) = (BlockLayout::start(m), BlockLayout::end(m));
    let counts = sweep::class_counts(&[start, end], 1 << sets.len(), workers, |k| {
        if k < start {
            return 0;
        }
        sets.iter().enumerate().fold(0, |acc, (j, s)| acc | (s.contains(k) as usize) << j)
    });
    let (before, through) = (&counts[0], &counts[1]);
    through.iter().zip(before).map(|(t, b)| t - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::coded::coded_from_bits;

    fn brute_odd(limit: u64, mask: u64) -> u64 {
        (0..limit).filter(|r| (r & mask).count_ones() % 2 == 1).count() as u64
    }

    #[test]
    fn block_sizes() {
        assert_eq!((0..5).map(BlockLayout::len).collect::<Vec<_>>(), vec![1, 4, 24, 192, 1920]);
        assert_eq!(BlockLayout::len(8), 92_897_280);
        assert_eq!(BlockLayout::start(3), 29);
        assert_eq!(BlockLayout::locate(0), Some((0, 0)));
        assert_eq!(BlockLayout::locate(5), Some((2, 0)));
        assert_eq!(BlockLayout::locate(28), Some((2, 23)));
        assert!(BlockLayout::end(MAX_BLOCK) > BlockLayout::start(MAX_BLOCK));
        assert_eq!(BlockLayout::locate(BlockLayout::end(MAX_BLOCK)), None);
    }

    #[test]
    fn odd_residue_counting() {
        for mask in [0u64, 1, 2, 5, 0b1101, 0b1000_0000] {
            for limit in 0..=256 {
                assert_eq!(odd_residues_below(limit, mask), brute_odd(limit, mask), "{limit} {mask:b}");
            }
        }
    }

    #[test]
    fn rank() {
        assert_eq!(f2_rank(&[0b011, 0b101, 0b110]), 2);
        assert_eq!(f2_rank(&[0b001, 0b010, 0b100]), 3);
        assert_eq!(f2_rank(&[0, 0]), 0);
    }

    #[test]
    fn count_hint_matches_membership() {
        let b = OmegaSet::from_fn("1,3,4,9", |i| matches!(i, 1 | 3 | 4 | 9));
        let a = block_set(&b);
        let mut running = 0;
        for n in 0..BlockLayout::end(6) + 17 {
            assert_eq!(a.count_hint(n), Some(running), "n = {n}");
            running += a.contains(n) as u64;
        }
    }

    #[test]
    fn half_of_every_block_once_source_meets_it() {
        let b = OmegaSet::from_fn("{2, 5}", |i| i == 2 || i == 5);
        let a = block_set(&b);
        for m in 0..7 {
            let count = (BlockLayout::start(m)..BlockLayout::end(m)).filter(|&k| a.contains(k)).count() as u64;
            let expected = if m > 2 { BlockLayout::len(m) / 2 } else { 0 };
            assert_eq!(count, expected, "m = {m}");
        }
    }

    #[test]
    fn coded_sources_reach_full_rank_at_eight() {
        let sources: Vec<OmegaSet> = ["00", "01", "10"].iter().map(|s| coded_from_bits(s, 5).unwrap()).collect();
        let profile = rank_profile(&sources);
        assert_eq!(&profile[..9], &[0, 0, 1, 1, 2, 2, 2, 2, 3]);
        assert_eq!(first_full_rank_block(&sources, 8), Some(8));
        assert_eq!(first_full_rank_block(&sources, 7), None);
        let family = block_transform(&sources).unwrap();
        let sets: Vec<OmegaSet> = family.members().iter().map(|m| m.set.clone()).collect();
        // I_6 is below m0: two of the transformed sets coincide there
        let counts = block_atom_counts(&sets, 6, 4);
        assert_eq!(counts.iter().sum::<u64>(), BlockLayout::len(6));
        assert!(counts.contains(&0));
    }
}
