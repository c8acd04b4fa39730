use std::sync::RwLock;

use super::{OmegaSet, Oracle};

const CHUNK_WORDS: usize = 8;
const CHUNK_BITS: u64 = 64 * CHUNK_WORDS as u64;

/// Append-only record of the inner set's membership bits, plus the running
/// count at the start of every chunk.
#[derive(Default)]
struct Enumeration {
    words: Vec<u64>,
    checkpoints: Vec<u64>,
}

impl Enumeration {
    fn chunks(&self) -> u64 {
        self.checkpoints.len() as u64
    }

    fn extend_to(&mut self, inner: &OmegaSet, chunk: u64) {
        while self.chunks() <= chunk {
            let start = self.chunks() * CHUNK_BITS;
            let before = match self.checkpoints.last() {
                Some(&c) => c + self.words[self.words.len() - CHUNK_WORDS..]
                    .iter()
                    .map(|w| w.count_ones() as u64)
                    .sum::<u64>(),
                None => 0,
            };
            for w in 0..CHUNK_WORDS as u64 {
                let base = start + 64 * w;
                let mut word = 0u64;
                for b in 0..64 {
                    if inner.contains(base + b) {
                        word |= 1 << b;
                    }
                }
                self.words.push(word);
            }
            self.checkpoints.push(before);
        }
    }

    /// `|S ∩ [0, n)|`; the chunk holding `n` must be present.
    fn rank(&self, n: u64) -> u64 {
        let chunk = (n / CHUNK_BITS) as usize;
        let within = n % CHUNK_BITS;
        let words = &self.words[chunk * CHUNK_WORDS..];
        let full = (within / 64) as usize;
        let mut r = self.checkpoints[chunk];
        r += words[..full].iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let rem = within % 64;
        if rem > 0 {
            r += (words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        r
    }
}

pub(super) struct Thinned {
    inner: OmegaSet,
    cache: RwLock<Enumeration>,
}

impl Thinned {
    pub(super) fn new(inner: OmegaSet) -> Self {
        Thinned { inner, cache: RwLock::new(Enumeration::default()) }
    }

    fn rank(&self, n: u64) -> u64 {
        if let Some(c) = self.inner.count_hint(n) {
            return c;
        }
        let chunk = n / CHUNK_BITS;
        {
            let cache = self.cache.read().expect("thin cache poisoned");
            if cache.chunks() > chunk {
                return cache.rank(n);
            }
        }
        let mut cache = self.cache.write().expect("thin cache poisoned");
        cache.extend_to(&self.inner, chunk);
        cache.rank(n)
    }
}

impl Oracle for Thinned {
    fn contains(&self, n: u64) -> bool {
        self.inner.contains(n) && self.rank(n).is_multiple_of(2)
    }

    fn count_below(&self, n: u64) -> Option<u64> {
        Some(self.rank(n).div_ceil(2))
    }
}
