//! Exact counting over `[0, N)` split across worker threads.
//!
//! Every index is classified once; per-worker tallies are summed, so the
//! result does not depend on how the range is partitioned.

use std::thread;

/// Cumulative class tallies: `counts[j][c] = |{k < boundaries[j] : classify(k) = c}|`.
///
/// `boundaries` must be strictly increasing. `classify` must return a value
/// below `classes`.
pub fn class_counts<F>(boundaries: &[u64], classes: usize, workers: usize, classify: F) -> Vec<Vec<u64>>
where
    F: Fn(u64) -> usize + Sync,
{
    let Some(&end) = boundaries.last() else {
        return Vec::new();
    };
    let workers = workers.clamp(1, end.max(1) as usize) as u64;
    let span = end.div_ceil(workers);
    let ranges: Vec<(u64, u64)> = (0..workers)
        .map(|w| ((w * span).min(end), ((w + 1) * span).min(end)))
        .collect();

    let tally = |(lo, hi): (u64, u64)| -> Vec<Vec<u64>> {
        let mut per_segment = vec![vec![0u64; classes]; boundaries.len()];
        let mut seg = boundaries.partition_point(|&b| b <= lo);
        for k in lo..hi {
            while boundaries[seg] <= k {
                seg += 1;
            }
            per_segment[seg][classify(k)] += 1;
        }
        per_segment
    };

    let partials: Vec<Vec<Vec<u64>>> = if workers == 1 {
        vec![tally(ranges[0])]
    } else {
        let tally = &tally;
        thread::scope(|scope| {
            let handles: Vec<_> = ranges.iter().map(|&r| scope.spawn(move || tally(r))).collect();
            handles.into_iter().map(|h| h.join().expect("counting worker panicked")).collect()
        })
    };

    let mut out = vec![vec![0u64; classes]; boundaries.len()];
    for part in &partials {
        for (seg, row) in part.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out[seg][c] += v;
            }
        }
    }
    for j in 1..out.len() {
        let (done, rest) = out.split_at_mut(j);
        for (v, prev) in rest[0].iter_mut().zip(&done[j - 1]) {
            *v += prev;
        }
    }
    out
}

/// Cumulative member counts of a predicate at each boundary.
pub fn member_counts<F>(boundaries: &[u64], workers: usize, member: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync,
{
    class_counts(boundaries, 2, workers, |k| member(k) as usize)
        .into_iter()
        .map(|row| row[1])
        .collect()
}

/// The worker count used when the caller does not choose one.
pub fn default_workers() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_serial_for_any_worker_count() {
        let bounds = [7, 100, 101, 5000];
        let f = |k: u64| ((k * k + 3 * k) % 5) as usize;
        let serial = class_counts(&bounds, 5, 1, f);
        for w in [2, 3, 8, 64, 10_000] {
            assert_eq!(class_counts(&bounds, 5, w, f), serial);
        }
        for (j, &b) in bounds.iter().enumerate() {
            assert_eq!(serial[j].iter().sum::<u64>(), b);
            assert_eq!(serial[j][0], (0..b).filter(|&k| f(k) == 0).count() as u64);
        }
    }

    #[test]
    fn member_counts_of_evens() {
        assert_eq!(member_counts(&[1, 10, 11], 4, |k| k % 2 == 0), vec![1, 5, 6]);
        assert!(member_counts(&[], 4, |_| true).is_empty());
    }
}
