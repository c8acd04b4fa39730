//! Prefix densities, window schedules and convergence diagnostics.
//!
//! Asymptotic density is a limit and cannot be observed; what can be observed
//! is the exact ratio `|S ∩ [0, N)| / N` at finitely many `N`. A
//! [`WindowSchedule`] fixes those `N` (geometrically spaced) and a
//! [`DensityEstimate`] records the exact counts together with the spread of
//! the last three window densities. Every verdict here is a finite-window
//! heuristic and is labelled as an estimate.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omega::{OmegaSet, SetExpr};
use crate::sweep;

/// Tolerance used for equidistribution constructions.
pub const EQUIDISTRIBUTION_TOL: f64 = 5e-3;

/// Number of trailing windows that the oscillation and upper-density
/// statistics look at.
pub const TAIL: usize = 3;

/// Tolerance for randomized constructions: `max(5e-3, 4/√N_max)`.
pub fn randomized_tolerance(n_max: u64) -> f64 {
    (4.0 / (n_max as f64).sqrt()).max(EQUIDISTRIBUTION_TOL)
}

/// Anything with pointwise membership and an optional closed-form count.
pub trait Countable: Sync {
    fn contains(&self, n: u64) -> bool;
    fn count_hint(&self, n: u64) -> Option<u64>;
}

impl Countable for OmegaSet {
    fn contains(&self, n: u64) -> bool {
        OmegaSet::contains(self, n)
    }
    fn count_hint(&self, n: u64) -> Option<u64> {
        OmegaSet::count_hint(self, n)
    }
}

impl Countable for SetExpr {
    fn contains(&self, n: u64) -> bool {
        SetExpr::contains(self, n)
    }
    fn count_hint(&self, n: u64) -> Option<u64> {
        SetExpr::to_set(self).count_hint(n)
    }
}

/// Increasing prefix lengths `N_0 < N_1 < … < N_{J-1}` at which densities are read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub start: u64,
    pub ratio: f64,
    windows: Vec<u64>,
    /// Evaluation threads. Never changes any count.
    #[serde(skip, default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

impl Default for WindowSchedule {
    /// `N_0 = 10^4`, `r = 2`, `J = 10` (largest window 5_120_000).
    fn default() -> Self {
        WindowSchedule::geometric(10_000, 2.0, 10).expect("default schedule is valid")
    }
}

impl WindowSchedule {
    /// `N_j = ⌈N_0 · r^j⌉` for `j < J`.
    pub fn geometric(start: u64, ratio: f64, count: usize) -> Result<Self> {
        Self::check_shape(start, ratio, count)?;
        let windows = (0..count)
            .map(|j| (start as f64 * ratio.powi(j as i32)).ceil() as u64)
            .collect();
        Self::from_windows(start, ratio, windows)
    }

    /// Geometric windows whose largest element is exactly `n_max`:
    /// `N_j = ⌈n_max / r^(J-1-j)⌉`.
    pub fn ending_at(n_max: u64, ratio: f64, count: usize) -> Result<Self> {
        Self::check_shape(n_max, ratio, count)?;
        let windows: Vec<u64> = (0..count)
            .map(|j| (n_max as f64 / ratio.powi((count - 1 - j) as i32)).ceil() as u64)
            .collect();
        Self::from_windows(windows[0], ratio, windows)
    }

    fn check_shape(start: u64, ratio: f64, count: usize) -> Result<()> {
        if count < TAIL {
            return Err(Error::Schedule(format!("need at least {TAIL} windows, got {count}")));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::Schedule(format!("ratio must exceed 1, got {ratio}")));
        }
        if start == 0 {
            return Err(Error::Schedule("first window must be positive".into()));
        }
        Ok(())
    }

    fn from_windows(start: u64, ratio: f64, windows: Vec<u64>) -> Result<Self> {
        if windows[0] == 0 || windows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schedule(format!("windows are not strictly increasing: {windows:?}")));
        }
        Ok(WindowSchedule { start, ratio, windows, workers: 1 })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn windows(&self) -> &[u64] {
        &self.windows
    }

    pub fn largest(&self) -> u64 {
        *self.windows.last().expect("schedule is nonempty")
    }

    /// `1 / N_0`: the coarsest resolution of any window density.
    pub fn granularity(&self) -> f64 {
        1.0 / self.windows[0] as f64
    }
}

/// An exact count at one window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCount {
    pub n: u64,
    pub count: u64,
}

impl WindowCount {
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.count, self.n)
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / self.n as f64
    }

    /// Unreduced `count/n`.
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.count, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    Oscillating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub windows: Vec<WindowCount>,
    pub oscillation: f64,
    pub status: Status,
}

impl DensityEstimate {
    pub fn from_counts(windows: Vec<WindowCount>, tol: f64) -> Self {
        let oscillation = oscillation(&windows);
        let status = if oscillation <= tol { Status::Converged } else { Status::Oscillating };
        DensityEstimate { windows, oscillation, status }
    }

    /// Density at the largest window.
    pub fn value(&self) -> Ratio<u64> {
        self.last().density()
    }

    pub fn value_f64(&self) -> f64 {
        self.last().to_f64()
    }

    pub fn last(&self) -> &WindowCount {
        self.windows.last().expect("estimate has windows")
    }

    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }
}

fn to_wide(r: Ratio<u64>) -> Ratio<u128> {
    Ratio::new_raw(*r.numer() as u128, *r.denom() as u128)
}

/// `max − min` of the densities of the last [`TAIL`] windows, computed exactly.
pub fn oscillation(windows: &[WindowCount]) -> f64 {
    let tail = &windows[windows.len().saturating_sub(TAIL)..];
    let ds: Vec<Ratio<u128>> = tail.iter().map(|w| to_wide(w.density())).collect();
    let (Some(max), Some(min)) = (ds.iter().max(), ds.iter().min()) else {
        return 0.0;
    };
    (max - min).to_f64().unwrap_or(f64::NAN)
}

/// Exact counts of `s` at every window, using the closed form when there is one.
pub fn window_counts<S: Countable + ?Sized>(s: &S, schedule: &WindowSchedule) -> Vec<WindowCount> {
    let hinted: Option<Vec<u64>> = schedule.windows().iter().map(|&n| s.count_hint(n)).collect();
    let counts = hinted.unwrap_or_else(|| sweep::member_counts(schedule.windows(), schedule.workers, |k| s.contains(k)));
    schedule
        .windows()
        .iter()
        .zip(counts)
        .map(|(&n, count)| WindowCount { n, count })
        .collect()
}

/// `|S ∩ [0, n)| / n`, exactly.
pub fn prefix_density<S: Countable + ?Sized>(s: &S, n: u64) -> Result<Ratio<u64>> {
    if n == 0 {
        return Err(Error::EmptyPrefix);
    }
    let count = s
        .count_hint(n)
        .unwrap_or_else(|| sweep::member_counts(&[n], 1, |k| s.contains(k))[0]);
    Ok(Ratio::new(count, n))
}

/// Window densities plus the converged/oscillating verdict at tolerance `tol`.
pub fn estimate_density<S: Countable + ?Sized>(s: &S, schedule: &WindowSchedule, tol: f64) -> DensityEstimate {
    DensityEstimate::from_counts(window_counts(s, schedule), tol)
}

fn tail_max(windows: &[WindowCount]) -> Ratio<u64> {
    windows[windows.len().saturating_sub(TAIL)..]
        .iter()
        .map(WindowCount::density)
        .max_by(|a, b| to_wide(*a).cmp(&to_wide(*b)))
        .expect("schedule has windows")
}

/// Finite surrogate for the upper density: the largest density among the
/// last [`TAIL`] windows.
pub fn upper_density_estimate<S: Countable + ?Sized>(s: &S, schedule: &WindowSchedule) -> Ratio<u64> {
    tail_max(&window_counts(s, schedule))
}

/// Estimate of `ρ(X, Y)`, the upper density of `X △ Y`.
pub fn rho_estimate(x: &OmegaSet, y: &OmegaSet, schedule: &WindowSchedule) -> Ratio<u64> {
    upper_density_estimate(&SetExpr::sym_diff(x, y), schedule)
}

/// `|S ∩ B ∩ [0, n)| / |B ∩ [0, n)|`, exactly.
pub fn relative_density<S, B>(s: &S, b: &B, n: u64) -> Result<Ratio<u64>>
where
    S: Countable + ?Sized,
    B: Countable + ?Sized,
{
    let counts = sweep::class_counts(&[n.max(1)], 4, 1, |k| {
        if k >= n {
            return 0;
        }
        (b.contains(k) as usize) << 1 | (b.contains(k) && s.contains(k)) as usize
    });
    let in_b = counts[0][2] + counts[0][3];
    if n == 0 || in_b == 0 {
        return Err(Error::EmptyReference { name: "B".into(), n });
    }
    Ok(Ratio::new(counts[0][3], in_b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mult(m: u64) -> OmegaSet {
        OmegaSet::multiples(m).unwrap()
    }

    fn even_dyadic() -> OmegaSet {
        OmegaSet::from_fn("even floor(log2(k+1))", |k| (63 - (k + 1).leading_zeros()) % 2 == 0)
    }

    #[test]
    fn schedules() {
        let s = WindowSchedule::default();
        assert_eq!(s.windows().len(), 10);
        assert_eq!(s.windows()[0], 10_000);
        assert_eq!(s.largest(), 5_120_000);
        let e = WindowSchedule::ending_at(1_000_000, 2.0, 10).unwrap();
        assert_eq!(e.largest(), 1_000_000);
        assert_eq!(e.windows()[8], 500_000);
        assert!(WindowSchedule::geometric(10, 2.0, 2).is_err());
        assert!(WindowSchedule::geometric(10, 1.0, 5).is_err());
        assert!(WindowSchedule::geometric(0, 2.0, 5).is_err());
        // ⌈1·1.01^j⌉ repeats values
        assert!(WindowSchedule::geometric(1, 1.01, 5).is_err());
    }

    #[test]
    fn prefix_densities() {
        assert_eq!(prefix_density(&mult(2), 10).unwrap(), Ratio::new(1, 2));
        assert_eq!(prefix_density(&OmegaSet::empty(), 77).unwrap(), Ratio::new(0, 1));
        assert!(prefix_density(&mult(2), 0).is_err());
        for p in [2u64, 3, 5, 7, 11] {
            for n in [1u64, 10, 999, 10_000] {
                assert_eq!(prefix_density(&mult(p), n).unwrap(), Ratio::new(n.div_ceil(p), n));
            }
        }
        let s = OmegaSet::from_fn("5 mod 7", |k| k % 7 == 5);
        assert_eq!(prefix_density(&s, 14).unwrap(), Ratio::new(1, 7));
    }

    #[test]
    fn estimate_of_evens_converges_to_half() {
        let est = estimate_density(&mult(2), &WindowSchedule::default(), 1e-3);
        assert_eq!(est.value(), Ratio::new(1, 2));
        assert!(est.is_converged());
        assert_eq!(est.oscillation, 0.0);
    }

    #[test]
    fn even_dyadic_blocks_oscillate() {
        let est = estimate_density(&even_dyadic(), &WindowSchedule::default(), 1e-3);
        assert_eq!(est.status, Status::Oscillating);
        // direct count at N = 2^j: ≈ 1/3 for even j, ≈ 2/3 for odd j
        for j in 10..20u32 {
            let n = 1u64 << j;
            let d = prefix_density(&even_dyadic(), n).unwrap().to_f64().unwrap();
            let target = if j % 2 == 0 { 1.0 / 3.0 } else { 2.0 / 3.0 };
            assert!((d - target).abs() < 1e-3, "j = {j}: {d}");
        }
    }

    #[test]
    fn upper_density() {
        let s = WindowSchedule::default();
        assert_eq!(upper_density_estimate(&mult(2), &s), Ratio::new(1, 2));
        assert_eq!(upper_density_estimate(&OmegaSet::empty(), &s), Ratio::new(0, 1));
        let dyadic = WindowSchedule::geometric(1 << 14, 2.0, 10).unwrap();
        let u = upper_density_estimate(&even_dyadic(), &dyadic).to_f64().unwrap();
        assert!((u - 2.0 / 3.0).abs() < 1e-4, "{u}");
    }

    #[test]
    fn rho_examples() {
        let s = WindowSchedule::default();
        let x = OmegaSet::from_fn("squarefree-ish", |k| k % 4 != 0 && k % 9 != 0);
        assert_eq!(rho_estimate(&x, &x, &s), Ratio::new(0, 1));
        assert_eq!(rho_estimate(&mult(2), &mult(2).complement(), &s), Ratio::new(1, 1));
        // X △ Y = {k ≡ 2 mod 4}
        assert_eq!(rho_estimate(&mult(2), &mult(4), &s), Ratio::new(1, 4));
    }

    #[test]
    fn relative_densities() {
        let b = OmegaSet::from_fn("1 mod 3", |k| k % 3 == 1);
        assert_eq!(relative_density(&OmegaSet::omega(), &b, 100).unwrap(), Ratio::new(1, 1));
        assert_eq!(relative_density(&mult(2), &mult(3), 12).unwrap(), Ratio::new(1, 2));
        let n = 1001;
        let expected = Ratio::new(b.prefix_count(n).div_ceil(2), b.prefix_count(n));
        assert_eq!(relative_density(&b.thin(), &b, n).unwrap(), expected);
        assert!(relative_density(&mult(2), &OmegaSet::empty(), 10).is_err());
        assert!(relative_density(&mult(2), &b, 0).is_err());
    }

    #[test]
    fn hinted_counts_agree_with_sweeps() {
        let schedule = WindowSchedule::geometric(100, 3.0, 6).unwrap().with_workers(4);
        for set in [mult(3), mult(7).complement(), mult(2).thin(), mult(5).scale(3).unwrap()] {
            let hinted = window_counts(&set, &schedule);
            let swept = sweep::member_counts(schedule.windows(), 3, |k| set.contains(k));
            assert_eq!(hinted.iter().map(|w| w.count).collect::<Vec<_>>(), swept);
        }
    }

    #[test]
    fn rho_triangle_inequality_on_estimates() {
        let s = WindowSchedule::geometric(500, 2.0, 5).unwrap();
        let sets = [mult(2), mult(3), mult(5).complement(), OmegaSet::from_fn("1 mod 7", |k| k % 7 == 1)];
        for x in &sets {
            for y in &sets {
                assert_eq!(rho_estimate(x, y, &s), rho_estimate(y, x, &s));
                for z in &sets {
                    let lhs = to_wide(rho_estimate(x, z, &s));
                    let rhs = to_wide(rho_estimate(x, y, &s)) + to_wide(rho_estimate(y, z, &s));
                    assert!(lhs <= rhs);
                }
            }
        }
    }
}
