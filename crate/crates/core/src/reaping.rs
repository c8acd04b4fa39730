//! Half-bisection tests, the thin extension of a finite family, and witnesses
//! of failed independence.

use serde::{Deserialize, Serialize};

use crate::density::{oscillation, Countable, WindowCount, WindowSchedule};
use crate::error::{Error, Result};
use crate::exact::Density;
use crate::family::Family;
use crate::independence::{atom_index, MAX_PATTERN_FAMILY};
use crate::omega::{Descriptor, OmegaSet, Oracle, SetExpr};
use crate::pattern::SignPattern;
use crate::sweep;

/// `|S ∩ B ∩ n| / |B ∩ n|` at one window, kept as the two counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeWindow {
    pub n: u64,
    pub reference: u64,
    pub both: u64,
}

impl RelativeWindow {
    pub fn to_f64(&self) -> f64 {
        self.both as f64 / self.reference as f64
    }

    fn as_count(&self) -> WindowCount {
        WindowCount { n: self.reference, count: self.both }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectReport {
    pub reference: String,
    pub windows: Vec<RelativeWindow>,
    pub relative: f64,
    pub oscillation: f64,
    pub pass: bool,
}

/// Checks that `S` takes relative density ½ inside every reference set.
pub fn bisect_check<S, B>(s: &S, references: &[(String, B)], schedule: &WindowSchedule, tol: f64) -> Result<Vec<BisectReport>>
where
    S: Countable + ?Sized,
    B: Countable,
{
    references
        .iter()
        .map(|(name, b)| {
            let counts = sweep::class_counts(schedule.windows(), 3, schedule.workers, |k| {
                if !b.contains(k) {
                    0
                } else if s.contains(k) {
                    2
                } else {
                    1
                }
            });
            let windows: Vec<RelativeWindow> = schedule
                .windows()
                .iter()
                .zip(&counts)
                .map(|(&n, row)| RelativeWindow { n, reference: row[1] + row[2], both: row[2] })
                .collect();
            if windows[0].reference == 0 {
                return Err(Error::EmptyReference { name: name.clone(), n: windows[0].n });
            }
            let relative = windows.last().expect("schedule has windows").to_f64();
            let oscillation = oscillation(&windows.iter().map(RelativeWindow::as_count).collect::<Vec<_>>());
            let pass = (relative - 0.5).abs() <= tol && oscillation <= tol;
            Ok(BisectReport { reference: name.clone(), windows, relative, oscillation, pass })
        })
        .collect()
}

/// The nonempty finite intersections of the named members, labelled `A∩B∩…`.
pub fn intersections(family: &Family, names: &[impl AsRef<str>]) -> Result<Vec<(String, SetExpr)>> {
    let members = family.select(names)?;
    if members.len() > MAX_PATTERN_FAMILY {
        return Err(Error::TooLarge { size: members.len(), limit: MAX_PATTERN_FAMILY });
    }
    Ok((1u32..1 << members.len())
        .map(|mask| {
            let chosen: Vec<_> = members.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, m)| m).collect();
            let label = chosen.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join("∩");
            (label, SetExpr::intersect_all(chosen.iter().map(|m| SetExpr::from(&m.set))))
        })
        .collect())
}

struct ThinUnion {
    sets: Vec<OmegaSet>,
    thinned_atoms: Vec<OmegaSet>,
}

impl Oracle for ThinUnion {
    fn contains(&self, n: u64) -> bool {
        let sets: Vec<&OmegaSet> = self.sets.iter().collect();
        self.thinned_atoms[atom_index(&sets, n)].contains(n)
    }

    fn count_below(&self, n: u64) -> Option<u64> {
        self.thinned_atoms.iter().map(|t| t.count_hint(n)).sum()
    }
}

/// `B = ⋃_σ thin(⋂_j A_j^{σ(j)})` over all members: every atom keeps every
/// other element, so `B` halves each atom and has density ½.
pub fn thin_extension(family: &Family) -> Result<OmegaSet> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if family.len() > MAX_PATTERN_FAMILY {
        return Err(Error::TooLarge { size: family.len(), limit: MAX_PATTERN_FAMILY });
    }
    let sets: Vec<OmegaSet> = family.members().iter().map(|m| m.set.clone()).collect();
    let refs: Vec<&OmegaSet> = sets.iter().collect();
    let thinned_atoms: Vec<OmegaSet> = SignPattern::all(sets.len() as u32)
        .map(|p| {
            SetExpr::intersect_all(refs.iter().enumerate().map(|(j, s)| {
                if p.get(j as u32) {
                    SetExpr::from(*s)
                } else {
                    SetExpr::complement(*s)
                }
            }))
            .to_set()
            .thin()
        })
        .collect();
    let descriptor = Descriptor::Union { of: thinned_atoms.iter().map(|t| t.descriptor().clone()).collect() };
    Ok(OmegaSet::new(ThinUnion { sets, thinned_atoms }, descriptor))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub joint: WindowCount,
    pub joint_density: f64,
    /// `d(B)·d(A)` from the declared densities.
    pub product: Density,
    pub gap: f64,
    pub margin: f64,
    /// `gap ≥ margin`: the pair violates the product rule.
    pub flag: bool,
}

/// Compares `d̂(B ∩ A)` at the largest window with `d(B)·d(A)`.
pub fn nonindependence_witness(
    b: &OmegaSet,
    a: &OmegaSet,
    density_b: &Density,
    density_a: &Density,
    schedule: &WindowSchedule,
    margin: f64,
) -> WitnessReport {
    let n = schedule.largest();
    let count = sweep::member_counts(&[n], schedule.workers, |k| a.contains(k) && b.contains(k))[0];
    let joint = WindowCount { n, count };
    let product = density_b * density_a;
    let gap = (joint.to_f64() - product.to_f64()).abs();
    WitnessReport { joint, joint_density: joint.to_f64(), product, gap, margin, flag: gap >= margin }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mult(m: u64) -> OmegaSet {
        OmegaSet::multiples(m).unwrap()
    }

    #[test]
    fn evens_bisect_omega_but_not_multiples_of_four() {
        let s = WindowSchedule::default();
        let ok = bisect_check(&mult(2), &[("omega".to_string(), OmegaSet::omega())], &s, 1e-3).unwrap();
        assert!(ok[0].pass);
        assert_eq!(ok[0].windows[0].both, 5000);
        let bad = bisect_check(&mult(2), &[("4w".to_string(), mult(4))], &s, 1e-3).unwrap();
        assert!(!bad[0].pass);
        assert_eq!(bad[0].relative, 1.0);
        let empty = bisect_check(&mult(2), &[("none".to_string(), OmegaSet::empty())], &s, 1e-3);
        assert_eq!(empty.unwrap_err(), Error::EmptyReference { name: "none".into(), n: 10_000 });
    }

    #[test]
    fn thin_extension_of_evens() {
        let mut f = Family::default();
        f.push("A", mult(2), Density::new(1, 2)).unwrap();
        let b = thin_extension(&f).unwrap();
        for n in [0u64, 1, 2, 3, 10, 999, 12_345] {
            let expected = mult(2).prefix_count(n).div_ceil(2) + mult(2).complement().prefix_count(n).div_ceil(2);
            assert_eq!(b.prefix_count(n), expected);
            assert_eq!((0..n).filter(|&k| b.contains(k)).count() as u64, expected);
        }
        // 0,4,8,… and 1,5,9,…
        assert!((0..1000).all(|k| b.contains(k) == (k % 4 < 2)));
        assert!(thin_extension(&Family::default()).is_err());
    }

    #[test]
    fn witness_for_a_set_against_itself() {
        let a = mult(2);
        let half = Density::new(1, 2);
        let w = nonindependence_witness(&a, &a, &half, &half, &WindowSchedule::default(), 0.1);
        assert!((w.gap - 0.25).abs() < 1e-9);
        assert!(w.flag);
        let b = mult(3);
        let third = Density::new(1, 3);
        let w1 = nonindependence_witness(&b, &a, &third, &half, &WindowSchedule::default(), 1e-3);
        let w2 = nonindependence_witness(&a, &b, &half, &third, &WindowSchedule::default(), 1e-3);
        assert_eq!(w1, w2);
        assert!(!w1.flag);
    }

    #[test]
    fn intersections_are_labelled() {
        let mut f = Family::default();
        f.push("A", mult(2), Density::new(1, 2)).unwrap();
        f.push("B", mult(3), Density::new(1, 3)).unwrap();
        let labels: Vec<String> = intersections(&f, &["A", "B"]).unwrap().into_iter().map(|(l, _)| l).collect();
        assert_eq!(labels, ["A", "B", "A∩B"]);
    }
}
