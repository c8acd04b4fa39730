//! Greedy packing of atoms under a density budget.
//!
//! Over sets `B_0, …, B_{m−1}` with expected atom densities given by the
//! product rule, choose `Σ ⊆ {σ ∈ 2^m : σ(0) = i}` that contains every
//! refinement of the previous level's patterns, has total density `< x`, and
//! has maximal cardinality. Cardinality is maximised by adding the cheapest
//! eligible atoms first; ties go to the lexicographically smaller pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Density;
use crate::pattern::SignPattern;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    /// Chosen patterns, sorted lexicographically.
    pub chosen: Vec<SignPattern>,
    pub total: Density,
    pub target: Density,
    /// Eligible patterns left out, with their expected densities.
    pub excluded: Vec<(SignPattern, Density)>,
}

impl Packing {
    /// Every excluded eligible atom would push the total to at least the target.
    pub fn certificate_holds(&self) -> bool {
        self.total < self.target && self.excluded.iter().all(|(_, d)| (&self.total + d) >= self.target)
    }
}

/// One level of the packing. `previous` holds the previous level's patterns
/// (all of one length `≤ densities.len()`); pass an empty slice at the first level.
pub fn greedy_atom_pack(
    densities: &[Density],
    previous: &[SignPattern],
    side: bool,
    target: &Density,
) -> Result<Packing> {
    let m = densities.len() as u32;
    if m == 0 {
        return Err(Error::EmptyFamily);
    }
    if m > 20 {
        return Err(Error::TooLarge { size: m as usize, limit: 20 });
    }
    let target = target.clone().check_open_unit("target")?;
    let prev_len = previous.first().map_or(0, |p| p.len());
    if let Some(bad) = previous.iter().find(|p| p.len() != prev_len || p.len() > m) {
        return Err(Error::BadPattern(bad.to_string()));
    }

    let eligible = SignPattern::all(m).filter(|s| s.get(0) == side);
    let (forced, mut free): (Vec<_>, Vec<_>) = eligible
        .map(|s| (s, s.expected_density(densities)))
        .partition(|(s, _)| !previous.is_empty() && previous.contains(&s.restrict(prev_len)));

    let mut total: Density = forced.iter().map(|(_, d)| d.clone()).sum();
    if total >= target {
        return Err(Error::OutOfUnitInterval { what: "forced refinements' total vs target", value: total.to_string() });
    }
    let mut chosen: Vec<SignPattern> = forced.into_iter().map(|(s, _)| s).collect();

    free.sort_by(|(a, da), (b, db)| da.cmp(db).then(a.cmp(b)));
    let mut excluded = Vec::new();
    for (s, d) in free {
        let next = &total + &d;
        if next < target && excluded.is_empty() {
            total = next;
            chosen.push(s);
        } else {
            excluded.push((s, d));
        }
    }
    chosen.sort();
    excluded.sort_by_key(|a| a.0);
    Ok(Packing { chosen, total, target, excluded })
}

/// Runs the packing across increasing levels `m_0 < m_1 < …` (each `≤ densities.len()`).
pub fn greedy_pack_levels(densities: &[Density], levels: &[usize], side: bool, target: &Density) -> Result<Vec<Packing>> {
    let mut out: Vec<Packing> = Vec::new();
    for &m in levels {
        if m == 0 || m > densities.len() {
            return Err(Error::TooLarge { size: m, limit: densities.len() });
        }
        let previous = out.last().map(|p| p.chosen.clone()).unwrap_or_default();
        out.push(greedy_atom_pack(&densities[..m], &previous, side, target)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(m: usize) -> Vec<Density> {
        vec![Density::new(1, 2); m]
    }

    #[test]
    fn single_set() {
        let d = [Density::new(2, 5)];
        let p = greedy_atom_pack(&d, &[], true, &Density::new(1, 2)).unwrap();
        assert_eq!(p.chosen, vec!["1".parse().unwrap()]);
        let p = greedy_atom_pack(&d, &[], true, &Density::new(1, 5)).unwrap();
        assert!(p.chosen.is_empty());
        assert!(p.certificate_holds());
    }

    #[test]
    fn three_halves_budget_point_three() {
        let p = greedy_atom_pack(&halves(3), &[], false, &Density::new(3, 10)).unwrap();
        assert_eq!(p.chosen.len(), 2);
        assert_eq!(p.total, Density::new(1, 4));
        let names: Vec<String> = p.chosen.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["000", "001"]);
        assert!(p.certificate_holds());
    }

    #[test]
    fn cheapest_atoms_first() {
        let d = [Density::new(1, 2), Density::new(9, 10), Density::new(1, 5)];
        let p = greedy_atom_pack(&d, &[], true, &Density::new(1, 10)).unwrap();
        // 1·0·1: 1/2·1/10·1/5 = 1/100, 1·0·0: 4/100, 1·1·1: 9/100, 1·1·0: 36/100
        let names: Vec<String> = p.chosen.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["100", "101"]);
        assert_eq!(p.total, Density::new(5, 100));
        assert!(p.certificate_holds());
    }

    #[test]
    fn levels_refine_previous_choices() {
        let d = vec![Density::new(1, 2), Density::new(1, 3), Density::new(3, 4), Density::new(1, 2)];
        let levels = greedy_pack_levels(&d, &[2, 3, 4], true, &Density::new(2, 5)).unwrap();
        for w in levels.windows(2) {
            let (coarse, fine) = (&w[0], &w[1]);
            let len = coarse.chosen[0].len();
            for s in SignPattern::all(fine.chosen[0].len()).filter(|s| coarse.chosen.contains(&s.restrict(len))) {
                assert!(fine.chosen.contains(&s));
            }
            assert!(fine.total >= coarse.total);
        }
        assert!(levels.iter().all(Packing::certificate_holds));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(greedy_atom_pack(&[], &[], true, &Density::new(1, 2)).is_err());
        assert!(greedy_atom_pack(&halves(2), &[], true, &Density::one()).is_err());
        let prev = ["1".parse().unwrap(), "10".parse().unwrap()];
        assert!(greedy_atom_pack(&halves(2), &prev, true, &Density::new(1, 2)).is_err());
    }
}
