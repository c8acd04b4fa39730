//! Empirical certification of the product rule over every sign pattern, and
//! exact enumeration of the field generated by a finite subfamily.
//!
//! For a subfamily `F = (A_0, …, A_{k−1})` and `σ ∈ 2^k`, the atom
//! `⋂_j A_j^{σ(j)}` has target density `∏_j (σ(j)·p_j + (1−σ(j))·(1−p_j))`.
//! [`verify_independence`] counts all `2^k` atoms in one pass (each index lies
//! in exactly one atom) and compares the final-window density with the target.
//! Every element of the generated field is a disjoint union of atoms, so its
//! target density is a sum of atom targets; [`field_elements`] enumerates
//! those unions exhaustively for `k ≤ 4`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::density::{DensityEstimate, Status, WindowCount, WindowSchedule};
use crate::error::{Error, Result};
use crate::exact::Density;
use crate::family::{Family, Member};
use crate::omega::{OmegaSet, SetExpr};
use crate::pattern::SignPattern;
use crate::sweep;

/// Largest subfamily swept pattern by pattern.
pub const MAX_PATTERN_FAMILY: usize = 5;
/// Largest subfamily whose generated field is enumerated (`2^(2^4)` elements).
pub const MAX_FIELD_FAMILY: usize = 4;

fn select<'a>(family: &'a Family, names: &[impl AsRef<str>], limit: usize) -> Result<Vec<&'a Member>> {
    if names.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if names.len() > limit {
        return Err(Error::TooLarge { size: names.len(), limit });
    }
    family.select(names)
}

/// `⋂_j A_j^{σ(j)}` over the named members.
pub fn atom(family: &Family, names: &[impl AsRef<str>], pattern: SignPattern) -> Result<SetExpr> {
    let members = family.select(names)?;
    if pattern.len() as usize != members.len() {
        return Err(Error::BadPattern(pattern.to_string()));
    }
    Ok(atom_of(&members.iter().map(|m| &m.set).collect::<Vec<_>>(), pattern))
}

fn atom_of(sets: &[&OmegaSet], pattern: SignPattern) -> SetExpr {
    if let ([s], true) = (sets, pattern.get(0)) {
        return SetExpr::Base((*s).clone());
    }
    SetExpr::intersect_all(sets.iter().enumerate().map(|(j, s)| {
        if pattern.get(j as u32) {
            SetExpr::from(*s)
        } else {
            SetExpr::complement(*s)
        }
    }))
}

/// Index of the atom containing `n`: bit `j` is `n ∈ sets[j]`.
#[inline]
pub fn atom_index(sets: &[&OmegaSet], n: u64) -> usize {
    sets.iter().enumerate().fold(0, |acc, (j, s)| acc | (s.contains(n) as usize) << j)
}

/// Per-atom exact counts at every window, from a single sweep.
/// `result[σ.index()][j]` is the count of atom `σ` below window `j`.
pub fn atom_window_counts(sets: &[&OmegaSet], schedule: &WindowSchedule) -> Vec<Vec<WindowCount>> {
    let counts = sweep::class_counts(schedule.windows(), 1 << sets.len(), schedule.workers, |n| atom_index(sets, n));
    (0..1usize << sets.len())
        .map(|c| {
            schedule
                .windows()
                .iter()
                .zip(&counts)
                .map(|(&n, row)| WindowCount { n, count: row[c] })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub pattern: SignPattern,
    pub expected: Density,
    pub expected_decimal: f64,
    pub estimate: DensityEstimate,
    /// `|expected − empirical|` at the largest window.
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub domain: Vec<String>,
    pub tolerance: f64,
    pub atoms: Vec<AtomReport>,
    pub pass: bool,
}

impl IndependenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.atoms.iter().map(|a| a.deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AtomReport> {
        self.atoms.iter().filter(|a| !a.pass)
    }
}

/// Compares every atom of the named subfamily against its product target.
/// An atom passes when its deviation and its own window oscillation are both `≤ tol`.
pub fn verify_independence(
    family: &Family,
    names: &[impl AsRef<str>],
    schedule: &WindowSchedule,
    tol: f64,
) -> Result<IndependenceReport> {
    let members = select(family, names, MAX_PATTERN_FAMILY)?;
    let sets: Vec<&OmegaSet> = members.iter().map(|m| &m.set).collect();
    let densities: Vec<Density> = members.iter().map(|m| m.density.clone()).collect();
    let counts = atom_window_counts(&sets, schedule);

    let atoms: Vec<AtomReport> = SignPattern::all(sets.len() as u32)
        .map(|pattern| {
            let expected = pattern.expected_density(&densities);
            let estimate = DensityEstimate::from_counts(counts[pattern.index()].clone(), tol);
            let deviation = (expected.to_f64() - estimate.value_f64()).abs();
            let pass = deviation <= tol && estimate.status == Status::Converged;
            AtomReport { pattern, expected_decimal: expected.to_f64(), expected, estimate, deviation, pass }
        })
        .collect();
    let pass = atoms.iter().all(|a| a.pass);
    Ok(IndependenceReport {
        domain: members.iter().map(|m| m.name.clone()).collect(),
        tolerance: tol,
        atoms,
        pass,
    })
}

/// An element of the generated field: the union of the atoms whose pattern
/// index is set in `atoms`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldElement {
    pub atoms: u32,
    pub expected: Density,
}

impl FieldElement {
    pub fn patterns(&self, k: u32) -> Vec<SignPattern> {
        SignPattern::all(k).filter(|p| self.atoms >> p.index() & 1 == 1).collect()
    }

    /// The element as a set expression over `sets`.
    pub fn to_expr(&self, sets: &[&OmegaSet]) -> SetExpr {
        SetExpr::union_all(self.patterns(sets.len() as u32).into_iter().map(|p| atom_of(sets, p)))
    }
}

/// Expected atom densities of the named subfamily, indexed by pattern index.
pub fn atom_targets(family: &Family, names: &[impl AsRef<str>]) -> Result<Vec<Density>> {
    let members = family.select(names)?;
    let densities: Vec<Density> = members.iter().map(|m| m.density.clone()).collect();
    Ok(SignPattern::all(members.len() as u32).map(|p| p.expected_density(&densities)).collect())
}

/// All `2^(2^k)` elements of the field generated by the named members, with
/// expected densities, indexed by atom mask.
pub fn field_elements(family: &Family, names: &[impl AsRef<str>]) -> Result<Vec<FieldElement>> {
    select(family, names, MAX_FIELD_FAMILY)?;
    let atoms = atom_targets(family, names)?;
    let n_elements = 1usize << atoms.len();
    let mut sums: Vec<Density> = Vec::with_capacity(n_elements);
    sums.push(Density::zero());
    for mask in 1..n_elements {
        let low = mask.trailing_zeros() as usize;
        let value = &sums[mask & (mask - 1)] + &atoms[low];
        sums.push(value);
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(mask, expected)| FieldElement { atoms: mask as u32, expected })
        .collect())
}

/// Expected densities of all field elements, sorted, with multiplicity.
pub fn field_image(family: &Family, names: &[impl AsRef<str>]) -> Result<Vec<Density>> {
    let mut image: Vec<Density> = field_elements(family, names)?.into_iter().map(|e| e.expected).collect();
    image.sort();
    Ok(image)
}

/// Coverage of `[0, 1]` by field-image values on a grid of width `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageScan {
    pub delta: Density,
    /// Members used, in family order.
    pub depth: usize,
    /// Largest expected atom density at that depth.
    pub max_atom: Density,
    /// Whether the image was enumerated exhaustively (depth ≤ 4) or walked by partial sums.
    pub exhaustive: bool,
    /// `hit[j]` for the cell `[jδ, (j+1)δ)`; the last cell is closed at 1.
    pub hit: Vec<bool>,
}

impl ImageScan {
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let d = self.delta.to_f64();
        (j as f64 * d, ((j + 1) as f64 * d).min(1.0))
    }

    pub fn unhit(&self) -> Vec<usize> {
        self.hit.iter().enumerate().filter(|(_, h)| !**h).map(|(j, _)| j).collect()
    }

    pub fn all_hit(&self) -> bool {
        self.hit.iter().all(|&h| h)
    }
}

fn cell_of(v: &Density, delta: &Density, cells: usize) -> usize {
    let q = v.as_rational() / delta.as_rational();
    let j: BigInt = q.floor().to_integer();
    j.to_usize().unwrap_or(0).min(cells - 1)
}

/// Marks grid cells reached by field-image values.
///
/// The depth is the shortest prefix of the family whose largest atom is
/// below `δ` (all members if none is); at that depth the partial sums of the
/// atom densities step through `[0, 1]` in increments below `δ`, so every cell
/// is reached. Depths up to 4 are enumerated exhaustively instead, which also
/// exposes gaps.
pub fn image_density_scan(family: &Family, delta: &Density) -> Result<ImageScan> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let delta = delta.clone().check_open_unit("grid step")?;
    let cells = (Density::one().as_rational() / delta.as_rational())
        .ceil()
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::Parse(delta.to_string()))?;
    let members = family.members();
    let mut depth = 0;
    let mut max_atom = Density::one();
    while depth < members.len() && max_atom >= delta && depth < 24 {
        let p = &members[depth].density;
        max_atom = &max_atom * &std::cmp::max(p.clone(), p.complement());
        depth += 1;
    }
    let names: Vec<&str> = members[..depth].iter().map(|m| m.name.as_str()).collect();
    let mut hit = vec![false; cells];
    let exhaustive = depth <= MAX_FIELD_FAMILY;
    if exhaustive {
        for v in field_image(family, &names)? {
            hit[cell_of(&v, &delta, cells)] = true;
        }
    } else {
        let mut atoms = atom_targets(family, &names)?;
        atoms.sort();
        let mut sum = Density::zero();
        hit[0] = true;
        for a in atoms {
            sum = &sum + &a;
            hit[cell_of(&sum, &delta, cells)] = true;
        }
    }
    Ok(ImageScan { delta, depth, max_atom, exhaustive, hit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::kw::{kw_family, KwSeed};

    fn two_family(p: i64, q: i64) -> Family {
        let mut f = Family::default();
        f.push("A", OmegaSet::multiples(2).unwrap(), Density::new(p, 10)).unwrap();
        f.push("B", OmegaSet::multiples(3).unwrap(), Density::new(q, 10)).unwrap();
        f
    }

    #[test]
    fn atoms_of_a_single_set() {
        let f = two_family(5, 3);
        let a = atom(&f, &["A"], "1".parse().unwrap()).unwrap();
        assert!((0..100).all(|n| a.contains(n) == (n % 2 == 0)));
        let a0 = atom(&f, &["A"], "0".parse().unwrap()).unwrap();
        assert!((0..100).all(|n| a0.contains(n) == (n % 2 == 1)));
        assert!(atom(&f, &["A"], "01".parse().unwrap()).is_err());
        assert!(atom(&f, &["Q"], "0".parse().unwrap()).is_err());
    }

    #[test]
    fn atoms_partition_omega() {
        let f = two_family(5, 3);
        for n in [0u64, 1, 7, 600, 1001] {
            let total: u64 = SignPattern::all(2)
                .map(|p| atom(&f, &["A", "B"], p).unwrap().prefix_count(n))
                .sum();
            assert_eq!(total, n);
        }
    }

    #[test]
    fn multiples_of_two_and_three_are_independent() {
        let mut f = Family::default();
        f.push("A", OmegaSet::multiples(2).unwrap(), Density::new(1, 2)).unwrap();
        f.push("B", OmegaSet::multiples(3).unwrap(), Density::new(1, 3)).unwrap();
        let report = verify_independence(&f, &["A", "B"], &WindowSchedule::default(), 1e-3).unwrap();
        assert!(report.pass, "{report:#?}");
        assert_eq!(report.atoms[3].expected, Density::new(1, 6));
    }

    #[test]
    fn verify_preconditions() {
        let f = two_family(5, 3);
        let s = WindowSchedule::default();
        assert_eq!(verify_independence(&f, &["A", "A"], &s, 1e-3).unwrap_err(), Error::DuplicateName("A".into()));
        assert!(verify_independence(&f, &[] as &[&str], &s, 1e-3).is_err());
        let six: Vec<String> = (0..6).map(|i| format!("x{i}")).collect();
        assert!(matches!(verify_independence(&f, &six, &s, 1e-3), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn small_field_images() {
        let f = two_family(3, 6);
        let one = field_elements(&f, &["A"]).unwrap();
        let vals: Vec<Density> = one.iter().map(|e| e.expected.clone()).collect();
        assert_eq!(vals, vec![Density::zero(), Density::new(7, 10), Density::new(3, 10), Density::one()]);
        let two = field_elements(&f, &["A", "B"]).unwrap();
        assert_eq!(two.len(), 16);
        // {(1,0), (0,1)} is A △ B; pattern indices 0b01 and 0b10
        let sd = two.iter().find(|e| e.atoms == 0b0110).unwrap();
        let (p, q) = (Density::new(3, 10), Density::new(6, 10));
        assert_eq!(sd.expected, &(&p * &q.complement()) + &(&p.complement() * &q));
    }

    #[test]
    fn image_is_complement_symmetric() {
        let f = two_family(3, 6);
        let image = field_image(&f, &["A", "B"]).unwrap();
        let mut mirrored: Vec<Density> = image.iter().map(Density::complement).collect();
        mirrored.sort();
        assert_eq!(image, mirrored);
        assert_eq!(image.first(), Some(&Density::zero()));
        assert_eq!(image.last(), Some(&Density::one()));
    }

    #[test]
    fn field_elements_of_three_are_closed() {
        let f = kw_family(&[
            KwSeed::with_decimal(2, 0.3).unwrap(),
            KwSeed::with_decimal(3, 0.5).unwrap(),
            KwSeed::with_decimal(5, 0.7).unwrap(),
        ])
        .unwrap();
        let els = field_elements(&f, &["sqrt2", "sqrt3", "sqrt5"]).unwrap();
        assert_eq!(els.len(), 256);
        let masks: std::collections::HashSet<u32> = els.iter().map(|e| e.atoms).collect();
        for e in &els {
            assert!(masks.contains(&(!e.atoms & 0xff)));
            for g in &els {
                assert!(masks.contains(&(e.atoms | g.atoms)));
            }
        }
        assert!(field_elements(&f, &["sqrt2", "sqrt3", "sqrt5", "sqrt2"]).is_err());
    }

    #[test]
    fn density_scan_with_many_halves() {
        let mut f = Family::default();
        for j in 0..7 {
            f.push(format!("H{j}"), OmegaSet::omega(), Density::new(1, 2)).unwrap();
        }
        let scan = image_density_scan(&f, &Density::new(1, 100)).unwrap();
        assert_eq!(scan.depth, 7);
        assert!(!scan.exhaustive);
        assert!(scan.all_hit());
    }

    #[test]
    fn density_scan_of_one_member() {
        let mut f = Family::default();
        f.push("A", OmegaSet::omega(), Density::new(3, 10)).unwrap();
        let scan = image_density_scan(&f, &Density::new(1, 100)).unwrap();
        assert_eq!(scan.hit.len(), 100);
        let hits: Vec<usize> = scan.hit.iter().enumerate().filter(|(_, h)| **h).map(|(j, _)| j).collect();
        assert_eq!(hits, vec![0, 30, 70, 99]);
        // strictly between 0.7 and 1 nothing is reached
        assert!((71..99).all(|j| !scan.hit[j]));
        assert!(image_density_scan(&Family::default(), &Density::new(1, 10)).is_err());
    }
}
