//! A countable-style family whose field image misses an interval.
//!
//! With thresholds `p_n = p^(2^{-n-1})` the partial products stay above `p`,
//! and every element of the generated field either contains the intersection
//! `⋂ A_n` or is disjoint from it, so no density lands in `(1 − ∏p_n, ∏p_n)`.

use crate::error::{Error, Result};
use crate::exact::Density;
use crate::family::Family;

use super::kw::{is_square_free, kw_set, KwSeed};

/// `p_n = p^(2^{-n-1})` for `n < count`, each read exactly from its `f64` value.
pub fn gap_thresholds(p: &Density, count: usize) -> Result<Vec<Density>> {
    let pf = p.to_f64();
    (0..count)
        .map(|n| Density::from_f64(pf.powf(0.5f64.powi(n as i32 + 1))))
        .collect()
}

/// Kronecker–Weyl family `gap0, gap1, …` on the first `count` square-free
/// radicands, with thresholds from [`gap_thresholds`].
pub fn gap_family(p: &Density, count: usize) -> Result<Family> {
    if !(p > &Density::new(1, 2) && p < &Density::one()) {
        return Err(Error::GapTarget(p.to_string()));
    }
    if count == 0 {
        return Err(Error::EmptyFamily);
    }
    let thresholds = gap_thresholds(p, count)?;
    let product: Density = thresholds.iter().cloned().product();
    if &product < p {
        return Err(Error::GapTarget(p.to_string()));
    }
    let radicands = (2u64..).filter(|&r| is_square_free(r));
    let mut family = Family::default();
    for (n, (threshold, r)) in thresholds.into_iter().zip(radicands).enumerate() {
        let set = kw_set(&KwSeed::new(r, threshold.clone())?)?;
        family.push(format!("gap{n}"), set, threshold)?;
    }
    Ok(family)
}

/// `∏ d(A_n)` over the family's declared densities.
pub fn declared_product(family: &Family) -> Density {
    family.members().iter().map(|m| m.density.clone()).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_multiply_above_target() {
        let p = Density::new(9, 10);
        let f = gap_family(&p, 4).unwrap();
        assert_eq!(f.len(), 4);
        let prod = declared_product(&f);
        assert!(prod >= p);
        // partial products decrease towards the full product
        let mut partial = Density::one();
        for m in f.members() {
            let next = &partial * &m.density;
            assert!(next < partial);
            partial = next;
        }
        assert_eq!(partial, prod);
        assert!((prod.to_f64() - 0.9f64.powf(15.0 / 16.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_targets_outside_the_upper_half() {
        assert!(gap_family(&Density::new(1, 2), 3).is_err());
        assert!(gap_family(&Density::new(1, 3), 3).is_err());
        assert!(gap_family(&Density::one(), 3).is_err());
        assert!(gap_family(&Density::new(3, 4), 0).is_err());
    }
}
