use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exact::Density;
use crate::omega::OmegaSet;

#[derive(Clone, Debug)]
pub struct Member {
    pub name: String,
    pub set: OmegaSet,
    pub density: Density,
}

/// An ordered, named list of sets with declared target densities in `(0, 1)`.
#[derive(Clone, Debug, Default)]
pub struct Family {
    members: Vec<Member>,
}

impl Family {
    pub fn new(members: Vec<Member>) -> Result<Self> {
        let mut family = Family::default();
        for m in members {
            family.push(m.name, m.set, m.density)?;
        }
        Ok(family)
    }

    pub fn push(&mut self, name: impl Into<String>, set: OmegaSet, density: Density) -> Result<()> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(Error::DuplicateName(name));
        }
        let density = density.check_open_unit("declared density")?;
        self.members.push(Member { name, set, density });
        Ok(())
    }

    /// A new family with `set` appended.
    pub fn with(&self, name: impl Into<String>, set: OmegaSet, density: Density) -> Result<Family> {
        let mut f = self.clone();
        f.push(name, set, density)?;
        Ok(f)
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|m| m.name.clone()).collect()
    }

    /// Members for `names`, in the given order. Unknown and repeated names are rejected.
    pub fn select(&self, names: &[impl AsRef<str>]) -> Result<Vec<&Member>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                if !seen.insert(n) {
                    return Err(Error::DuplicateName(n.to_string()));
                }
                self.get(n).ok_or_else(|| Error::UnknownName(n.to_string()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_densities_proper() {
        let mut f = Family::default();
        f.push("A", OmegaSet::multiples(2).unwrap(), Density::new(1, 2)).unwrap();
        assert_eq!(
            f.push("A", OmegaSet::omega(), Density::new(1, 2)),
            Err(Error::DuplicateName("A".into()))
        );
        assert!(f.push("B", OmegaSet::omega(), Density::one()).is_err());
        assert!(f.push("B", OmegaSet::empty(), Density::zero()).is_err());
        assert!(f.select(&["A", "A"]).is_err());
        assert!(f.select(&["Z"]).is_err());
        assert_eq!(f.select(&["A"]).unwrap().len(), 1);
    }
}
