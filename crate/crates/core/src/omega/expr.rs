use super::{Descriptor, OmegaSet, Oracle};
use crate::error::{Error, Result};

/// A finite boolean combination of [`OmegaSet`]s, evaluated pointwise.
#[derive(Clone, Debug)]
pub enum SetExpr {
    Base(OmegaSet),
    Complement(Box<SetExpr>),
    Intersect(Vec<SetExpr>),
    Union(Vec<SetExpr>),
    SymDiff(Vec<SetExpr>),
    Scale(Box<SetExpr>, u64),
}

impl From<OmegaSet> for SetExpr {
    fn from(s: OmegaSet) -> Self {
        SetExpr::Base(s)
    }
}

impl From<&OmegaSet> for SetExpr {
    fn from(s: &OmegaSet) -> Self {
        SetExpr::Base(s.clone())
    }
}

impl SetExpr {
    pub fn intersect(a: impl Into<SetExpr>, b: impl Into<SetExpr>) -> SetExpr {
        SetExpr::Intersect(vec![a.into(), b.into()])
    }

    pub fn union(a: impl Into<SetExpr>, b: impl Into<SetExpr>) -> SetExpr {
        SetExpr::Union(vec![a.into(), b.into()])
    }

    pub fn sym_diff(a: impl Into<SetExpr>, b: impl Into<SetExpr>) -> SetExpr {
        SetExpr::SymDiff(vec![a.into(), b.into()])
    }

    pub fn complement(a: impl Into<SetExpr>) -> SetExpr {
        SetExpr::Complement(Box::new(a.into()))
    }

    pub fn scale(a: impl Into<SetExpr>, m: u64) -> Result<SetExpr> {
        if m == 0 {
            return Err(Error::ZeroScale);
        }
        Ok(SetExpr::Scale(Box::new(a.into()), m))
    }

    /// An empty intersection is ω.
    pub fn intersect_all<I: IntoIterator<Item = SetExpr>>(items: I) -> SetExpr {
        SetExpr::Intersect(items.into_iter().collect())
    }

    /// An empty union is ∅.
    pub fn union_all<I: IntoIterator<Item = SetExpr>>(items: I) -> SetExpr {
        SetExpr::Union(items.into_iter().collect())
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            SetExpr::Base(s) => s.contains(n),
            SetExpr::Complement(e) => !e.contains(n),
            SetExpr::Intersect(es) => es.iter().all(|e| e.contains(n)),
            SetExpr::Union(es) => es.iter().any(|e| e.contains(n)),
            SetExpr::SymDiff(es) => es.iter().filter(|e| e.contains(n)).count() % 2 == 1,
            SetExpr::Scale(e, m) => n.is_multiple_of(*m) && e.contains(n / m),
        }
    }

    fn count_hint(&self, n: u64) -> Option<u64> {
        match self {
            SetExpr::Base(s) => s.count_hint(n),
            SetExpr::Complement(e) => e.count_hint(n).map(|c| n - c),
            SetExpr::Scale(e, m) => Some(e.prefix_count(n.div_ceil(*m))),
            SetExpr::Intersect(es) if es.is_empty() => Some(n),
            SetExpr::Intersect(es) | SetExpr::Union(es) if es.len() == 1 => es[0].count_hint(n),
            SetExpr::Union(es) | SetExpr::SymDiff(es) if es.is_empty() => Some(0),
            _ => None,
        }
    }

    /// Exact `|E ∩ [0, n)|`.
    pub fn prefix_count(&self, n: u64) -> u64 {
        self.count_hint(n)
            .unwrap_or_else(|| (0..n).filter(|&k| self.contains(k)).count() as u64)
    }

    pub fn descriptor(&self) -> Descriptor {
        let all = |es: &[SetExpr]| es.iter().map(SetExpr::descriptor).collect();
        match self {
            SetExpr::Base(s) => s.descriptor().clone(),
            SetExpr::Complement(e) => Descriptor::Complement { of: Box::new(e.descriptor()) },
            SetExpr::Intersect(es) => Descriptor::Intersect { of: all(es) },
            SetExpr::Union(es) => Descriptor::Union { of: all(es) },
            SetExpr::SymDiff(es) => Descriptor::SymDiff { of: all(es) },
            SetExpr::Scale(e, m) => Descriptor::Scale { of: Box::new(e.descriptor()), factor: *m },
        }
    }

    /// Wraps the expression as an [`OmegaSet`] (so it can be thinned or put in a family).
    pub fn to_set(&self) -> OmegaSet {
        match self {
            SetExpr::Base(s) => s.clone(),
            _ => OmegaSet::new(ExprOracle(self.clone()), self.descriptor()),
        }
    }
}

struct ExprOracle(SetExpr);

impl Oracle for ExprOracle {
    fn contains(&self, n: u64) -> bool {
        self.0.contains(n)
    }
    fn count_below(&self, n: u64) -> Option<u64> {
        self.0.count_hint(n)
    }
}
