//! Family specification files.
//!
//! A spec is a TOML document:
//!
//! ```toml
//! version = 1
//!
//! [defaults]
//! schedule = { start = 10000, ratio = 2.0, windows = 10 }
//! tolerance = 0.005
//! seed = 1
//!
//! [[set]]
//! name = "A"
//! kind = "kw"
//! radicand = 2
//! threshold = "0.3"
//! ```
//!
//! Sets are built in file order and may refer to earlier sets (and to the
//! built-ins `omega` and `empty`) by name.

use serde::{Deserialize, Serialize};

use dindep::constructors::{
    block_set, coded_from_bits, gap::gap_thresholds, gap_family, kw_set, random_extension, KwSeed,
};
use dindep::density::{WindowSchedule, EQUIDISTRIBUTION_TOL};
use dindep::reaping::thin_extension;
use dindep::{Density, Family, OmegaSet, SetExpr};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub version: u32,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default, rename = "set")]
    pub sets: Vec<SetSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub start: u64,
    pub ratio: f64,
    pub windows: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec { start: 10_000, ratio: 2.0, windows: 10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { schedule: ScheduleSpec::default(), tolerance: default_tolerance(), seed: 0 }
    }
}

fn default_tolerance() -> f64 {
    EQUIDISTRIBUTION_TOL
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: SetKind,
    /// Declared density override (required for `expr` sets that join a family).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExprOp {
    Complement,
    Intersect,
    Union,
    SymDiff,
    Scale,
    Thin,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetKind {
    Kw {
        radicand: u64,
        threshold: Density,
    },
    Coded {
        sigma: String,
        depth: u32,
    },
    Block {
        source: String,
    },
    RandomExt {
        distinguished: String,
        target: Density,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Expands into members `<name>0 … <name><count-1>`.
    Gap {
        target: Density,
        count: usize,
    },
    Expr {
        op: ExprOp,
        args: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor: Option<u64>,
    },
    ThinExt {
        family: Vec<String>,
    },
}

impl SetSpec {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SetKind::Kw { .. } => "kw",
            SetKind::Coded { .. } => "coded",
            SetKind::Block { .. } => "block",
            SetKind::RandomExt { .. } => "random-ext",
            SetKind::Gap { .. } => "gap",
            SetKind::Expr { .. } => "expr",
            SetKind::ThinExt { .. } => "thin-ext",
        }
    }

    /// The set as a standalone `[[set]]` TOML table, for appending to a spec.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct One<'a> {
            set: [&'a SetSpec; 1],
        }
        toml::to_string(&One { set: [self] }).expect("set specs serialize")
    }
}

impl FamilySpec {
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let spec: FamilySpec =
            toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_string(), message: e.to_string() })?;
        if spec.version != FORMAT_VERSION {
            return Err(CliError::Parse {
                path: path.to_string(),
                message: format!("unsupported format version {} (expected {FORMAT_VERSION})", spec.version),
            });
        }
        Ok(spec)
    }

    pub fn schedule(&self) -> Result<WindowSchedule, CliError> {
        let s = &self.defaults.schedule;
        WindowSchedule::geometric(s.start, s.ratio, s.windows).map_err(|e| CliError::precondition("defaults.schedule", e))
    }
}

/// One built set with its declared density, if any.
#[derive(Clone, Debug)]
pub struct BuiltSet {
    pub name: String,
    pub kind: &'static str,
    pub set: OmegaSet,
    pub density: Option<Density>,
    pub seed: Option<u64>,
}

/// All sets of a spec, built in order.
#[derive(Clone, Debug)]
pub struct Built {
    pub sets: Vec<BuiltSet>,
}

const BUILTINS: [&str; 2] = ["omega", "empty"];

impl Built {
    pub fn get(&self, name: &str) -> Option<&BuiltSet> {
        self.sets.iter().find(|s| s.name == name)
    }

    /// Resolves a set or a built-in; `owner` names the referring set in errors.
    pub fn lookup(&self, owner: &str, name: &str) -> Result<OmegaSet, CliError> {
        match name {
            "omega" => Ok(OmegaSet::omega()),
            "empty" => Ok(OmegaSet::empty()),
            _ => self
                .get(name)
                .map(|s| s.set.clone())
                .ok_or_else(|| CliError::precondition(owner, dindep::Error::UnknownName(name.to_string()))),
        }
    }

    /// Family of the named sets (all sets with declared densities when `names` is empty).
    pub fn family(&self, names: &[String]) -> Result<Family, CliError> {
        let chosen: Vec<&BuiltSet> = if names.is_empty() {
            self.sets.iter().filter(|s| s.density.is_some()).collect()
        } else {
            names
                .iter()
                .map(|n| {
                    self.get(n).ok_or_else(|| CliError::precondition(n.clone(), dindep::Error::UnknownName(n.clone())))
                })
                .collect::<Result<_, _>>()?
        };
        let mut family = Family::default();
        for s in chosen {
            let density = s
                .density
                .clone()
                .ok_or_else(|| CliError::precondition(&s.name, dindep::Error::MissingDensity(s.name.clone())))?;
            family.push(s.name.clone(), s.set.clone(), density).map_err(|e| CliError::precondition(&s.name, e))?;
        }
        Ok(family)
    }

    fn push(&mut self, spec_name: &str, built: BuiltSet) -> Result<(), CliError> {
        if BUILTINS.contains(&built.name.as_str()) || self.get(&built.name).is_some() {
            return Err(CliError::precondition(spec_name, dindep::Error::DuplicateName(built.name)));
        }
        self.sets.push(built);
        Ok(())
    }
}

/// Builds every set in file order. `seed_override` replaces the default seed
/// for randomized sets without an explicit one.
pub fn build(spec: &FamilySpec, seed_override: Option<u64>) -> Result<Built, CliError> {
    if spec.sets.is_empty() {
        return Err(CliError::precondition("<spec>", dindep::Error::EmptyFamily));
    }
    let default_seed = seed_override.unwrap_or(spec.defaults.seed);
    let mut built = Built { sets: Vec::new() };
    for s in &spec.sets {
        let name = s.name.as_str();
        let pre = |e: dindep::Error| CliError::precondition(name, e);
        let mut seed = None;
        let (set, density) = match &s.kind {
            SetKind::Kw { radicand, threshold } => {
                let seed = KwSeed::new(*radicand, threshold.clone()).map_err(pre)?;
                (kw_set(&seed).map_err(pre)?, Some(threshold.clone()))
            }
            SetKind::Coded { sigma, depth } => (coded_from_bits(sigma, *depth).map_err(pre)?, None),
            SetKind::Block { source } => (block_set(&built.lookup(name, source)?), Some(Density::new(1, 2))),
            SetKind::RandomExt { distinguished, target, seed: own } => {
                let family = built.family(std::slice::from_ref(distinguished))?;
                let chosen = own.unwrap_or(default_seed);
                seed = Some(chosen);
                let (set, _) = random_extension(&family, distinguished, target.clone(), chosen).map_err(pre)?;
                (set, Some(target.clone()))
            }
            SetKind::Gap { target, count } => {
                let family = gap_family(target, *count).map_err(pre)?;
                let thresholds = gap_thresholds(target, *count).map_err(pre)?;
                for (j, (member, p)) in family.members().iter().zip(thresholds).enumerate() {
                    built.push(
                        name,
                        BuiltSet { name: format!("{name}{j}"), kind: "gap", set: member.set.clone(), density: Some(p), seed: None },
                    )?;
                }
                continue;
            }
            SetKind::Expr { op, args, factor } => (build_expr(&built, name, *op, args, *factor)?, None),
            SetKind::ThinExt { family } => {
                let family = built.family(family)?;
                (thin_extension(&family).map_err(pre)?, Some(Density::new(1, 2)))
            }
        };
        let density = s.density.clone().or(density);
        if let Some(d) = &density {
            d.clone().check_open_unit("declared density").map_err(pre)?;
        }
        built.push(name, BuiltSet { name: s.name.clone(), kind: s.kind_name(), set, density, seed })?;
    }
    Ok(built)
}

fn build_expr(built: &Built, name: &str, op: ExprOp, args: &[String], factor: Option<u64>) -> Result<OmegaSet, CliError> {
    let sets: Vec<OmegaSet> = args.iter().map(|a| built.lookup(name, a)).collect::<Result<_, _>>()?;
    let arity = |n: usize| {
        if sets.len() == n {
            Ok(())
        } else {
            Err(CliError::Usage(format!("set `{name}`: `{op:?}` takes {n} argument(s), got {}", sets.len())))
        }
    };
    let exprs = || sets.iter().map(SetExpr::from);
    Ok(match op {
        ExprOp::Complement => {
            arity(1)?;
            sets[0].complement()
        }
        ExprOp::Thin => {
            arity(1)?;
            sets[0].thin()
        }
        ExprOp::Scale => {
            arity(1)?;
            let m = factor.ok_or_else(|| CliError::Usage(format!("set `{name}`: scale needs `factor`")))?;
            sets[0].scale(m).map_err(|e| CliError::precondition(name, e))?
        }
        ExprOp::Intersect => SetExpr::intersect_all(exprs()).to_set(),
        ExprOp::Union => SetExpr::union_all(exprs()).to_set(),
        ExprOp::SymDiff => SetExpr::SymDiff(exprs().collect()).to_set(),
    })
}
