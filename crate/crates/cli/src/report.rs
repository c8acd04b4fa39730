//! Machine-readable run reports.
//!
//! Counts are exact integers; densities appear as fraction strings next to a
//! decimal rendering. Every report embeds the spec text and the effective
//! schedule, tolerance and seed, so it can be fed back in as a spec.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use dindep::constructors::ExtensionParams;
use dindep::density::{DensityEstimate, Status, WindowCount, WindowSchedule};
use dindep::reaping::{BisectReport, WitnessReport};
use dindep::{Density, Descriptor, SignPattern};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub command: String,
    /// SHA-256 of `spec`, hex encoded.
    pub spec_digest: String,
    pub spec: String,
    pub invocation: Invocation,
    pub rng: RngRecord,
    pub sets: Vec<SetRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bisect: Vec<BisectRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub packing: Vec<PackingRecord>,
    pub summary: Summary,
}

/// Settings that, with the embedded spec, determine every count in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    pub schedule: WindowSchedule,
    pub tolerance: f64,
    /// Seed override applied to randomized sets without their own seed.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngRecord {
    pub algorithm: String,
    /// Effective seed per randomized set.
    pub seeds: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub n: u64,
    pub count: u64,
    pub density: String,
    pub decimal: f64,
}

impl From<&WindowCount> for WindowRecord {
    fn from(w: &WindowCount) -> Self {
        WindowRecord { n: w.n, count: w.count, density: w.fraction(), decimal: w.to_f64() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub windows: Vec<WindowRecord>,
    /// Density at the largest window.
    pub value: String,
    pub decimal: f64,
    pub oscillation: f64,
    pub status: Status,
}

impl From<&DensityEstimate> for EstimateRecord {
    fn from(e: &DensityEstimate) -> Self {
        EstimateRecord {
            windows: e.windows.iter().map(WindowRecord::from).collect(),
            value: e.last().fraction(),
            decimal: e.last().to_f64(),
            oscillation: e.oscillation,
            status: e.status,
        }
    }
}

/// Count of indices below `n` that fell inside the precision guard band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardRecord {
    pub n: u64,
    pub hits: u64,
    /// `2·n·2^-40 + 1`.
    pub bound: f64,
    pub within_bound: bool,
}

impl GuardRecord {
    pub fn new(n: u64, hits: u64) -> Self {
        let bound = 2.0 * n as f64 * (-40f64).exp2() + 1.0;
        GuardRecord { n, hits, bound, within_bound: hits as f64 <= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub name: String,
    pub kind: String,
    pub descriptor: Descriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<Density>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_decimal: Option<f64>,
    pub estimate: EstimateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_band: Option<GuardRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub pattern: SignPattern,
    pub expected: Density,
    pub expected_decimal: f64,
    pub estimate: EstimateRecord,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceRecord {
    pub domain: Vec<String>,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub atoms: Vec<AtomRecord>,
    pub pass: bool,
}

impl From<&dindep::independence::IndependenceReport> for IndependenceRecord {
    fn from(r: &dindep::independence::IndependenceReport) -> Self {
        IndependenceRecord {
            domain: r.domain.clone(),
            tolerance: r.tolerance,
            max_deviation: r.max_deviation(),
            atoms: r
                .atoms
                .iter()
                .map(|a| AtomRecord {
                    pattern: a.pattern,
                    expected: a.expected.clone(),
                    expected_decimal: a.expected_decimal,
                    estimate: EstimateRecord::from(&a.estimate),
                    deviation: a.deviation,
                    pass: a.pass,
                })
                .collect(),
            pass: r.pass,
        }
    }
}

/// Atom occupancy inside one block `I_m`; `counts[τ]` uses bit `j` for member `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: u32,
    pub start: u64,
    pub len: u64,
    pub counts: Vec<u64>,
    /// Every atom holds exactly `len / 2^k` indices.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageValue {
    pub value: Density,
    pub decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub delta: Density,
    pub depth: usize,
    pub max_atom: Density,
    pub exhaustive: bool,
    pub cells: usize,
    /// `[lo, hi)` bounds of every cell no image value reached.
    pub unhit: Vec<[f64; 2]>,
    pub all_hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub domain: Vec<String>,
    /// Sorted, with multiplicity.
    pub values: Vec<ImageValue>,
    pub contains_bounds: bool,
    pub symmetric: bool,
    /// Widest open interval between consecutive distinct values.
    pub widest_gap: [ImageValue; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeRecord {
    pub n: u64,
    pub reference: u64,
    pub both: u64,
    pub relative: String,
    pub decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectRecord {
    pub set: String,
    pub reference: String,
    pub windows: Vec<RelativeRecord>,
    pub relative: f64,
    pub oscillation: f64,
    pub pass: bool,
}

impl BisectRecord {
    pub fn new(set: &str, r: &BisectReport) -> Self {
        BisectRecord {
            set: set.to_string(),
            reference: r.reference.clone(),
            windows: r
                .windows
                .iter()
                .map(|w| RelativeRecord {
                    n: w.n,
                    reference: w.reference,
                    both: w.both,
                    relative: format!("{}/{}", w.both, w.reference),
                    decimal: w.to_f64(),
                })
                .collect(),
            relative: r.relative,
            oscillation: r.oscillation,
            pass: r.pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionRecord {
    pub mode: String,
    pub name: String,
    /// `[[set]]` table that reproduces the new set when appended to the spec.
    pub descriptor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ExtensionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedAtom {
    pub pattern: SignPattern,
    pub density: Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingRecord {
    pub level: usize,
    pub side: bool,
    pub target: Density,
    pub chosen: Vec<SignPattern>,
    pub total: Density,
    pub total_decimal: f64,
    pub excluded: Vec<ExcludedAtom>,
    pub certificate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
        self.pass = self.failures.is_empty();
    }
}

impl RunReport {
    /// Tab-separated rows for external plotting, one per window per series.
    pub fn to_table(&self) -> String {
        let mut out = String::from("series\tname\tn\tcount\tdensity\tdecimal\n");
        let mut row = |series: &str, name: &str, w: &WindowRecord| {
            let _ = writeln!(out, "{series}\t{name}\t{}\t{}\t{}\t{}", w.n, w.count, w.density, w.decimal);
        };
        for s in &self.sets {
            for w in &s.estimate.windows {
                row("set", &s.name, w);
            }
        }
        if let Some(ind) = &self.independence {
            for a in &ind.atoms {
                for w in &a.estimate.windows {
                    row("atom", &a.pattern.to_string(), w);
                }
            }
        }
        for b in &self.bisect {
            for w in &b.windows {
                let name = format!("{}|{}", b.set, b.reference);
                let rec = WindowRecord { n: w.n, count: w.both, density: w.relative.clone(), decimal: w.decimal };
                row("relative", &name, &rec);
            }
        }
        if let Some(img) = &self.image {
            for v in &img.values {
                let _ = writeln!(out, "image\t{}\t\t\t{}\t{}", img.domain.join(","), v.value, v.decimal);
            }
        }
        for p in &self.packing {
            let _ = writeln!(out, "packing\tlevel{}\t\t{}\t{}\t{}", p.level, p.chosen.len(), p.total, p.total_decimal);
        }
        let _ = writeln!(out, "summary\t{}\t\t{}\t{}\t", self.command, self.summary.checks, if self.summary.pass { "pass" } else { "fail" });
        out
    }
}
