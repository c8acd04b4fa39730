//! Subcommand runners. Each returns a complete [`RunReport`]; the summary
//! decides the exit status.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use dindep::constructors::block::{block_atom_counts, MAX_BLOCK};
use dindep::constructors::{greedy_pack_levels, random_extension, BlockLayout, RNG_ALGORITHM};
use dindep::density::{estimate_density, WindowSchedule};
use dindep::independence::{field_image, image_density_scan, verify_independence, MAX_PATTERN_FAMILY};
use dindep::reaping::{bisect_check, intersections, nonindependence_witness, thin_extension};
use dindep::sweep::default_workers;
use dindep::{Density, Family, SetExpr};

use crate::error::CliError;
use crate::report::*;
use crate::spec::{build, Built, BuiltSet, FamilySpec, ScheduleSpec, SetKind, SetSpec};

pub const TOOL: &str = concat!("dindep ", env!("CARGO_PKG_VERSION"));

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Common {
    /// Largest window; the other windows keep the schedule's ratio and count.
    pub prefix: Option<u64>,
    pub tol: Option<f64>,
    pub schedule: Option<ScheduleSpec>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// A parsed and built spec with the effective schedule, tolerance and seed.
pub struct Session {
    pub spec_text: String,
    pub spec: FamilySpec,
    pub built: Built,
    pub schedule: WindowSchedule,
    pub tol: f64,
    pub seed: Option<u64>,
}

impl Session {
    /// Reads a TOML spec, or a JSON run report whose embedded spec and
    /// invocation are reused (flags still take precedence).
    pub fn load(path: &Path, common: &Common) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, &path.display().to_string(), common)
    }

    pub fn from_text(text: &str, origin: &str, common: &Common) -> Result<Self, CliError> {
        let (spec_text, replay) = if text.trim_start().starts_with('{') {
            let report: RunReport = serde_json::from_str(text)
                .map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })?;
            (report.spec, Some(report.invocation))
        } else {
            (text.to_string(), None)
        };
        let spec = FamilySpec::parse(&spec_text, origin)?;

        let mut schedule = match (&common.schedule, &replay) {
            (Some(s), _) => WindowSchedule::geometric(s.start, s.ratio, s.windows)
                .map_err(|e| CliError::precondition("--schedule", e))?,
            (None, Some(inv)) => inv.schedule.clone(),
            (None, None) => spec.schedule()?,
        };
        if let Some(n) = common.prefix {
            schedule = WindowSchedule::ending_at(n, schedule.ratio, schedule.windows().len())
                .map_err(|e| CliError::precondition("--prefix", e))?;
        }
        let schedule = schedule.with_workers(common.workers.unwrap_or_else(default_workers));
        let tol = common.tol.or(replay.as_ref().map(|i| i.tolerance)).unwrap_or(spec.defaults.tolerance);
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be a finite non-negative number, got {tol}")));
        }
        let seed = common.seed.or(replay.and_then(|i| i.seed));
        let built = build(&spec, seed)?;
        Ok(Session { spec_text, spec, built, schedule, tol, seed })
    }

    fn report(&self, command: &str) -> RunReport {
        let seeds: BTreeMap<String, u64> =
            self.built.sets.iter().filter_map(|s| s.seed.map(|seed| (s.name.clone(), seed))).collect();
        RunReport {
            tool: TOOL.to_string(),
            command: command.to_string(),
            spec_digest: hex(&Sha256::digest(self.spec_text.as_bytes())),
            spec: self.spec_text.clone(),
            invocation: Invocation { schedule: self.schedule.clone(), tolerance: self.tol, seed: self.seed },
            rng: RngRecord { algorithm: RNG_ALGORITHM.to_string(), seeds },
            sets: Vec::new(),
            independence: None,
            blocks: Vec::new(),
            image: None,
            bisect: Vec::new(),
            extension: None,
            packing: Vec::new(),
            summary: Summary { pass: true, ..Summary::default() },
        }
    }

    fn set(&self, name: &str) -> Result<&BuiltSet, CliError> {
        self.built
            .get(name)
            .ok_or_else(|| CliError::precondition(name, dindep::Error::UnknownName(name.to_string())))
    }

    /// Estimates one set and checks it against its declared density and guard bound.
    fn record_set(&self, s: &BuiltSet, summary: &mut Summary) -> SetRecord {
        let estimate = estimate_density(&s.set, &self.schedule, self.tol);
        let record = EstimateRecord::from(&estimate);
        let deviation = s.density.as_ref().map(|d| (d.to_f64() - record.decimal).abs());
        if let Some(dev) = deviation {
            summary.check(estimate.is_converged() && dev <= self.tol, || {
                format!("set {}: deviation {dev:.3e}, oscillation {:.3e}, tolerance {}", s.name, estimate.oscillation, self.tol)
            });
        }
        let n = self.schedule.largest();
        let guard_band = s.set.guard_band_hits(n).map(|hits| GuardRecord::new(n, hits));
        if let Some(g) = &guard_band {
            summary.check(g.within_bound, || format!("set {}: {} guard-band hits exceed {:.1}", s.name, g.hits, g.bound));
        }
        SetRecord {
            name: s.name.clone(),
            kind: s.kind.to_string(),
            descriptor: s.set.descriptor().clone(),
            declared_decimal: s.density.as_ref().map(Density::to_f64),
            declared: s.density.clone(),
            estimate: record,
            deviation,
            guard_band,
        }
    }

    fn record_family(&self, family: &Family, report: &mut RunReport) -> Result<(), CliError> {
        for m in family.members() {
            let s = self.set(&m.name)?;
            let rec = self.record_set(s, &mut report.summary);
            report.sets.push(rec);
        }
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Estimates the named sets (all sets when `names` is empty).
pub fn construct(session: &Session, names: &[String]) -> Result<RunReport, CliError> {
    let mut report = session.report("construct");
    let chosen: Vec<&BuiltSet> = if names.is_empty() {
        session.built.sets.iter().collect()
    } else {
        names.iter().map(|n| session.set(n)).collect::<Result<_, _>>()?
    };
    for s in chosen {
        let rec = session.record_set(s, &mut report.summary);
        report.sets.push(rec);
    }
    Ok(report)
}

/// Sweeps every atom of the subfamily over the window schedule. With
/// `blocks`, counts atoms exactly inside each block `I_m` instead.
pub fn verify(session: &Session, names: &[String], blocks: &[u32]) -> Result<RunReport, CliError> {
    let mut report = session.report("verify");
    let family = session.built.family(names)?;
    if !blocks.is_empty() {
        verify_blocks(&family, blocks, session.schedule.workers, &mut report)?;
        return Ok(report);
    }
    let domain = family.names();
    let ind = verify_independence(&family, &domain, &session.schedule, session.tol)
        .map_err(|e| CliError::precondition("verify", e))?;
    session.record_family(&family, &mut report)?;
    for a in ind.failures() {
        report.summary.failures.push(format!(
            "atom {}: expected {} ({:.6}), estimate {:.6}, deviation {:.3e}, oscillation {:.3e}",
            a.pattern,
            a.expected,
            a.expected_decimal,
            a.estimate.value_f64(),
            a.deviation,
            a.estimate.oscillation
        ));
    }
    report.summary.checks += ind.atoms.len();
    report.summary.pass = report.summary.failures.is_empty();
    report.independence = Some(IndependenceRecord::from(&ind));

    Ok(report)
}

fn verify_blocks(family: &Family, blocks: &[u32], workers: usize, report: &mut RunReport) -> Result<(), CliError> {
    let sets: Vec<_> = family.members().iter().map(|m| m.set.clone()).collect();
    let k = sets.len();
    if k > MAX_PATTERN_FAMILY {
        return Err(CliError::precondition("verify", dindep::Error::TooLarge { size: k, limit: MAX_PATTERN_FAMILY }));
    }
    for &m in blocks {
        if m > MAX_BLOCK {
            return Err(CliError::Usage(format!("block {m} exceeds the largest supported block {MAX_BLOCK}")));
        }
        let counts = block_atom_counts(&sets, m, workers);
        let len = BlockLayout::len(m);
        let exact = len.is_multiple_of(1u64 << k) && counts.iter().all(|&c| c == len >> k);
        report.summary.check(exact, || format!("block {m}: atom counts {counts:?} are not all {len}/2^{k}"));
        report.blocks.push(BlockRecord { block: m, start: BlockLayout::start(m), len, counts, exact });
    }
    Ok(())
}

fn image_value(d: &Density) -> ImageValue {
    ImageValue { value: d.clone(), decimal: d.to_f64() }
}

/// Field image of the subfamily, plus a grid coverage scan when `grid` is given.
pub fn image(session: &Session, names: &[String], grid: Option<&Density>) -> Result<RunReport, CliError> {
    let mut report = session.report("image");
    let family = session.built.family(names)?;
    let domain = family.names();
    let values = field_image(&family, &domain).map_err(|e| CliError::precondition("image", e))?;

    let contains_bounds = values.first() == Some(&Density::zero()) && values.last() == Some(&Density::one());
    let mirrored: Vec<Density> = values.iter().rev().map(Density::complement).collect();
    let symmetric = mirrored == values;
    report.summary.check(contains_bounds, || "image misses 0 or 1".to_string());
    report.summary.check(symmetric, || "image is not closed under v -> 1 - v".to_string());

    let mut distinct = values.clone();
    distinct.dedup();
    let widest = distinct
        .windows(2)
        .max_by(|a, b| (&a[1] - &a[0]).cmp(&(&b[1] - &b[0])))
        .map(|w| [image_value(&w[0]), image_value(&w[1])])
        .unwrap_or_else(|| [image_value(&Density::zero()), image_value(&Density::one())]);

    let scan = match grid {
        None => None,
        Some(delta) => {
            let delta = delta.clone().check_open_unit("grid").map_err(|e| CliError::precondition("--grid", e))?;
            let scan = image_density_scan(&family, &delta).map_err(|e| CliError::precondition("image", e))?;
            Some(ScanRecord {
                cells: scan.hit.len(),
                unhit: scan.unhit().into_iter().map(|j| scan.cell_bounds(j).into()).collect(),
                all_hit: scan.all_hit(),
                delta: scan.delta,
                depth: scan.depth,
                max_atom: scan.max_atom,
                exhaustive: scan.exhaustive,
            })
        }
    };
    report.image = Some(ImageRecord {
        domain,
        values: values.iter().map(image_value).collect(),
        contains_bounds,
        symmetric,
        widest_gap: widest,
        scan,
    });
    Ok(report)
}

/// Checks that `s` splits each reference set in half; `with_intersections`
/// checks every nonempty intersection of the references instead.
pub fn reap(session: &Session, s: &str, references: &[String], with_intersections: bool) -> Result<RunReport, CliError> {
    let mut report = session.report("reap");
    let target = session.set(s)?;
    let refs: Vec<(String, SetExpr)> = if with_intersections {
        let family = session.built.family(references)?;
        intersections(&family, &family.names()).map_err(|e| CliError::precondition("reap", e))?
    } else {
        references
            .iter()
            .map(|r| Ok((r.clone(), SetExpr::from(session.built.lookup(r, r)?))))
            .collect::<Result<_, CliError>>()?
    };
    if refs.is_empty() {
        return Err(CliError::Usage("reap needs at least one reference set".to_string()));
    }
    let rec = session.record_set(target, &mut report.summary);
    report.sets.push(rec);
    let results = bisect_check(&target.set, &refs, &session.schedule, session.tol).map_err(|e| match &e {
        dindep::Error::EmptyReference { name, .. } => CliError::precondition(name.clone(), e),
        _ => CliError::precondition("reap", e),
    })?;
    for r in &results {
        report.summary.check(r.pass, || {
            format!("{s} relative to {}: {:.6} (oscillation {:.3e})", r.reference, r.relative, r.oscillation)
        });
        report.bisect.push(BisectRecord::new(s, r));
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub enum Extension {
    /// Thinned-atom extension of the named family.
    Thin { family: Vec<String> },
    /// Biased-coin extension correlated with `distinguished`.
    Random { distinguished: String, target: Density, seed: Option<u64> },
}

/// Builds a new set, reports it, and emits its `[[set]]` table.
///
/// A thin extension is verified together with its family. A random extension
/// is checked against its target density and must show the expected
/// correlation with the distinguished set at margin `ε/2`.
pub fn extend(session: &Session, extension: &Extension, name: &str) -> Result<RunReport, CliError> {
    let mut report = session.report("extend");
    if session.built.get(name).is_some() || name == "omega" || name == "empty" {
        return Err(CliError::precondition(name, dindep::Error::DuplicateName(name.to_string())));
    }
    let pre = |e| CliError::precondition(name, e);
    match extension {
        Extension::Thin { family } => {
            let base = session.built.family(family)?;
            let set = thin_extension(&base).map_err(pre)?;
            let spec = SetSpec { name: name.to_string(), kind: SetKind::ThinExt { family: base.names() }, density: None };
            let enlarged = base.with(name, set.clone(), Density::new(1, 2)).map_err(pre)?;
            let ind = verify_independence(&enlarged, &enlarged.names(), &session.schedule, session.tol).map_err(pre)?;
            let built = BuiltSet { name: name.to_string(), kind: "thin-ext", set, density: Some(Density::new(1, 2)), seed: None };
            report.sets.push(session.record_set(&built, &mut report.summary));
            for a in ind.failures() {
                report.summary.failures.push(format!("atom {}: deviation {:.3e}", a.pattern, a.deviation));
            }
            report.summary.checks += ind.atoms.len();
            report.summary.pass = report.summary.failures.is_empty();
            report.independence = Some(IndependenceRecord::from(&ind));
            report.extension =
                Some(ExtensionRecord { mode: "thin".into(), name: name.into(), descriptor: spec.to_toml(), params: None, witness: None });
        }
        Extension::Random { distinguished, target, seed } => {
            let family = session.built.family(std::slice::from_ref(distinguished))?;
            let seed = seed.or(session.seed).unwrap_or(session.spec.defaults.seed);
            let (set, params) = random_extension(&family, distinguished, target.clone(), seed).map_err(pre)?;
            let a = &family.members()[0];
            let margin = params.epsilon.half().to_f64();
            let witness = nonindependence_witness(&set, &a.set, target, &a.density, &session.schedule, margin);
            let built = BuiltSet { name: name.to_string(), kind: "random-ext", set, density: Some(target.clone()), seed: Some(seed) };
            report.sets.push(session.record_set(&built, &mut report.summary));
            report.summary.check(witness.flag, || {
                format!("{name} and {distinguished}: gap {:.3e} below margin {margin:.3e}", witness.gap)
            });
            report.rng.seeds.insert(name.to_string(), seed);
            let spec = SetSpec {
                name: name.to_string(),
                kind: SetKind::RandomExt { distinguished: distinguished.clone(), target: target.clone(), seed: Some(seed) },
                density: None,
            };
            report.extension = Some(ExtensionRecord {
                mode: "random".into(),
                name: name.into(),
                descriptor: spec.to_toml(),
                params: Some(params),
                witness: Some(witness),
            });
        }
    }
    Ok(report)
}

/// Greedy atom packing over the named sets' declared densities, one packing
/// per level (the full length when `levels` is empty).
pub fn pack(session: &Session, names: &[String], side: bool, target: &Density, levels: &[usize]) -> Result<RunReport, CliError> {
    let mut report = session.report("pack");
    let family = session.built.family(names)?;
    let densities: Vec<Density> = family.members().iter().map(|m| m.density.clone()).collect();
    let levels = if levels.is_empty() { vec![densities.len()] } else { levels.to_vec() };
    let packings = greedy_pack_levels(&densities, &levels, side, target).map_err(|e| CliError::precondition("pack", e))?;
    for (level, p) in levels.iter().zip(packings) {
        let certificate = p.certificate_holds();
        report.summary.check(certificate, || format!("level {level}: maximality certificate fails"));
        report.packing.push(PackingRecord {
            level: *level,
            side,
            target: p.target.clone(),
            chosen: p.chosen,
            total_decimal: p.total.to_f64(),
            total: p.total,
            excluded: p.excluded.into_iter().map(|(pattern, density)| ExcludedAtom { pattern, density }).collect(),
            certificate,
        });
    }
    Ok(report)
}
