//! Command-line front end for `dindep`: reads family specs, runs
//! constructions and checks, and writes JSON reports or plot tables.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use dindep::Density;

pub use commands::{Common, Extension, Session};
pub use error::{exit, CliError};
pub use report::RunReport;
pub use spec::{FamilySpec, ScheduleSpec};

/// Environment variable naming the default directory for reports.
pub const OUT_DIR_ENV: &str = "DINDEP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dindep", version, about = "Construct density-independent families and check them on finite prefixes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build every set and estimate its density.
    Construct {
        #[command(flatten)]
        opts: Opts,
        /// Restrict to these sets.
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
    },
    /// Check the product rule on every atom of a subfamily.
    Verify {
        #[command(flatten)]
        opts: Opts,
        /// Subfamily (default: every set with a declared density).
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
        /// Count atoms exactly inside block I_m instead of over windows (repeatable).
        #[arg(long = "block")]
        blocks: Vec<u32>,
    },
    /// Enumerate the density image of the generated field.
    Image {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
        /// Grid step for the coverage scan, e.g. 0.01 or 1/100.
        #[arg(long)]
        grid: Option<Density>,
    },
    /// Check that a set splits every reference set in half.
    Reap {
        #[command(flatten)]
        opts: Opts,
        /// The splitting set.
        #[arg(long = "set")]
        set: String,
        /// Reference sets.
        #[arg(long, value_delimiter = ',', required = true)]
        refs: Vec<String>,
        /// Check every nonempty intersection of the references instead.
        #[arg(long)]
        intersections: bool,
    },
    /// Add a thin or random extension and print its spec entry.
    Extend {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Name of the new set.
        #[arg(long, default_value = "X")]
        name: String,
        /// Family to extend (thin mode).
        #[arg(long, value_delimiter = ',')]
        family: Vec<String>,
        /// Set the coins are biased by (random mode).
        #[arg(long)]
        distinguished: Option<String>,
        /// Target density of the new set (random mode).
        #[arg(long)]
        target: Option<Density>,
    },
    /// Greedily pack atoms below a density budget.
    Pack {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_delimiter = ',', required = true)]
        names: Vec<String>,
        /// Value of the first coordinate of every chosen pattern (0 or 1).
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        side: u8,
        /// Density budget x.
        #[arg(long)]
        target: Density,
        /// Pattern lengths, increasing (default: all names).
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Thin,
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Report,
    Table,
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Spec file (TOML) or an earlier JSON report to replay.
    pub spec: PathBuf,
    /// Largest window.
    #[arg(long)]
    pub prefix: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Window schedule as N0,r,J.
    #[arg(long)]
    pub schedule: Option<ScheduleSpec>,
    /// Seed for randomized sets without their own.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Counting threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (default: $DINDEP_OUT_DIR/<command>.<ext>, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl Opts {
    fn common(&self) -> Common {
        Common { prefix: self.prefix, tol: self.tol, schedule: self.schedule.clone(), seed: self.seed, workers: self.workers }
    }
}

impl std::str::FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [start, ratio, windows] = parts.as_slice() else {
            return Err(format!("expected N0,r,J, got `{s}`"));
        };
        Ok(ScheduleSpec {
            start: start.parse().map_err(|e| format!("N0: {e}"))?,
            ratio: ratio.parse().map_err(|e| format!("r: {e}"))?,
            windows: windows.parse().map_err(|e| format!("J: {e}"))?,
        })
    }
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Construct { opts, .. }
            | Command::Verify { opts, .. }
            | Command::Image { opts, .. }
            | Command::Reap { opts, .. }
            | Command::Extend { opts, .. }
            | Command::Pack { opts, .. } => opts,
        }
    }
}

/// Runs one subcommand to a report.
pub fn run(command: &Command) -> Result<RunReport, CliError> {
    let opts = command.opts();
    let session = Session::load(&opts.spec, &opts.common())?;
    match command {
        Command::Construct { names, .. } => commands::construct(&session, names),
        Command::Verify { names, blocks, .. } => commands::verify(&session, names, blocks),
        Command::Image { names, grid, .. } => commands::image(&session, names, grid.as_ref()),
        Command::Reap { set, refs, intersections, .. } => commands::reap(&session, set, refs, *intersections),
        Command::Extend { mode, name, family, distinguished, target, .. } => {
            let extension = match mode {
                Mode::Thin => Extension::Thin { family: family.clone() },
                Mode::Random => Extension::Random {
                    distinguished: distinguished
                        .clone()
                        .ok_or_else(|| CliError::Usage("random mode needs --distinguished".into()))?,
                    target: target.clone().ok_or_else(|| CliError::Usage("random mode needs --target".into()))?,
                    seed: opts.seed,
                },
            };
            commands::extend(&session, &extension, name)
        }
        Command::Pack { names, side, target, levels, .. } => commands::pack(&session, names, *side == 1, target, levels),
    }
}

/// Renders the report and writes it to `--out`, the default directory, or
/// stdout. Returns the path written, if any.
pub fn emit(report: &RunReport, opts: &Opts, default_dir: Option<&Path>) -> Result<Option<PathBuf>, CliError> {
    let (text, ext) = match opts.format {
        Format::Report => (serde_json::to_string_pretty(report).expect("reports serialize") + "\n", "json"),
        Format::Table => (report.to_table(), "tsv"),
    };
    let path = match (&opts.out, default_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{}.{ext}", report.command))),
        (None, None) => None,
    };
    match &path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(path)
}
