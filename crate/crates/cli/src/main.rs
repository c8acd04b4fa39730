use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dindep_cli::{emit, exit, run, Cli, OUT_DIR_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli.command) {
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Ok(report) => {
            let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
            match emit(&report, cli.command.opts(), dir.as_deref()) {
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                Ok(path) => {
                    if let Some(p) = path {
                        eprintln!("wrote {}", p.display());
                    }
                    let s = &report.summary;
                    if s.pass {
                        eprintln!("{}: pass ({} checks)", report.command, s.checks);
                        exit::PASS
                    } else {
                        eprintln!("{}: FAIL ({} of {} checks)", report.command, s.failures.len(), s.checks);
                        for f in &s.failures {
                            eprintln!("  {f}");
                        }
                        exit::VERIFICATION_FAILED
                    }
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
