//! Experiment runner for correlation studies of bounded multiplicative
//! functions. Each subcommand mirrors one experiment kind; the experiment
//! itself is described by a plain-text config file that is echoed verbatim
//! into every report.
//!
//! Exit codes: 0 success, 1 config/parse error, 2 tolerance gate failed in
//! --assert mode, 3 resource or I/O problem.

mod config;
mod runner;

use clap::Parser;
use logcorr_core::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "logcorr",
    version,
    about = "correlation experiments for bounded multiplicative functions",
    after_help = "Experiment kinds: corr-fixed, corr-deterministic, corr-family, \
identity-deterministic, product-identity, pattern-density, discrepancy, \
prime-dilation, pretentious, aperiodicity-scan, furstenberg-moment, \
correspondence-check, ergodic-oracle, sequence-check.\n\
Run `logcorr <kind> --config FILE`; see README.md for the config grammar."
)]
struct Cli {
    /// Experiment kind (subcommand); must match the config's `kind` key
    /// when that key is present.
    kind: String,

    /// Experiment description file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for CSV/JSON/plotdata reports.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Worker cap; never changes results, only wall time.
    #[arg(long)]
    threads: Option<usize>,

    /// Turn tolerance fields into pass/fail gates (exit 2 on failure).
    #[arg(long)]
    assert: bool,

    /// Directory for cached sieve tables keyed by (limit, format version).
    #[arg(long)]
    sieve_cache: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = runner::RunOptions {
        out_dir: cli.out.clone(),
        sieve_cache: cli.sieve_cache.clone(),
    };

    let run = || -> logcorr_core::Result<runner::RunOutcome> {
        let config = config::Config::load(&cli.config)?;
        runner::run_experiment(&cli.kind, &config, &opts)
    };

    let outcome = match cli.threads {
        Some(k) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot build thread pool: {e}");
                    return ExitCode::from(3);
                }
            };
            pool.install(run)
        }
        None => run(),
    };

    match outcome {
        Ok(out) => {
            for p in &out.report_paths {
                println!("wrote {}", p.display());
            }
            if cli.assert && !out.gate_failures.is_empty() {
                for g in &out.gate_failures {
                    eprintln!("assert: gate `{g}` failed");
                }
                return ExitCode::from(2);
            }
            if !out.gate_failures.is_empty() {
                for g in &out.gate_failures {
                    eprintln!("note: gate `{g}` failed (report-only mode)");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse(_) | Error::Domain(_) | Error::Overflow(_) => 1,
                Error::Resource(_) | Error::Io(_) | Error::Determinism(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}
