//! The `philab` command line.
//!
//! ```text
//! philab run <config-path> [--set k=v]... [--seed N] [--out <csv-path>] [--expect-fail]
//! philab list-experiments
//! ```
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 invalid
//! configuration, 3 numeric failure, 4 I/O failure writing the report. With
//! `--expect-fail` codes 0 and 1 swap meaning. `PHILAB_WORKERS` sets the
//! worker thread count; results do not depend on it.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use config::{load_experiments, ConfigFile, ExperimentKind};
use report::{format_rows, ReportRow};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const WORKERS_ENV: &str = "PHILAB_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "philab", version, about = "Random-sample-size limit theorem checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every experiment section of a configuration file.
    Run {
        config: PathBuf,
        /// Override `key=value` in every section, or `section.key=value` in one.
        #[arg(long = "set", value_name = "K=V")]
        set: Vec<String>,
        /// Master seed for every section.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Succeed only if some check fails.
        #[arg(long)]
        expect_fail: bool,
    },
    /// List the experiment kinds.
    ListExperiments,
}

/// Exit code for a library error.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::UnsupportedSampler(_) => EXIT_CONFIG,
        Error::Numeric(_) | Error::HeavyTail { .. } => EXIT_NUMERIC,
        Error::Io(_) => EXIT_IO,
    }
}

fn workers_from_env() -> Result<Option<usize>, Error> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer (got `{v}`)"))),
        },
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match cli.command {
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<16}{}", kind.name(), kind.description());
            }
            EXIT_PASS
        }
        Command::Run { config, set, seed, out, expect_fail } => run_command(config, &set, seed, out, expect_fail),
    }
}

fn run_command(config: PathBuf, set: &[String], seed: Option<u64>, out: Option<PathBuf>, expect_fail: bool) -> i32 {
    let fail = |err: Error| {
        eprintln!("philab: {err}");
        exit_code_for(&err)
    };
    let text = match fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return fail(Error::Config(format!("cannot read {}: {e}", config.display()))),
    };
    let experiments = ConfigFile::parse(&text).and_then(|mut file| {
        for assignment in set {
            file.apply_override(assignment)?;
        }
        if let Some(seed) = seed {
            file.apply_override(&format!("seed={seed}"))?;
        }
        load_experiments(&file)
    });
    let experiments = match experiments {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    let workers = match workers_from_env() {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return fail(Error::Config(format!("cannot start worker pool: {e}"))),
    };

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut all_pass = true;
    for experiment in &experiments {
        match pool.install(|| run::run_experiment(experiment)) {
            Ok(outcome) => {
                all_pass &= outcome.report.pass;
                rows.extend(outcome.rows);
            }
            Err(e) => return fail(e),
        }
    }

    let csv = format_rows(&rows);
    let written = match &out {
        Some(path) => report::emit_report(&rows, path),
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(Error::from),
    };
    if let Err(e) = written {
        return fail(Error::Io(std::io::Error::other(e.to_string())));
    }
    if all_pass != expect_fail {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
