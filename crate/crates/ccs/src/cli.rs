//! Command-line front end.
//!
//! Exit codes: 0 success (including a saturated optimisation), 2 usage or
//! config error, 3 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{self, keys, ConfigError, RocSource};
use crate::drivers::thread_pool;
use crate::formats::{self, CsvRecord, FormatError, SimRow};
use crate::jobs::{self, JobError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ccs", version, about = "Coded compressed sensing: bounds, ROC estimation, simulation and optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct JobArgs {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV, written atomically.
    #[arg(long)]
    out: PathBuf,
    /// Master seed override; takes precedence over CCS_SEED and the config.
    #[arg(long, env = "CCS_SEED")]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo jobs; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity estimate of the A-channel with symbol noise.
    #[command(after_help = keys::CAPACITY)]
    Capacity(JobArgs),
    /// Random coding bound (P_e, P_f) at explicit operating points.
    #[command(after_help = keys::RCB)]
    Rcb(JobArgs),
    /// Per-level expected path counts of the t-tree decoder.
    #[command(name = "ttree-bound", after_help = keys::TTREE_BOUND)]
    TtreeBound(JobArgs),
    /// Greedy t-tree bit allocation under a path budget.
    #[command(after_help = keys::ALLOC)]
    Alloc(JobArgs),
    /// Monte Carlo ROC of the OMP inner decoder.
    #[command(after_help = keys::ROC)]
    Roc(JobArgs),
    /// Frame-level Monte Carlo of the concatenated scheme.
    #[command(after_help = keys::SIMULATE)]
    Simulate {
        #[command(flatten)]
        job: JobArgs,
        /// Keep rows already present in --out for matching grid cells.
        #[arg(long)]
        resume: bool,
    },
    /// Minimum E_b/N_0 meeting the (P_e, P_f) targets, per t.
    #[command(after_help = keys::OPTIMIZE)]
    Optimize(JobArgs),
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<JobError> for Failure {
    fn from(e: JobError) -> Self {
        match e {
            JobError::Config(e) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parse `argv` (including the program name), run the job and return the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn with_pool<T>(workers: usize, f: impl FnOnce() -> Result<T, Failure> + Send) -> Result<T, Failure>
where
    T: Send,
{
    let pool = thread_pool(workers).map_err(|e| Failure::Runtime(e.to_string()))?;
    pool.install(f)
}

fn write_rows<T: CsvRecord>(out: &Path, rows: &[T]) -> Result<(), Failure> {
    Ok(formats::write(out, rows)?)
}

fn wrote(cmd: &str, n: usize, out: &Path) -> String {
    format!("{cmd}: {n} row(s) written to {}", out.display())
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Capacity(a) => {
            let job: config::CapacityJob = config::load(&a.config)?;
            let rows = jobs::capacity(&job)?;
            write_rows(&a.out, &rows)?;
            Ok(wrote("capacity", rows.len(), &a.out))
        }
        Command::Rcb(a) => {
            let job: config::RcbJob = config::load(&a.config)?;
            let rows = jobs::rcb(&job)?;
            write_rows(&a.out, &rows)?;
            Ok(wrote("rcb", rows.len(), &a.out))
        }
        Command::TtreeBound(a) => {
            let job: config::TreeBoundJob = config::load(&a.config)?;
            let rows = jobs::tree_bound(&job)?;
            write_rows(&a.out, &rows)?;
            let last = rows.last().expect("validated allocation is non-empty");
            Ok(format!("{}; Pe = {}, Pf <= {}", wrote("ttree-bound", rows.len(), &a.out), formats::fmt_float(last.pe), formats::fmt_float(last.pf)))
        }
        Command::Alloc(a) => {
            let job: config::AllocJob = config::load(&a.config)?;
            let row = jobs::alloc(&job)?;
            write_rows(&a.out, std::slice::from_ref(&row))?;
            let what = row.l.map_or("infeasible".to_string(), |l| format!("L = {l}"));
            Ok(format!("{}; {what}", wrote("alloc", 1, &a.out)))
        }
        Command::Roc(a) => {
            let mut job: config::RocJob = config::load(&a.config)?;
            if let Some(s) = a.seed {
                job.seed = s;
            }
            job.validate()?;
            let rows = with_pool(a.workers, || Ok(jobs::roc(&job)?))?;
            write_rows(&a.out, &rows)?;
            Ok(wrote("roc", rows.len(), &a.out))
        }
        Command::Simulate { job: a, resume } => {
            let mut job: config::SimulateJob = config::load(&a.config)?;
            if let Some(s) = a.seed {
                job.seed = s;
            }
            job.scenarios()?;
            let done: Vec<SimRow> = if resume && a.out.exists() { formats::read(&a.out)? } else { Vec::new() };
            let (rows, reused) = with_pool(a.workers, || Ok(jobs::simulate(&job, &done)?))?;
            write_rows(&a.out, &rows)?;
            let mut summary = wrote("simulate", rows.len(), &a.out);
            if resume {
                summary += &format!(" ({reused} resumed)");
            }
            Ok(summary)
        }
        Command::Optimize(a) => {
            let mut job: config::OptimizeJob = config::load(&a.config)?;
            if let (Some(s), RocSource::Simulate { seed, .. }) = (a.seed, &mut job.roc) {
                *seed = s;
            }
            job.validate()?;
            let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
            if let RocSource::Csv { path } = &job.roc {
                if !base.join(path).is_file() {
                    return Err(Failure::Config(format!("ROC table {} not found", base.join(path).display())));
                }
            }
            let rows = with_pool(a.workers, || Ok(jobs::optimize(&job, &base)?))?;
            write_rows(&a.out, &rows)?;
            let cells: Vec<String> = rows
                .iter()
                .map(|r| match (r.is_saturated(), r.ebno_db) {
                    (true, _) | (_, None) => format!("t={}: saturated", r.t),
                    (false, Some(e)) => format!("t={}: {} dB", r.t, formats::fmt_float(e)),
                })
                .collect();
            Ok(format!("{}; {}", wrote("optimize", rows.len(), &a.out), cells.join(", ")))
        }
    }
}
