//! Command-line front end. `run` returns the process exit code:
//! 0 on success, 2 when `--check-trends` finds a failed trend, 1 on error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use crate::config::RunConfig;
use crate::report::{emit_reports, emit_summary, emit_trends, OutputUnwritable};
use crate::scenario::{compare_scenarios, run_grid, ScenarioError};
use crate::scheduler::SolverKind;

#[derive(Debug, Parser)]
#[command(name = "dsmsim", version, about = "Household scheduling and feeder impact simulator")]
pub struct Args {
    /// JSON run configuration; the bundled experiment grid when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the one in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for both the synthetic inputs and the heuristic solver.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// Exit with status 2 when any expected trend does not hold.
    #[arg(long)]
    pub check_trends: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SolverArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    OutputUnwritable(#[from] OutputUnwritable),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub scenarios: usize,
    pub trends_passed: bool,
}

pub fn resolve_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path).map_err(CliError::ConfigInvalid)?,
        None => RunConfig::paper_grid(),
    };
    if let Some(seed) = args.seed {
        config.synth.seed = seed;
        config.solver.seed = seed;
    }
    if let Some(solver) = args.solver {
        config.solver.kind = match solver {
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Heuristic => SolverKind::Heuristic,
        };
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    config.validate().map_err(CliError::ConfigInvalid)?;
    Ok(config)
}

/// Runs every scenario of `config` and writes the CSV tree.
pub fn execute(config: &RunConfig) -> Result<RunSummary, CliError> {
    let inputs = config.inputs()?;
    let results = run_grid(&config.specs(), &inputs)?;
    let trends = compare_scenarios(&results)?;
    let dir = &config.output_dir;
    for r in &results {
        emit_reports(r, &dir.join(r.spec.label()))?;
    }
    emit_summary(&results, &dir.join("summary.csv"))?;
    emit_trends(&trends, &dir.join("trends.csv"))?;
    Ok(RunSummary {
        output_dir: dir.clone(),
        scenarios: results.len(),
        trends_passed: trends.all_passed(),
    })
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let Ok(raw) = std::env::var("DSMSIM_THREADS") else {
        return Ok(None);
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| CliError::ConfigInvalid(format!("DSMSIM_THREADS: `{raw}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| CliError::ConfigInvalid(format!("DSMSIM_THREADS: {e}")))
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = resolve_config(&args).and_then(|config| match thread_pool()? {
        Some(pool) => pool.install(|| execute(&config)),
        None => execute(&config),
    });
    match outcome {
        Ok(summary) => {
            println!(
                "wrote {} scenarios to {}",
                summary.scenarios,
                summary.output_dir.display()
            );
            if args.check_trends && !summary.trends_passed {
                eprintln!("trend check failed, see trends.csv");
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("dsmsim: {e}");
            1
        }
    }
}
