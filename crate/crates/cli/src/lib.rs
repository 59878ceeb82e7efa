//! Config-driven batch runner: build a Hamiltonian, run the declared tasks
//! (optimisation, evolution, mitigation) and write deterministic reports.

pub mod config;
pub mod error;
pub mod oracle;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::LoadedConfig;
use crate::error::{CliError, Result};
use crate::report::RunReport;
use crate::run::{Context, RunMode, TaskOutput};

#[derive(Debug, Parser)]
#[command(name = "vqlab", version, about = "Run variational-algorithm experiments from a config file")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute every task in the config and write results.json, trace.csv
    /// and extrapolation.csv.
    Run(RunArgs),
    /// Dense exact answers for every task, written as oracle.json and
    /// oracle_trace.csv.
    Oracle(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment config (TOML, or JSON with a .json extension).
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker-thread cap for parallel kernels (results do not depend on it).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory (default: output.dir from the config, else `vqlab-out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat gates without an assigned noise channel as an error.
    #[arg(long)]
    pub strict_noise: bool,
}

/// Load, validate and execute; nothing is written.
pub fn execute(args: &RunArgs, mode: RunMode) -> Result<(RunReport, LoadedConfig)> {
    if args.jobs == 0 {
        return Err(CliError::Invalid("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {} workers: {e}", args.jobs)))?;
    pool.install(|| execute_in_pool(args, mode))
}

fn execute_in_pool(args: &RunArgs, mode: RunMode) -> Result<(RunReport, LoadedConfig)> {
    let start = Instant::now();
    let loaded = LoadedConfig::load(&args.config)?;
    let seed = args.seed.unwrap_or(loaded.config.seed);
    let ctx = Context::build(&loaded, seed, args.strict_noise, mode)?;
    let mut report = RunReport {
        mode: match mode {
            RunMode::Run => "run",
            RunMode::Oracle => "oracle",
        },
        config_hash: loaded.hash(),
        seed,
        n_qubits: ctx.n_qubits,
        tasks: Vec::new(),
        flags: Vec::new(),
        wall_clock: Default::default(),
        trace: Vec::new(),
        extrapolation: Vec::new(),
    };
    for (i, task) in loaded.config.tasks.iter().enumerate() {
        let TaskOutput {
            mut result,
            trace,
            extrapolation,
            flags,
        } = match mode {
            RunMode::Run => run::run_task(&ctx, i, task)?,
            RunMode::Oracle => oracle::oracle_task(&ctx, i, task)?,
        };
        if mode == RunMode::Run && ctx.oracle {
            let mut reference = oracle::oracle_task(&ctx, i, task)?.result;
            if let Some(obj) = reference.as_object_mut() {
                obj.remove("task");
                obj.remove("kind");
            }
            result["oracle"] = reference;
        }
        report.tasks.push(result);
        report.trace.extend(trace);
        report.extrapolation.extend(extrapolation);
        report.flags.extend(flags);
    }
    report.wall_clock = start.elapsed();
    Ok((report, loaded))
}

fn output_dir(args: &RunArgs, loaded: &LoadedConfig) -> PathBuf {
    if let Some(dir) = &args.out {
        return dir.clone();
    }
    match &loaded.config.output.dir {
        Some(d) if d.is_relative() => loaded.path.parent().unwrap_or(".".as_ref()).join(d),
        Some(d) => d.clone(),
        None => PathBuf::from("vqlab-out"),
    }
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (args, mode) = match &cli.command {
        Command::Run(a) => (a, RunMode::Run),
        Command::Oracle(a) => (a, RunMode::Oracle),
    };
    let outcome = execute(args, mode).and_then(|(report, loaded)| {
        let dir = output_dir(args, &loaded);
        let written = report.write(&dir)?;
        Ok((report, written))
    });
    match outcome {
        Ok((report, written)) => {
            for f in &report.flags {
                eprintln!("warning: {f}");
            }
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
            eprintln!(
                "{} task(s) in {:.3} s, config {}",
                report.tasks.len(),
                report.wall_clock.as_secs_f64(),
                &report.config_hash[..12]
            );
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
