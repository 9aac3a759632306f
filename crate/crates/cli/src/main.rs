//! Configuration-driven front-end for the long-range Ising solver.
//!
//! Exit codes: 0 success, 1 failed validation checks, 2 configuration
//! problems, 3 numerical failures.

mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use longrange::config::{RunConfig, Task};
use longrange::Error;

#[derive(Parser)]
#[command(name = "lrsolve", version, about = "Canonical-ensemble solver for strong long-range transverse-field Ising chains", long_about = None)]
struct Cli {
    /// Run configuration file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,

    /// Task to run; overrides the config's `task` key.
    #[arg(long, value_parser = ["spectrum", "phase", "chi", "validate"])]
    task: Option<String>,

    /// Worker threads for grid sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Output directory; overrides the config's `out_dir` key.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(cli: Cli) -> longrange::Result<ExitCode> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut config = RunConfig::from_str(&text)?;
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    let task = match cli.task {
        Some(name) => Task::parse(&name)?,
        None => config.task.ok_or_else(|| {
            Error::Config("no task given (set `task` in the config or pass --task)".into())
        })?,
    };

    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size worker pool: {e}")))?;
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let ctx = tasks::RunContext::new(config, task, &text);
    match task {
        Task::Spectrum => tasks::run_spectrum(&ctx)?,
        Task::Phase => tasks::run_phase(&ctx)?,
        Task::Chi => tasks::run_chi(&ctx)?,
        Task::Validate => {
            let all_passed = tasks::run_validate(&ctx)?;
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
