mod config;
mod experiment;
mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridcache::Regime;
use serde::Serialize;

use config::ExperimentConfig;
use experiment::{RunOptions, Task};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Caching experiments on a hybrid mmWave/µWave network.
#[derive(Debug, Parser)]
#[command(name = "hybridcache", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for sweep points and simulation trials.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// CSV destination, overriding the config; stdout when neither is set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Print the resolved config with linear parameters and exit.
    #[arg(long, global = true)]
    dump_effective_config: bool,

    /// Fill the wall_time_s column. Timings make the CSV non-reproducible.
    #[arg(long, global = true)]
    timing: bool,

    /// Write the placement behind every row as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    policy_out: Option<PathBuf>,

    /// Directory receiving one JSONL file of sampled realizations per simulated row.
    #[arg(long, global = true, value_name = "DIR")]
    dump_realizations: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Probability of attaching to the µWave tier.
    Associate,
    /// Analytic success probability for each strategy.
    AspAnalytic,
    /// Simulated success probability for each strategy.
    AspSim,
    /// Noise-limited optimal placement.
    OptimizeNl,
    /// Interference-limited placement by the convex-concave procedure.
    OptimizeIl,
    /// Analytic and simulated success probability for every strategy.
    Compare,
    /// Analytic results against simulation; exits 2 if any check fails.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Associate => "associate",
            Command::AspAnalytic => "asp-analytic",
            Command::AspSim => "asp-sim",
            Command::OptimizeNl => "optimize-nl",
            Command::OptimizeIl => "optimize-il",
            Command::Compare => "compare",
            Command::Validate => "validate",
        }
    }

    fn task(self) -> Option<Task> {
        let t = |analytic, simulate, regime, proposed_only| Some(Task { analytic, simulate, regime, proposed_only });
        match self {
            Command::AspAnalytic => t(true, false, None, false),
            Command::AspSim => t(false, true, None, false),
            Command::Compare => t(true, true, None, false),
            Command::OptimizeNl => t(true, false, Some(Regime::NoiseLimited), true),
            Command::OptimizeIl => t(true, false, Some(Regime::InterferenceLimited), true),
            Command::Associate | Command::Validate => None,
        }
    }
}

fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<(), CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::Usage(format!("cannot write CSV: {e}"));
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row).map_err(|e| io_err(&e))?;
    }
    w.flush().map_err(|e| io_err(&e))
}

fn log_run(command: Command, exp: &ExperimentConfig) {
    eprintln!(
        "hybridcache {} {}: seed {}, workers {}, trials {}, regime {}",
        env!("CARGO_PKG_VERSION"),
        command.name(),
        exp.seed,
        rayon::current_num_threads(),
        exp.n_trials,
        exp.regime.label(),
    );
    let network = serde_json::to_string(&exp.network).unwrap_or_default();
    eprintln!("network: {network}");
    eprintln!(
        "popularity: catalog {} zipf {}; serving distance {:?}; sweep {}",
        exp.catalog_size,
        exp.zipf_exponent,
        exp.serving_distance,
        exp.sweep
            .as_ref()
            .map(|s| format!("{} over {:?}", s.axis.name(), s.values))
            .unwrap_or_else(|| "none".into()),
    );
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut exp = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::parse("")?,
    };
    if let Some(seed) = cli.seed {
        exp.seed = seed;
    }
    if let Some(out) = &cli.out {
        exp.out = Some(out.clone());
    }
    if cli.dump_effective_config {
        print!("{}", exp.to_toml()?);
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("a subcommand is required; see --help".into()));
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    }
    let points = exp.points()?;
    log_run(command, &exp);
    let out = exp.out.as_deref();

    match command {
        Command::Associate => write_csv(&experiment::associate(&points, cli.timing)?, out),
        Command::Validate => {
            let rows = validate::validate(&exp, &points)?;
            write_csv(&rows, out)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            for r in &failed {
                eprintln!(
                    "check {} failed at sweep value {:?}: analytic {} simulated {} tolerance {}",
                    r.check, r.sweep_value, r.analytic, r.simulated, r.tolerance
                );
            }
            eprintln!("{} of {} checks passed", rows.len() - failed.len(), rows.len());
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("{} validation checks failed", failed.len())))
            }
        }
        command => {
            let task = command.task().expect("sweep commands define a task");
            if let Some(dir) = &cli.dump_realizations {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
            }
            let opts = RunOptions { timing: cli.timing, dump_dir: cli.dump_realizations.as_deref() };
            let result = experiment::run(&exp, &points, task, &opts)?;
            if let Some(path) = &cli.policy_out {
                let json = serde_json::to_string_pretty(&result.policies)
                    .map_err(|e| CliError::Usage(format!("cannot encode policies: {e}")))?;
                std::fs::write(path, json + "\n")
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            write_csv(&result.rows, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
