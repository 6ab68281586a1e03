//! Command-line front end.
//!
//! Three subcommands:
//!
//! * `run` - one trial; writes `trial_log.json` (world + full log),
//!   `run_log.csv`, and optionally `trial.svg`.
//! * `experiment` - all trials; writes `summary.csv` and optionally
//!   `trial_<i>.svg` per trial.
//! * `replay` - re-renders a saved `trial_log.json` to SVG without
//!   re-simulating.
//!
//! Every command finishes with one machine-parsable `status=...` line on
//! stdout. Exit codes: 0 success, 2 usage/config error, 3 search failed,
//! 4 tick budget exceeded, 5 output I/O error.

use crate::harness::{
    build_world, run_trial, run_trials, scenario_from_parts, export_summary, ExperimentSummary,
    Scenario, TerminalStatus, TrialArtifact, write_run_log_csv,
};
use crate::plot::{artifact_svg, trial_svg};
use crate::world::Side;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SEARCH_FAILED: i32 = 3;
pub const EXIT_BUDGET_EXCEEDED: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Environment fallback for `--seed`.
pub const SEED_ENV_VAR: &str = "VINEYARD_NAV_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "vineyard-nav",
    version,
    about = "Deterministic row-navigation simulator",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single trial and write its logs.
    Run(RunArgs),
    /// Run every trial of the scenario and write the summary CSV.
    Experiment(RunArgs),
    /// Render a saved trial artifact to SVG.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario JSON file. Omitted fields fall back to defaults; the whole
    /// flag may be omitted to run the default scenario.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Working side: left or right. Overrides the scenario.
    #[arg(long)]
    side: Option<Side>,
    /// Base seed. Overrides the scenario and VINEYARD_NAV_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted-path scenario override, repeatable: --set camera.miss_prob=0.2
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Trial index to run (run subcommand only).
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Trial artifact JSON written by `run`.
    #[arg(long, value_name = "PATH")]
    log: PathBuf,
    /// Output SVG path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

fn exit_code_for(status: TerminalStatus) -> i32 {
    match status {
        TerminalStatus::Done => EXIT_OK,
        TerminalStatus::SearchFailed => EXIT_SEARCH_FAILED,
        TerminalStatus::TickBudgetExceeded => EXIT_BUDGET_EXCEEDED,
    }
}

/// Assemble the scenario from file, `--set` overrides, then `--side`/`--seed`
/// flags (most specific wins).
fn build_scenario(args: &RunArgs) -> Result<Scenario, Failure> {
    let file_text = match &args.scenario {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read scenario {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let mut scenario = scenario_from_parts(file_text.as_deref(), &args.set)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(side) = args.side {
        scenario.nav.work_side = side;
    }
    match args.seed {
        Some(seed) => scenario.base_seed = seed,
        None => {
            if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
                let seed = raw
                    .parse::<u64>()
                    .map_err(|_| Failure::usage(format!("{SEED_ENV_VAR}='{raw}' is not a u64")))?;
                scenario.base_seed = seed;
            }
        }
    }
    Ok(scenario)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", path.display())))
}

fn cmd_run(args: &RunArgs) -> Result<i32, Failure> {
    let scenario = build_scenario(args)?;
    ensure_dir(&args.out)?;
    let log = run_trial(&scenario, args.trial);
    let artifact = TrialArtifact { world: build_world(&scenario), log };

    let json = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
    write_text(&args.out.join("trial_log.json"), &json)?;

    let mut csv = Vec::new();
    write_run_log_csv(&mut csv, &artifact.log).expect("in-memory write");
    write_text(&args.out.join("run_log.csv"), &String::from_utf8(csv).expect("utf8"))?;

    if args.svg {
        write_text(&args.out.join("trial.svg"), &artifact_svg(&artifact))?;
    }

    let log = &artifact.log;
    println!(
        "status={} arrivals={} ticks={} seed={}",
        log.status.as_str(),
        log.arrivals.len(),
        log.ticks_used,
        scenario.base_seed
    );
    Ok(exit_code_for(log.status))
}

fn cmd_experiment(args: &RunArgs) -> Result<i32, Failure> {
    let scenario = build_scenario(args)?;
    ensure_dir(&args.out)?;
    let logs = run_trials(&scenario);
    let summary = ExperimentSummary::from_trials(&logs);

    export_summary(&summary, &args.out.join("summary.csv"))
        .map_err(|e| Failure::io(e.to_string()))?;

    if args.svg {
        let world = build_world(&scenario);
        for log in &logs {
            let path = args.out.join(format!("trial_{}.svg", log.trial_index));
            write_text(&path, &trial_svg(&world, log))?;
        }
    }

    let status = summary.overall_status();
    println!(
        "status={} mean_m={} std_m={} n_arrivals={} completion_rate={}",
        status.as_str(),
        summary.mean_error_m,
        summary.std_pop_m,
        summary.n_arrivals,
        summary.completion_rate
    );
    Ok(exit_code_for(status))
}

fn cmd_replay(args: &ReplayArgs) -> Result<i32, Failure> {
    let text = fs::read_to_string(&args.log)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.log.display())))?;
    let artifact: TrialArtifact = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{} is not a trial artifact: {e}", args.log.display())))?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    write_text(&args.out, &artifact_svg(&artifact))?;
    println!("status=done out={}", args.out.display());
    Ok(EXIT_OK)
}

/// Parse argv and execute; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            return if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                EXIT_OK
            } else {
                println!("status=usage_error");
                EXIT_USAGE
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            let name = if failure.code == EXIT_USAGE { "usage_error" } else { "io_error" };
            println!("status={name}");
            failure.code
        }
    }
}
