//! Command-line front end for joint activity detection, delay estimation,
//! and channel estimation experiments.
//!
//! Four subcommands cover the workflows the library supports:
//!
//! * `run` — execute a Monte Carlo campaign from a TOML spec and write
//!   `results.jsonl`, `aggregates.csv`, `config_echo.toml`, `timings.csv`;
//! * `curves` — the same campaign, plus `curves.csv` with error
//!   probabilities ordered along the sweep axis;
//! * `trace` — single-instance solver convergence trace (`trace.csv`);
//! * `selftest` — built-in verification suite, one line per check.
//!
//! Every flag overrides the corresponding spec field, so a spec file is
//! optional: `glad run --trials 50 --out results` works on defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use glad_core::harness::{
    convergence_trace, emit_error_curves, load_spec, run_experiment, write_results,
    write_trace_csv, ExperimentSpec, SweepRecord,
};
use glad_core::selftest::run_selftest;
use glad_core::solver::SolverOptions;

#[derive(Parser)]
#[command(
    name = "glad",
    about = "Group-sparse joint activity, delay, and channel estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write per-trial and aggregate results.
    Run(CampaignArgs),
    /// Run a campaign and additionally write error curves along the sweep.
    Curves(CampaignArgs),
    /// Trace solver convergence on a single generated instance.
    Trace(TraceArgs),
    /// Run the built-in verification suite.
    Selftest,
}

/// Flags shared by `run` and `curves`. Each override replaces the value
/// from `--config` (or the built-in default spec when no file is given).
#[derive(Args)]
struct CampaignArgs {
    /// Experiment spec (TOML). Defaults apply for every omitted field.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed override; per-trial seeds derive from it.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    /// Experiment spec (TOML); only the scenario and solver sections matter.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Scenario seed override.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Penalty for the traced solve; defaults to the data-scaled value.
    #[arg(long, value_name = "FLOAT")]
    rho: Option<f64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => campaign(&args, false),
        Command::Curves(args) => campaign(&args, true),
        Command::Trace(args) => trace(&args),
        Command::Selftest => return selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Loads the spec (or defaults) and applies the shared flag overrides.
fn load_campaign_spec(args: &CampaignArgs) -> anyhow::Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => load_spec(path).context("loading spec")?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.num_trials = trials;
    }
    if let Some(jobs) = args.jobs {
        spec.jobs = jobs;
    }
    Ok(spec)
}

fn campaign(args: &CampaignArgs, with_curves: bool) -> anyhow::Result<()> {
    let spec = load_campaign_spec(args)?;
    let records = run_experiment(&spec).context("running campaign")?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_results(&args.out, &spec, &records).context("writing results")?;
    if with_curves {
        emit_error_curves(&records, &args.out.join("curves.csv"))
            .context("writing error curves")?;
    }

    for record in &records {
        print_sweep_summary(record);
    }
    println!("results written to {}", args.out.display());
    Ok(())
}

fn print_sweep_summary(record: &SweepRecord) {
    let point = match record.sweep_value {
        Some(v) => format!("{}={v}", record.sweep_axis),
        None => "single point".to_string(),
    };
    let agg = &record.aggregate;
    let nmse = agg
        .mean_channel_nmse
        .map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
    println!(
        "{point}: {} trials in {:.1}s | detection error {:.4} | missed {:.4} | false alarm {:.4} | NMSE {nmse}",
        agg.num_trials,
        record.wall_time_s,
        agg.detection_error_prob,
        agg.missed_detection_prob,
        agg.false_alarm_prob,
    );
}

fn trace(args: &TraceArgs) -> anyhow::Result<()> {
    let (mut config, solver) = match &args.config {
        Some(path) => {
            let spec = load_spec(path).context("loading spec")?;
            (spec.config, spec.solver)
        }
        None => (
            glad_core::model::SystemConfig::default(),
            SolverOptions::default(),
        ),
    };
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }

    let trace = convergence_trace(&config, args.rho, &solver).context("tracing convergence")?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join("trace.csv");
    write_trace_csv(&trace, &path).context("writing trace")?;

    println!(
        "rho {:.6e} | optimum {:.12e} | {} sweeps | converged {}",
        trace.rho,
        trace.gamma_star,
        trace.rows.len().saturating_sub(1),
        trace.converged,
    );
    println!("trace written to {}", path.display());
    Ok(())
}

fn selftest() -> ExitCode {
    let report = run_selftest();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {} — {}", check.name, check.detail);
    }
    if report.all_passed() {
        println!("selftest: all {} checks passed", report.checks.len());
        ExitCode::SUCCESS
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        eprintln!("selftest: {failed} check(s) failed");
        ExitCode::FAILURE
    }
}
