//! Monte Carlo experiment harness.
//!
//! Loads a TOML experiment spec, runs seeded trial campaigns (optionally
//! swept over preamble length or antenna count) with trial-level
//! parallelism, and persists results: per-trial rows as JSON lines,
//! aggregates and plot-ready curves as CSV, and the spec echoed back as
//! TOML.
//!
//! Determinism contract: per-trial seeds are derived by counter-based
//! mixing of (master seed, sweep index, trial index), never from execution
//! order, and rows are emitted sorted by trial index — so a given spec and
//! seed produce byte-identical row files at any parallelism degree.
//! Wall-clock timings go to a separate file to keep the result files
//! reproducible.

use std::fmt::Write as _;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continuation::{solve_with_continuation, ContinuationOptions, GainMode};
use crate::dictionary::ExtendedDictionary;
use crate::metrics::{aggregate, score_trial, AggregateScore, TrialScore};
use crate::model::{Scenario, SystemConfig};
use crate::solver::{bcd_solve, SolverOptions};
use crate::{Error, Result};

/// What to vary across sweep points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SweepAxis {
    /// Single point at the base config.
    #[default]
    None,
    /// Vary the preamble length L.
    PreambleLen { values: Vec<usize> },
    /// Vary the antenna count M.
    Antennas { values: Vec<usize> },
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::PreambleLen { .. } => "preamble_len",
            SweepAxis::Antennas { .. } => "antennas",
        }
    }

    /// The per-point configs this axis induces on `base`, in spec order.
    pub fn points(&self, base: &SystemConfig) -> Vec<(Option<usize>, SystemConfig)> {
        match self {
            SweepAxis::None => vec![(None, base.clone())],
            SweepAxis::PreambleLen { values } => values
                .iter()
                .map(|&l| {
                    let mut c = base.clone();
                    c.preamble_len = l;
                    (Some(l), c)
                })
                .collect(),
            SweepAxis::Antennas { values } => values
                .iter()
                .map(|&m| {
                    let mut c = base.clone();
                    c.num_antennas = m;
                    (Some(m), c)
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = match self {
            SweepAxis::None => return Ok(()),
            SweepAxis::PreambleLen { values } | SweepAxis::Antennas { values } => values,
        };
        if values.is_empty() {
            return Err(Error::InvalidConfig("sweep values must be non-empty".into()));
        }
        if values.contains(&0) {
            return Err(Error::InvalidConfig("sweep values must be positive".into()));
        }
        Ok(())
    }
}

/// A complete, file-loadable description of one experiment campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    /// Scenario parameters; swept fields are overridden per point.
    pub config: SystemConfig,
    /// Sweep axis and values.
    pub sweep: SweepAxis,
    /// Trials per sweep point.
    pub num_trials: usize,
    /// Worker threads for trial-level parallelism (0 = all cores).
    pub jobs: usize,
    /// Master seed; per-trial seeds are derived from it.
    pub master_seed: u64,
    /// Whether thresholding uses true gains or estimates them.
    pub gain_mode: GainMode,
    /// Outer-loop settings.
    pub continuation: ContinuationOptions,
    /// Inner-solver settings.
    pub solver: SolverOptions,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            config: SystemConfig::default(),
            sweep: SweepAxis::None,
            num_trials: 200,
            jobs: 1,
            master_seed: 1,
            gain_mode: GainMode::Known,
            continuation: ContinuationOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.sweep.validate()?;
        self.continuation.validate()?;
        if self.num_trials == 0 {
            return Err(Error::InvalidConfig("num_trials must be >= 1".into()));
        }
        if !(self.solver.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("solver.rel_tol must be positive".into()));
        }
        if self.solver.max_sweeps == 0 {
            return Err(Error::InvalidConfig("solver.max_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Loads and validates an [`ExperimentSpec`] from a TOML file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: ExperimentSpec = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

/// SplitMix64 finalizer; statistically strong 64-bit mixing.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based per-trial seed: depends only on (master, sweep index,
/// trial index), never on scheduling.
pub fn trial_seed(master_seed: u64, sweep_idx: u64, trial_idx: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ sweep_idx) ^ trial_idx)
}

/// One persisted per-trial row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_axis: String,
    pub sweep_value: Option<usize>,
    pub trial: usize,
    pub seed: u64,
    pub score: TrialScore,
    pub rho_final: f64,
    pub rounds_used: usize,
    pub forced_feasibility: bool,
    pub solver_converged: bool,
}

/// All results for one sweep point.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub sweep_axis: String,
    pub sweep_value: Option<usize>,
    /// Config snapshot for this point (rng_seed holds the master seed).
    pub config: SystemConfig,
    /// Hash of everything that determines the rows of this record.
    pub config_hash: String,
    pub trials: Vec<TrialRecord>,
    pub aggregate: AggregateScore,
    /// Campaign wall time for this point; excluded from deterministic files.
    pub wall_time_s: f64,
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Hash of the reproducibility-relevant parts of a sweep point.
fn config_hash(
    spec: &ExperimentSpec,
    config: &SystemConfig,
    sweep_value: Option<usize>,
) -> String {
    #[derive(Serialize)]
    struct HashInput<'a> {
        config: &'a SystemConfig,
        gain_mode: GainMode,
        continuation: &'a ContinuationOptions,
        solver: &'a SolverOptions,
        master_seed: u64,
        num_trials: usize,
        sweep_axis: &'a str,
        sweep_value: Option<usize>,
    }
    let input = HashInput {
        config,
        gain_mode: spec.gain_mode,
        continuation: &spec.continuation,
        solver: &spec.solver,
        master_seed: spec.master_seed,
        num_trials: spec.num_trials,
        sweep_axis: spec.sweep.label(),
        sweep_value,
    };
    let json = serde_json::to_vec(&input).expect("hash input serializes");
    hex_digest(&Sha256::digest(&json))
}

/// Runs one seeded realization end to end: scenario, detection, scoring.
pub fn run_trial(
    config: &SystemConfig,
    gain_mode: GainMode,
    copts: &ContinuationOptions,
    sopts: &SolverOptions,
) -> (TrialScore, crate::continuation::DetectionResult) {
    let sc = Scenario::generate(config);
    let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
    let gains = match gain_mode {
        GainMode::Known => Some(sc.truth.path_gains.as_slice()),
        GainMode::Estimated => None,
    };
    let result = solve_with_continuation(
        &dict,
        sc.received.samples.view(),
        config.tx_power,
        config.noise_var,
        gains,
        copts,
        sopts,
    );
    let score = score_trial(&result, &sc.truth);
    (score, result)
}

/// Runs the full campaign: every sweep point, `num_trials` seeded trials
/// each, in a worker pool of `spec.jobs` threads. Output is identical for
/// any `jobs` value.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;

    let mut records = Vec::new();
    for (sweep_idx, (sweep_value, mut config)) in
        spec.sweep.points(&spec.config).into_iter().enumerate()
    {
        config.rng_seed = spec.master_seed;
        config.validate()?;
        let started = Instant::now();

        let axis = spec.sweep.label().to_string();
        let trials: Result<Vec<TrialRecord>> = pool.install(|| {
            (0..spec.num_trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = trial_seed(spec.master_seed, sweep_idx as u64, trial as u64);
                    let mut trial_config = config.clone();
                    trial_config.rng_seed = seed;
                    let outcome = catch_unwind(AssertUnwindSafe(|| {
                        run_trial(&trial_config, spec.gain_mode, &spec.continuation, &spec.solver)
                    }));
                    match outcome {
                        Ok((score, result)) => Ok(TrialRecord {
                            sweep_axis: axis.clone(),
                            sweep_value,
                            trial,
                            seed,
                            score,
                            rho_final: result.rho_final,
                            rounds_used: result.rounds_used,
                            forced_feasibility: result.forced_feasibility,
                            solver_converged: result.solver_converged,
                        }),
                        Err(panic) => {
                            let message = panic
                                .downcast_ref::<&str>()
                                .map(|s| s.to_string())
                                .or_else(|| panic.downcast_ref::<String>().cloned())
                                .unwrap_or_else(|| "unknown panic".into());
                            Err(Error::TrialFailed { seed, message })
                        }
                    }
                })
                .collect()
        });
        let mut trials = trials?;
        // par_iter collect preserves index order; sort anyway so the
        // determinism contract never rests on scheduler behavior.
        trials.sort_by_key(|t| t.trial);

        let scores: Vec<TrialScore> = trials.iter().map(|t| t.score.clone()).collect();
        records.push(SweepRecord {
            sweep_axis: axis,
            sweep_value,
            config_hash: config_hash(spec, &config, sweep_value),
            config,
            aggregate: aggregate(&scores),
            trials,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(records)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(contents.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Persists a campaign under `dir`:
/// `results.jsonl` (per-trial rows), `aggregates.csv`, `config_echo.toml`,
/// and `timings.csv` (the only non-deterministic file).
pub fn write_results(dir: &Path, spec: &ExperimentSpec, records: &[SweepRecord]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut rows = String::new();
    for rec in records {
        for t in &rec.trials {
            let line = serde_json::to_string(t).expect("trial record serializes");
            rows.push_str(&line);
            rows.push('\n');
        }
    }
    write_file(&dir.join("results.jsonl"), &rows)?;

    let mut agg = String::from(
        "sweep_axis,sweep_value,num_trials,detection_error_prob,missed_detection_prob,\
         false_alarm_prob,mean_channel_nmse,pooled_channel_nmse,trials_with_missed,\
         trials_with_false_alarm,trials_with_delay_error,forced_feasibility_trials,\
         solver_nonconverged_trials,config_hash\n",
    );
    for rec in records {
        let a = &rec.aggregate;
        let forced = rec.trials.iter().filter(|t| t.forced_feasibility).count();
        let nonconv = rec.trials.iter().filter(|t| !t.solver_converged).count();
        let _ = writeln!(
            agg,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rec.sweep_axis,
            fmt_opt_usize(rec.sweep_value),
            a.num_trials,
            a.detection_error_prob,
            a.missed_detection_prob,
            a.false_alarm_prob,
            fmt_opt_f64(a.mean_channel_nmse),
            fmt_opt_f64(a.pooled_channel_nmse),
            a.trials_with_missed,
            a.trials_with_false_alarm,
            a.trials_with_delay_error,
            forced,
            nonconv,
            rec.config_hash,
        );
    }
    write_file(&dir.join("aggregates.csv"), &agg)?;

    let echo = toml::to_string_pretty(spec).expect("spec serializes to TOML");
    write_file(&dir.join("config_echo.toml"), &echo)?;

    let mut timings = String::from("sweep_axis,sweep_value,wall_time_s\n");
    for rec in records {
        let _ = writeln!(
            timings,
            "{},{},{}",
            rec.sweep_axis,
            fmt_opt_usize(rec.sweep_value),
            rec.wall_time_s
        );
    }
    write_file(&dir.join("timings.csv"), &timings)
}

/// Writes plot-ready error-probability curves for records sharing one sweep
/// axis, ordered by sweep value.
pub fn emit_error_curves(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let axis = &records[0].sweep_axis;
    if records.iter().any(|r| &r.sweep_axis != axis) {
        return Err(Error::MixedSweepAxis);
    }
    let mut ordered: Vec<&SweepRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.sweep_value);

    let mut out = String::from(
        "value,detection_error_prob,missed_detection_prob,false_alarm_prob\n",
    );
    for rec in ordered {
        let a = &rec.aggregate;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_opt_usize(rec.sweep_value),
            a.detection_error_prob,
            a.missed_detection_prob,
            a.false_alarm_prob
        );
    }
    write_file(path, &out)
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Sweep counter t (0 is the starting point).
    pub sweep: usize,
    /// Objective after sweep t.
    pub objective: f64,
    /// (objective - best objective) / best objective, clipped at zero.
    pub rel_gap: f64,
}

/// A solver convergence trace plus the high-accuracy optimum it is
/// measured against.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub rho: f64,
    pub gamma_star: f64,
    pub rows: Vec<TraceRow>,
    /// Whether the traced run met its own tolerance.
    pub converged: bool,
}

/// Traces the objective of one solve on the scenario drawn from `config`,
/// against the optimum from a tight reference run (relative tolerance
/// 1e-12). `rho` defaults to the same data-scaled value the continuation
/// loop starts from.
pub fn convergence_trace(
    config: &SystemConfig,
    rho: Option<f64>,
    sopts: &SolverOptions,
) -> Result<ConvergenceTrace> {
    config.validate()?;
    let sc = Scenario::generate(config);
    let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
    let y = sc.received.samples.view();

    let rho = rho
        .unwrap_or_else(|| {
            crate::continuation::default_rho(
                &dict,
                y,
                config.tx_power,
                config.noise_var,
                None,
                crate::continuation::DEFAULT_RHO_FRACTION,
            )
        })
        .max(f64::MIN_POSITIVE);

    let traced = bcd_solve(&dict, y, config.tx_power, rho, sopts, None);

    let tight = SolverOptions {
        rel_tol: 1e-12,
        max_sweeps: sopts.max_sweeps.max(20_000),
        refresh_every: sopts.refresh_every,
        check_monotone: false,
    };
    let reference = bcd_solve(&dict, y, config.tx_power, rho, &tight, None);
    if !reference.converged {
        return Err(Error::ReferenceNotConverged(format!(
            "tight run still above tolerance after {} sweeps",
            tight.max_sweeps
        )));
    }
    let gamma_star = reference.final_objective().min(traced.final_objective());

    let rows = traced
        .objective_trace
        .iter()
        .enumerate()
        .map(|(t, &obj)| {
            let gap = (obj - gamma_star).max(0.0);
            let rel_gap = if gap == 0.0 {
                0.0
            } else if gamma_star > 0.0 {
                gap / gamma_star
            } else {
                f64::INFINITY
            };
            TraceRow {
                sweep: t,
                objective: obj,
                rel_gap,
            }
        })
        .collect();

    Ok(ConvergenceTrace {
        rho,
        gamma_star,
        rows,
        converged: traced.converged,
    })
}

/// Writes a [`ConvergenceTrace`] as CSV: `sweep,objective,rel_gap`.
pub fn write_trace_csv(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    let mut out = String::from("sweep,objective,rel_gap\n");
    for row in &trace.rows {
        let _ = writeln!(out, "{},{},{}", row.sweep, row.objective, row.rel_gap);
    }
    write_file(path, &out)
}

/// Convenience: the default output directory name for a spec.
pub fn default_output_dir(base: &Path) -> PathBuf {
    base.join("out")
}
