//! Built-in verification suite.
//!
//! A condensed, runtime-executable version of the crate's key correctness
//! checks, intended for the CLI's `selftest` subcommand: hand-computed
//! update values, first-order optimality of the closed-form block update,
//! agreement between the production solver and the independent reference
//! solver, objective monotonicity, noiseless recovery, and campaign
//! determinism. Each check runs isolated; a panic counts as a failure of
//! that check only.

use std::panic::{catch_unwind, AssertUnwindSafe};

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::continuation::{solve_with_continuation, ContinuationOptions};
use crate::dictionary::{BlockId, ExtendedDictionary};
use crate::harness::{run_experiment, ExperimentSpec};
use crate::linalg::norm_l2;
use crate::model::{
    generate_preambles, scenario_stream, PathLossModel, PreambleBook, Scenario, SystemConfig,
};
use crate::reference::{proximal_gradient_solve, ReferenceOptions};
use crate::solver::{bcd_solve, block_update, SolverOptions};
use crate::C64;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// One-line summary: the measured quantity on success, the failure
    /// reason otherwise.
    pub detail: String,
}

/// Results of the whole suite.
#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn run_check(
    name: &'static str,
    check: impl FnOnce() -> std::result::Result<String, String>,
) -> CheckOutcome {
    match catch_unwind(AssertUnwindSafe(check)) {
        Ok(Ok(detail)) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Ok(Err(detail)) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
        Err(panic) => CheckOutcome {
            name,
            passed: false,
            detail: panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked".into()),
        },
    }
}

/// Hand-computed scalar case: L=2, M=1, p=1, rho=1, y=[2,2] must give 1.5.
fn check_scalar_update() -> std::result::Result<String, String> {
    let book = PreambleBook::new(ndarray::array![[
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0)
    ]]);
    let dict = ExtendedDictionary::new(book, 0);
    let y = ndarray::array![[C64::new(2.0, 0.0)], [C64::new(2.0, 0.0)]];
    let x = block_update(&dict, BlockId { device: 0, shift: 0 }, y.view(), 1.0, 1.0);
    let err = (x[0] - C64::new(1.5, 0.0)).norm();
    if err <= 1e-12 {
        Ok(format!("|x - 1.5| = {err:.1e}"))
    } else {
        Err(format!("expected 1.5, got {}", x[0]))
    }
}

/// First-order optimality of the closed form over random draws.
fn check_update_optimality() -> std::result::Result<String, String> {
    let config = SystemConfig {
        num_devices: 3,
        preamble_len: 6,
        max_delay: 2,
        num_active: 0,
        ..SystemConfig::default()
    };
    let dict = ExtendedDictionary::new(
        generate_preambles(&config, &mut scenario_stream(5150, 0)),
        config.max_delay,
    );
    let mut rng = scenario_stream(5151, 1);
    let m = 4;
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let y = Array2::from_shape_fn((dict.num_rows(), m), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let p = 0.1 + rng.random::<f64>() * 2.0;
        let rho = 0.05 + rng.random::<f64>() * 2.0;
        let id = dict.block_of(trial % dict.num_columns());

        let mut c = Array1::<C64>::zeros(m);
        dict.correlate(id, y.view(), &mut c);
        let x = block_update(&dict, id, y.view(), p, rho);
        let x_norm = norm_l2(x.view());
        let l = dict.preamble_len() as f64;
        let viol = if x_norm > 0.0 {
            (0..m)
                .map(|k| (-p.sqrt() * c[k] + p * l * x[k] + rho * x[k] / x_norm).norm())
                .fold(0.0f64, f64::max)
        } else {
            (p.sqrt() * norm_l2(c.view()) - rho).max(0.0)
        };
        worst = worst.max(viol);
    }
    if worst <= 1e-9 {
        Ok(format!("max violation {worst:.2e} over 500 draws"))
    } else {
        Err(format!("optimality violated by {worst:.2e}"))
    }
}

/// The production solver and the independent first-order reference must
/// agree on the optimum.
fn check_solver_against_reference() -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..2 {
        let config = SystemConfig {
            num_devices: 6,
            num_antennas: 4,
            preamble_len: 12,
            max_delay: 2,
            tx_power: 0.8,
            noise_var: 1e-3,
            num_active: 2,
            path_loss_model: PathLossModel::Unit,
            rng_seed: 600 + seed,
            ..SystemConfig::default()
        };
        let sc = Scenario::generate(&config);
        let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
        let rho = 0.4;
        let reference = proximal_gradient_solve(
            &dict,
            sc.received.samples.view(),
            config.tx_power,
            rho,
            &ReferenceOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let bcd = bcd_solve(
            &dict,
            sc.received.samples.view(),
            config.tx_power,
            rho,
            &SolverOptions {
                rel_tol: 1e-12,
                max_sweeps: 5000,
                ..SolverOptions::default()
            },
            None,
        );
        let rel =
            (bcd.final_objective() - reference.objective).abs() / reference.objective.max(1e-300);
        worst = worst.max(rel);
    }
    if worst <= 1e-6 {
        Ok(format!("max relative objective gap {worst:.2e}"))
    } else {
        Err(format!("solver disagrees with reference by {worst:.2e}"))
    }
}

/// The objective must never rise, at per-update granularity.
fn check_monotone_objective() -> std::result::Result<String, String> {
    let config = SystemConfig {
        num_devices: 8,
        num_antennas: 4,
        preamble_len: 12,
        max_delay: 2,
        tx_power: 1.0,
        noise_var: 1e-3,
        num_active: 3,
        path_loss_model: PathLossModel::Unit,
        rng_seed: 700,
        ..SystemConfig::default()
    };
    let sc = Scenario::generate(&config);
    let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
    let state = bcd_solve(
        &dict,
        sc.received.samples.view(),
        config.tx_power,
        0.5,
        &SolverOptions {
            check_monotone: true,
            rel_tol: 1e-8,
            ..SolverOptions::default()
        },
        None,
    );
    let trace = state.per_update_trace.as_ref().expect("trace requested");
    let mut prev = state.objective_trace[0];
    for &v in trace {
        if v > prev * (1.0 + 1e-10) {
            return Err(format!("objective rose from {prev} to {v}"));
        }
        prev = v;
    }
    Ok(format!("{} block updates, all non-increasing", trace.len()))
}

/// Noiseless single-device instances must be recovered exactly.
fn check_noiseless_recovery() -> std::result::Result<String, String> {
    for seed in [800u64, 801, 802] {
        let config = SystemConfig {
            num_devices: 10,
            num_antennas: 4,
            preamble_len: 16,
            max_delay: 3,
            tx_power: 1.0,
            noise_var: 0.0,
            num_active: 1,
            path_loss_model: PathLossModel::Unit,
            rng_seed: seed,
            ..SystemConfig::default()
        };
        let sc = Scenario::generate(&config);
        let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
        let res = solve_with_continuation(
            &dict,
            sc.received.samples.view(),
            config.tx_power,
            config.noise_var,
            Some(&sc.truth.path_gains),
            &ContinuationOptions {
                debias: true,
                ..ContinuationOptions::default()
            },
            &SolverOptions::default(),
        );
        let dev = sc.truth.active_set()[0];
        if res.active_set() != vec![dev] {
            return Err(format!("seed {seed}: wrong active set {:?}", res.active_set()));
        }
        if res.delays[dev] != Some(sc.truth.delays[dev]) {
            return Err(format!("seed {seed}: wrong delay {:?}", res.delays[dev]));
        }
    }
    Ok("3/3 seeds recovered exactly".into())
}

/// The same spec and seed must reproduce identical rows at different
/// parallelism degrees.
fn check_determinism() -> std::result::Result<String, String> {
    let spec = ExperimentSpec {
        config: SystemConfig {
            num_devices: 8,
            num_antennas: 4,
            preamble_len: 12,
            max_delay: 2,
            tx_power: 1.0,
            noise_var: 1e-6,
            num_active: 2,
            path_loss_model: PathLossModel::Unit,
            ..SystemConfig::default()
        },
        num_trials: 4,
        master_seed: 900,
        ..ExperimentSpec::default()
    };
    let rows = |jobs: usize| -> std::result::Result<Vec<String>, String> {
        let mut s = spec.clone();
        s.jobs = jobs;
        let records = run_experiment(&s).map_err(|e| e.to_string())?;
        Ok(records
            .iter()
            .flat_map(|r| r.trials.iter())
            .map(|t| serde_json::to_string(t).expect("row serializes"))
            .collect())
    };
    let serial = rows(1)?;
    let parallel = rows(4)?;
    if serial == parallel {
        Ok(format!("{} rows identical at jobs=1 and jobs=4", serial.len()))
    } else {
        Err("rows differ across parallelism degrees".into())
    }
}

/// Runs the whole suite.
pub fn run_selftest() -> SelftestReport {
    SelftestReport {
        checks: vec![
            run_check("scalar-block-update", check_scalar_update),
            run_check("block-update-optimality", check_update_optimality),
            run_check("solver-matches-reference", check_solver_against_reference),
            run_check("monotone-objective", check_monotone_objective),
            run_check("noiseless-recovery", check_noiseless_recovery),
            run_check("campaign-determinism", check_determinism),
        ],
    }
}
