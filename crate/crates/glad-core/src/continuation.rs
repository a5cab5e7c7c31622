//! Penalty continuation and detection readout.
//!
//! A single solve of the group-sparse problem does not by itself enforce the
//! physical constraint that each device transmits with at most one delay.
//! This module wraps the solver in an outer loop: solve at the current
//! penalty `rho`, zero out blocks whose per-antenna power falls below a
//! fraction of the device's large-scale gain, and check the one-delay-per-
//! device constraint. While violated, `rho` grows geometrically (sparsifying
//! the next solution, warm-started from the current one) and the loop
//! repeats. The surviving blocks then map directly to activity, delay, and
//! channel estimates.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dictionary::{BlockId, ExtendedDictionary};
use crate::linalg::{norm_l2, solve_linear};
use crate::solver::{bcd_solve, SolverOptions};
use crate::C64;

/// Fraction of the all-zero-solution penalty bound used for the default
/// initial rho.
pub const DEFAULT_RHO_FRACTION: f64 = 0.05;

/// When gains are known, the default rho is capped at this fraction of the
/// weakest device's nominal matched-filter response `p L sqrt(M alpha_min)`,
/// so that no device's signal falls below the solver's keep/zero threshold.
/// The slack covers channel-fading dips below the nominal response.
pub const DETECT_CAP_FRACTION: f64 = 0.25;

/// The default rho never drops below this multiple of the noise correlation
/// floor `sqrt(p) sqrt(L M sigma^2)`, which keeps pure-noise blocks out of
/// the solution.
pub const NOISE_FLOOR_MULT: f64 = 2.0;

/// Where the thresholding step gets the per-device large-scale gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// The receiver knows each device's gain (the usual assumption).
    #[default]
    Known,
    /// Estimate each gain from the strongest block of the device.
    Estimated,
}

/// Knobs for the continuation loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationOptions {
    /// Starting penalty. `None` scales [`DEFAULT_RHO_FRACTION`] (or
    /// `rho_fraction`) by the data-dependent bound above which the all-zero
    /// solution is optimal.
    pub rho_initial: Option<f64>,
    /// Fraction of the all-zero bound used when `rho_initial` is `None`.
    pub rho_fraction: f64,
    /// Geometric growth factor applied to rho between rounds; must be > 1.
    pub growth_factor: f64,
    /// Keep a block only if its per-antenna power is at least this fraction
    /// of the device's gain; in (0, 1).
    pub sparsity_threshold: f64,
    /// Rounds before feasibility is forced.
    pub max_outer_rounds: usize,
    /// Refit surviving channel estimates by least squares to undo the
    /// shrinkage bias of the penalized solve.
    pub debias: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            rho_initial: None,
            rho_fraction: DEFAULT_RHO_FRACTION,
            growth_factor: 1.5,
            sparsity_threshold: 0.1,
            max_outer_rounds: 30,
            debias: false,
        }
    }
}

impl ContinuationOptions {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.growth_factor > 1.0) {
            return Err(crate::Error::InvalidConfig(
                "growth_factor must exceed 1".into(),
            ));
        }
        if !(self.sparsity_threshold > 0.0 && self.sparsity_threshold < 1.0) {
            return Err(crate::Error::InvalidConfig(
                "sparsity_threshold must lie in (0, 1)".into(),
            ));
        }
        if self.max_outer_rounds == 0 {
            return Err(crate::Error::InvalidConfig(
                "max_outer_rounds must be >= 1".into(),
            ));
        }
        if let Some(r) = self.rho_initial {
            if !(r > 0.0) {
                return Err(crate::Error::InvalidConfig(
                    "rho_initial must be positive".into(),
                ));
            }
        }
        if !(self.rho_fraction > 0.0) {
            return Err(crate::Error::InvalidConfig(
                "rho_fraction must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Joint activity/delay/channel estimate for every device.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Estimated activity per device.
    pub activity: Vec<bool>,
    /// Estimated delay per device; `None` for devices declared inactive.
    pub delays: Vec<Option<usize>>,
    /// Estimated channels, one row per device (zero rows when inactive).
    pub channels: Array2<C64>,
    /// Activity-and-delay indicators, device by shift.
    pub indicators: Array2<bool>,
    /// Penalty at which the accepted solution was computed.
    pub rho_final: f64,
    /// Continuation rounds consumed.
    pub rounds_used: usize,
    /// True when the round budget ran out and feasibility was imposed by
    /// keeping one block per device.
    pub forced_feasibility: bool,
    /// False if any inner solve hit its sweep cap before its tolerance.
    pub solver_converged: bool,
}

impl DetectionResult {
    pub fn num_devices(&self) -> usize {
        self.activity.len()
    }

    pub fn active_set(&self) -> Vec<usize> {
        self.activity
            .iter()
            .enumerate()
            .filter_map(|(n, &a)| a.then_some(n))
            .collect()
    }
}

/// The penalty above which the all-zero solution is optimal:
/// sqrt(p) * max over blocks of the matched-filter norm against Y.
pub fn zero_solution_bound(
    dict: &ExtendedDictionary,
    y: ArrayView2<'_, C64>,
    tx_power: f64,
) -> f64 {
    let mut c = Array1::<C64>::zeros(y.ncols());
    let mut max_norm = 0.0f64;
    for id in dict.blocks() {
        dict.correlate(id, y, &mut c);
        max_norm = max_norm.max(norm_l2(c.view()));
    }
    tx_power.sqrt() * max_norm
}

/// The default starting penalty.
///
/// Baseline: `rho_fraction` times the bound from [`zero_solution_bound`],
/// which keys the penalty to the strongest response in the data. Two guards
/// correct its failure modes:
///
/// * with known gains, the baseline is capped so the weakest device in the
///   cell still clears the solver's keep/zero threshold (large path-loss
///   spreads would otherwise suppress far devices);
/// * with noise, the result is floored just above the noise correlation
///   level so pure-noise blocks stay out.
pub fn default_rho(
    dict: &ExtendedDictionary,
    y: ArrayView2<'_, C64>,
    tx_power: f64,
    noise_var: f64,
    gains: Option<&[f64]>,
    rho_fraction: f64,
) -> f64 {
    let l = dict.preamble_len() as f64;
    let m = y.ncols() as f64;
    let mut rho = rho_fraction * zero_solution_bound(dict, y, tx_power);
    if let Some(g) = gains {
        let min_gain = g.iter().copied().fold(f64::INFINITY, f64::min);
        if min_gain.is_finite() && min_gain > 0.0 {
            let weakest_response = tx_power * l * (m * min_gain).sqrt();
            rho = rho.min(DETECT_CAP_FRACTION * weakest_response);
        }
    }
    if noise_var > 0.0 {
        let noise_floor = tx_power.sqrt() * (l * m * noise_var).sqrt();
        rho = rho.max(NOISE_FLOOR_MULT * noise_floor);
    }
    rho
}

/// Per-device gain estimates from the solution itself: the strongest
/// per-antenna block power of each device.
pub fn estimate_gains(dict: &ExtendedDictionary, x_ext: ArrayView2<'_, C64>) -> Vec<f64> {
    let m = x_ext.ncols() as f64;
    let mut gains = vec![0.0f64; dict.num_devices()];
    for id in dict.blocks() {
        let power = x_ext
            .row(dict.col_index(id))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / m;
        if power > gains[id.device] {
            gains[id.device] = power;
        }
    }
    gains
}

/// Zeroes every block whose per-antenna power `||x||^2 / M` falls below
/// `zeta * gain(device)`. Returns the filtered copy.
pub fn threshold_blocks(
    dict: &ExtendedDictionary,
    x_ext: ArrayView2<'_, C64>,
    gains: &[f64],
    zeta: f64,
) -> Array2<C64> {
    assert_eq!(gains.len(), dict.num_devices(), "one gain per device");
    let m = x_ext.ncols() as f64;
    let mut out = x_ext.to_owned();
    for id in dict.blocks() {
        let col = dict.col_index(id);
        let power = out.row(col).iter().map(|z| z.norm_sqr()).sum::<f64>() / m;
        if power < zeta * gains[id.device] {
            out.row_mut(col).fill(C64::new(0.0, 0.0));
        }
    }
    out
}

/// True iff every device has at most one nonzero block across its shifts.
pub fn check_group_constraint(dict: &ExtendedDictionary, x_ext: ArrayView2<'_, C64>) -> bool {
    let mut seen = vec![false; dict.num_devices()];
    for id in dict.blocks() {
        let nonzero = x_ext
            .row(dict.col_index(id))
            .iter()
            .any(|z| z.norm_sqr() > 0.0);
        if nonzero {
            if seen[id.device] {
                return false;
            }
            seen[id.device] = true;
        }
    }
    true
}

/// Imposes the one-block-per-device constraint by keeping, for each device
/// with several surviving blocks, only the one with the largest norm (ties
/// broken toward the smallest shift).
pub fn force_feasible(dict: &ExtendedDictionary, x_ext: ArrayView2<'_, C64>) -> Array2<C64> {
    let mut out = x_ext.to_owned();
    for device in 0..dict.num_devices() {
        let mut best: Option<(usize, f64)> = None;
        for shift in 0..=dict.max_delay() {
            let col = dict.col_index(BlockId { device, shift });
            let n = norm_l2(out.row(col));
            if n > 0.0 {
                let better = match best {
                    // Strict inequality keeps the earlier (smaller) shift on ties.
                    Some((_, best_n)) => n > best_n,
                    None => true,
                };
                if better {
                    best = Some((shift, n));
                }
            }
        }
        if let Some((keep, _)) = best {
            for shift in 0..=dict.max_delay() {
                if shift != keep {
                    let col = dict.col_index(BlockId { device, shift });
                    out.row_mut(col).fill(C64::new(0.0, 0.0));
                }
            }
        }
    }
    out
}

/// Replaces the surviving block values with the unpenalized least-squares
/// fit of Y on the detected columns, removing shrinkage bias. Falls back to
/// the input values if the detected columns are linearly dependent.
pub fn debias_blocks(
    dict: &ExtendedDictionary,
    y: ArrayView2<'_, C64>,
    x_ext: ArrayView2<'_, C64>,
    tx_power: f64,
) -> Array2<C64> {
    let support: Vec<BlockId> = dict
        .blocks()
        .filter(|&id| {
            x_ext
                .row(dict.col_index(id))
                .iter()
                .any(|z| z.norm_sqr() > 0.0)
        })
        .collect();
    if support.is_empty() {
        return x_ext.to_owned();
    }

    let k = support.len();
    let rows = dict.num_rows();
    let mut a_s = Array2::<C64>::zeros((rows, k));
    for (j, &id) in support.iter().enumerate() {
        a_s.column_mut(j).assign(&dict.column(id));
    }
    let a_s_h = a_s.t().mapv(|z| z.conj());
    let gram = a_s_h.dot(&a_s);
    let rhs = a_s_h.dot(&y.to_owned());
    match solve_linear(&gram, &rhs) {
        Ok(z) => {
            let inv_sqrt_p = 1.0 / tx_power.sqrt();
            let mut out = x_ext.to_owned();
            for (j, &id) in support.iter().enumerate() {
                let col = dict.col_index(id);
                for (o, &v) in out.row_mut(col).iter_mut().zip(z.row(j).iter()) {
                    *o = v * inv_sqrt_p;
                }
            }
            out
        }
        Err(_) => x_ext.to_owned(),
    }
}

/// Maps a feasible block set to per-device estimates.
///
/// Panics if any device has more than one nonzero block; run the blocks
/// through [`force_feasible`] or the continuation loop first.
pub fn read_out(
    dict: &ExtendedDictionary,
    x_ext: ArrayView2<'_, C64>,
    rho_final: f64,
    rounds_used: usize,
    forced_feasibility: bool,
    solver_converged: bool,
) -> DetectionResult {
    let n = dict.num_devices();
    let m = x_ext.ncols();
    let shifts = dict.shifts_per_device();

    let mut activity = vec![false; n];
    let mut delays: Vec<Option<usize>> = vec![None; n];
    let mut channels = Array2::<C64>::zeros((n, m));
    let mut indicators = Array2::<bool>::from_elem((n, shifts), false);

    for id in dict.blocks() {
        let row = x_ext.row(dict.col_index(id));
        if row.iter().any(|z| z.norm_sqr() > 0.0) {
            assert!(
                !activity[id.device],
                "device {} has several nonzero blocks; the block set is infeasible",
                id.device
            );
            activity[id.device] = true;
            delays[id.device] = Some(id.shift);
            indicators[[id.device, id.shift]] = true;
            channels.row_mut(id.device).assign(&row);
        }
    }

    DetectionResult {
        activity,
        delays,
        channels,
        indicators,
        rho_final,
        rounds_used,
        forced_feasibility,
        solver_converged,
    }
}

/// Full detection pipeline: penalty continuation over repeated solves, power
/// thresholding, feasibility check, optional debias, readout.
///
/// `gains` supplies the per-device large-scale gains when the receiver knows
/// them; pass `None` to estimate them from each round's solution.
/// `noise_var` informs the default penalty choice only; pass the receiver's
/// noise variance (zero is fine).
pub fn solve_with_continuation(
    dict: &ExtendedDictionary,
    y: ArrayView2<'_, C64>,
    tx_power: f64,
    noise_var: f64,
    gains: Option<&[f64]>,
    copts: &ContinuationOptions,
    sopts: &SolverOptions,
) -> DetectionResult {
    copts.validate().expect("invalid continuation options");
    if let Some(g) = gains {
        assert_eq!(g.len(), dict.num_devices(), "one gain per device");
    }

    let mut rho = copts
        .rho_initial
        .unwrap_or_else(|| default_rho(dict, y, tx_power, noise_var, gains, copts.rho_fraction))
        // The data bound is zero exactly when Y is zero; any positive rho
        // then yields the all-zero solution immediately.
        .max(f64::MIN_POSITIVE);

    let mut warm: Option<Array2<C64>> = None;
    let mut solver_converged = true;

    for round in 1..=copts.max_outer_rounds {
        let state = bcd_solve(
            dict,
            y,
            tx_power,
            rho,
            sopts,
            warm.as_ref().map(|w| w.view()),
        );
        solver_converged &= state.converged;

        let gain_vec: Vec<f64> = match gains {
            Some(g) => g.to_vec(),
            None => estimate_gains(dict, state.x_ext.view()),
        };
        let kept = threshold_blocks(dict, state.x_ext.view(), &gain_vec, copts.sparsity_threshold);

        if check_group_constraint(dict, kept.view()) {
            let final_blocks = if copts.debias {
                debias_blocks(dict, y, kept.view(), tx_power)
            } else {
                kept
            };
            return read_out(dict, final_blocks.view(), rho, round, false, solver_converged);
        }

        if round == copts.max_outer_rounds {
            let forced = force_feasible(dict, kept.view());
            let final_blocks = if copts.debias {
                debias_blocks(dict, y, forced.view(), tx_power)
            } else {
                forced
            };
            return read_out(dict, final_blocks.view(), rho, round, true, solver_converged);
        }

        // Un-thresholded solution seeds the next, sparser solve.
        warm = Some(state.x_ext);
        rho *= copts.growth_factor;
    }
    unreachable!("loop always returns by max_outer_rounds");
}
