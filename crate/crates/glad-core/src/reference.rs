//! Independent reference solver for verification.
//!
//! Solves the same convex objective as [`crate::solver`] with an accelerated
//! proximal-gradient method (FISTA with function-value restarts) on the
//! *dense* dictionary. It shares no iteration structure with the block
//! coordinate descent solver — first-order steps plus a block soft-threshold
//! prox instead of exact block minimization — so agreement between the two is
//! meaningful evidence of correctness.
//!
//! This module exists for tests and the built-in self-check. Production
//! solves go through [`crate::solver::bcd_solve`].

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dictionary::ExtendedDictionary;
use crate::linalg::norm_l2;
use crate::solver::objective;
use crate::{C64, Error, Result};

/// Knobs for one reference solve.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceOptions {
    /// Target on the first-order optimality residual (see
    /// [`optimality_residual`]), relative to rho.
    pub tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 50_000,
        }
    }
}

/// Result of a converged reference solve.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    /// Block estimates, one row per dictionary column.
    pub x_ext: Array2<C64>,
    /// Objective value at the solution.
    pub objective: f64,
    /// Iterations consumed.
    pub iters: usize,
    /// Final first-order optimality residual.
    pub opt_residual: f64,
}

/// Largest eigenvalue of A^H A by power iteration (deterministic start).
pub fn gram_spectral_radius(a: &Array2<C64>, iters: usize) -> f64 {
    let cols = a.ncols();
    let mut rng = ChaCha12Rng::seed_from_u64(0x9e3779b97f4a7c15);
    let mut v = Array1::from_shape_fn(cols, |_| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let ah = a.t().mapv(|z| z.conj());
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        let av = a.dot(&v);
        lambda = av.iter().map(|z| z.norm_sqr()).sum();
        let w = ah.dot(&av);
        let n = norm_l2(w.view());
        if n == 0.0 {
            return 0.0;
        }
        v = w.mapv(|z| z / n);
    }
    lambda
}

/// Block soft threshold: rows of `v` with norm below `thresh` become zero,
/// the rest shrink toward zero by `thresh`.
pub fn block_soft_threshold(v: &Array2<C64>, thresh: f64) -> Array2<C64> {
    let mut out = v.clone();
    for mut row in out.rows_mut() {
        let n = norm_l2(row.view());
        if n <= thresh {
            row.fill(C64::new(0.0, 0.0));
        } else {
            let scale = 1.0 - thresh / n;
            row.mapv_inplace(|z| z * scale);
        }
    }
    out
}

/// Worst-case violation of the first-order optimality conditions of the
/// group-sparse objective at `x`: with G = sqrt(p) A^H (Y - sqrt(p) A X),
/// a nonzero block requires G_b = rho * x_b / ||x_b|| and a zero block
/// requires ||G_b|| <= rho.
pub fn optimality_residual(
    a: &Array2<C64>,
    y: ArrayView2<'_, C64>,
    x: &Array2<C64>,
    tx_power: f64,
    rho: f64,
) -> f64 {
    let sqrt_p = tx_power.sqrt();
    let residual = &y.to_owned() - &a.dot(x).mapv(|z| z * sqrt_p);
    let g = a.t().mapv(|z| z.conj()).dot(&residual).mapv(|z| z * sqrt_p);
    let mut worst = 0.0f64;
    for (gb, xb) in g.rows().into_iter().zip(x.rows()) {
        let xn = norm_l2(xb.view());
        if xn > 0.0 {
            let miss = gb
                .iter()
                .zip(xb.iter())
                .map(|(&gm, &xm)| (gm - xm * (rho / xn)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(miss);
        } else {
            worst = worst.max((norm_l2(gb.view()) - rho).max(0.0));
        }
    }
    worst
}

/// Accelerated proximal gradient (FISTA) on the dense dictionary, run until
/// the optimality residual drops below `opts.tol * rho`.
pub fn proximal_gradient_solve(
    dict: &ExtendedDictionary,
    y: ArrayView2<'_, C64>,
    tx_power: f64,
    rho: f64,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    assert!(rho > 0.0 && tx_power > 0.0);
    let a = dict.dense();
    let ah = a.t().mapv(|z| z.conj()).to_owned();
    let sqrt_p = tx_power.sqrt();
    let cols = a.ncols();
    let m = y.ncols();

    // Conservative step size from a safety-margined Lipschitz constant.
    let lip = tx_power * gram_spectral_radius(&a, 200) * 1.02;
    if lip == 0.0 {
        return Ok(ReferenceSolution {
            x_ext: Array2::zeros((cols, m)),
            objective: 0.5 * crate::linalg::frob_norm_sq(y),
            iters: 0,
            opt_residual: 0.0,
        });
    }
    let step = 1.0 / lip;

    let y_owned = y.to_owned();
    let mut x = Array2::<C64>::zeros((cols, m));
    let mut z = x.clone();
    let mut theta = 1.0f64;
    let mut prev_obj = f64::INFINITY;
    let tol = opts.tol * rho;

    for it in 1..=opts.max_iters {
        // Gradient of the quadratic part at z.
        let fit = &y_owned - &a.dot(&z).mapv(|v| v * sqrt_p);
        let grad = ah.dot(&fit).mapv(|v| v * (-sqrt_p));
        let x_new = block_soft_threshold(&(&z - &grad.mapv(|v| v * step)), step * rho);

        let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_new;
        z = &x_new + &(&x_new - &x).mapv(|v| v * momentum);
        x = x_new;
        theta = theta_new;

        // Function-value restart keeps acceleration stable.
        let obj = objective(dict, y, x.view(), tx_power, rho);
        if obj > prev_obj {
            theta = 1.0;
            z = x.clone();
        }
        prev_obj = obj;

        if it % 10 == 0 || it == opts.max_iters {
            let res = optimality_residual(&a, y, &x, tx_power, rho);
            if res <= tol {
                return Ok(ReferenceSolution {
                    x_ext: x,
                    objective: obj,
                    iters: it,
                    opt_residual: res,
                });
            }
        }
    }
    Err(Error::ReferenceNotConverged(format!(
        "optimality residual above {tol:e} after {} iterations",
        opts.max_iters
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        generate_preambles, scenario_stream, PathLossModel, PreambleBook, Scenario, SystemConfig,
        STREAM_PREAMBLES,
    };
    use crate::solver::{bcd_solve, SolverOptions};
    use ndarray::array;

    #[test]
    fn spectral_radius_of_diagonal_matrix() {
        let a = array![
            [C64::new(3.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(2.0, 0.0)],
        ];
        let lambda = gram_spectral_radius(&a, 100);
        assert!((lambda - 9.0).abs() <= 1e-9, "got {lambda}");
    }

    #[test]
    fn soft_threshold_hand_values() {
        let v = array![
            [C64::new(3.0, 0.0), C64::new(4.0, 0.0)], // norm 5
            [C64::new(0.3, 0.0), C64::new(0.0, 0.4)], // norm 0.5
        ];
        let out = block_soft_threshold(&v, 1.0);
        // Row 0 shrinks by factor (1 - 1/5) = 0.8; row 1 zeroes out.
        assert!((out[[0, 0]] - C64::new(2.4, 0.0)).norm() <= 1e-12);
        assert!((out[[0, 1]] - C64::new(3.2, 0.0)).norm() <= 1e-12);
        assert!(out.row(1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn scalar_problem_reaches_hand_computed_minimum() {
        let book = PreambleBook::new(array![[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]]);
        let dict = ExtendedDictionary::new(book, 0);
        let y = array![[C64::new(2.0, 0.0)], [C64::new(2.0, 0.0)]];
        let sol =
            proximal_gradient_solve(&dict, y.view(), 1.0, 1.0, &ReferenceOptions::default())
                .unwrap();
        assert!((sol.x_ext[[0, 0]] - C64::new(1.5, 0.0)).norm() <= 1e-8);
    }

    #[test]
    fn matches_coordinate_descent_on_random_instances() {
        for seed in 0..3 {
            let config = SystemConfig {
                num_devices: 6,
                num_antennas: 4,
                preamble_len: 12,
                max_delay: 2,
                tx_power: 0.7,
                noise_var: 1e-3,
                num_active: 2,
                path_loss_model: PathLossModel::Unit,
                rng_seed: 40 + seed,
                ..SystemConfig::default()
            };
            let sc = Scenario::generate(&config);
            let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
            let rho = 0.5;

            let reference = proximal_gradient_solve(
                &dict,
                sc.received.samples.view(),
                config.tx_power,
                rho,
                &ReferenceOptions::default(),
            )
            .unwrap();
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
            let rel = (bcd.final_objective() - reference.objective).abs()
                / reference.objective.max(1e-300);
            assert!(
                rel <= 1e-6,
                "seed {seed}: BCD vs reference objective gap {rel:e}"
            );
        }
    }

    #[test]
    fn zero_data_is_trivially_optimal() {
        let config = SystemConfig {
            num_devices: 2,
            preamble_len: 4,
            max_delay: 1,
            ..SystemConfig::default()
        };
        let book =
            generate_preambles(&config, &mut scenario_stream(1, STREAM_PREAMBLES));
        let dict = ExtendedDictionary::new(book, config.max_delay);
        let y = Array2::<C64>::zeros((dict.num_rows(), 3));
        let sol =
            proximal_gradient_solve(&dict, y.view(), 1.0, 0.5, &ReferenceOptions::default())
                .unwrap();
        assert!(sol.x_ext.iter().all(|z| z.norm() == 0.0));
        assert!(sol.objective == 0.0);
    }

    #[test]
    fn final_residual_meets_tolerance() {
        let config = SystemConfig {
            num_devices: 4,
            num_antennas: 3,
            preamble_len: 8,
            max_delay: 1,
            tx_power: 1.0,
            noise_var: 1e-3,
            num_active: 2,
            path_loss_model: PathLossModel::Unit,
            rng_seed: 77,
            ..SystemConfig::default()
        };
        let sc = Scenario::generate(&config);
        let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
        let opts = ReferenceOptions::default();
        let sol = proximal_gradient_solve(
            &dict,
            sc.received.samples.view(),
            config.tx_power,
            0.4,
            &opts,
        )
        .unwrap();
        assert!(sol.opt_residual <= opts.tol * 0.4);
    }
}
