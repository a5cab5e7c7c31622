//! Small complex linear-algebra helpers shared across modules.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::{C64, Error, Result};

/// Euclidean norm of a complex vector.
pub fn norm_l2(v: ArrayView1<'_, C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Squared Frobenius norm of a complex matrix.
pub fn frob_norm_sq(a: ArrayView2<'_, C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Solves A X = B for a square complex A via Gaussian elimination with
/// partial pivoting. Intended for the small systems that appear in
/// least-squares refits (tens of unknowns), not large-scale work.
pub fn solve_linear(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "solve_linear requires a square matrix");
    assert_eq!(b.nrows(), n, "right-hand side has {} rows, need {n}", b.nrows());
    let m = b.ncols();

    let mut lu = a.clone();
    let mut x = b.clone();

    for k in 0..n {
        // Pivot on the largest remaining entry in column k.
        let (pivot_row, pivot_mag) = (k..n)
            .map(|r| (r, lu[[r, k]].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty pivot range");
        if pivot_mag < 1e-300 {
            return Err(Error::SingularSystem);
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap([k, j], [pivot_row, j]);
            }
            for j in 0..m {
                x.swap([k, j], [pivot_row, j]);
            }
        }
        let pivot = lu[[k, k]];
        for r in (k + 1)..n {
            let factor = lu[[r, k]] / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in k..n {
                let v = lu[[k, j]];
                lu[[r, j]] -= factor * v;
            }
            for j in 0..m {
                let v = x[[k, j]];
                x[[r, j]] -= factor * v;
            }
        }
    }

    // Back substitution.
    for k in (0..n).rev() {
        let pivot = lu[[k, k]];
        for j in 0..m {
            let mut s = x[[k, j]];
            for r in (k + 1)..n {
                s -= lu[[k, r]] * x[[r, j]];
            }
            x[[k, j]] = s / pivot;
        }
    }
    Ok(x)
}

/// Convenience single-RHS wrapper for [`solve_linear`].
pub fn solve_linear_vec(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    let n = b.len();
    let b2 = b.clone().into_shape_with_order((n, 1)).expect("reshape");
    let x = solve_linear(a, &b2)?;
    Ok(x.column(0).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_matrix(n: usize, m: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, m), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn norms_match_hand_values() {
        let v = array![C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
        assert!((norm_l2(v.view()) - 5.0).abs() <= 1e-15);
        let a = array![[C64::new(1.0, 1.0)], [C64::new(2.0, 0.0)]];
        assert!((frob_norm_sq(a.view()) - 6.0).abs() <= 1e-15);
    }

    #[test]
    fn solve_recovers_known_solution() {
        for seed in 0..5 {
            let n = 8;
            // Diagonally dominated shift keeps the system well conditioned.
            let mut a = random_matrix(n, n, seed);
            for k in 0..n {
                a[[k, k]] += C64::new(4.0, 0.0);
            }
            let x_true = random_matrix(n, 3, seed + 100);
            let b = a.dot(&x_true);
            let x = solve_linear(&a, &b).unwrap();
            let err = (&x - &x_true)
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            assert!(err <= 1e-10, "seed {seed}: max err {err:e}");
        }
    }

    #[test]
    fn solve_requires_pivoting() {
        // Zero in the (0,0) position forces a row swap.
        let a = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        ];
        let b = array![C64::new(2.0, 0.0), C64::new(3.0, 0.0)];
        let x = solve_linear_vec(&a, &b).unwrap();
        assert!((x[0] - C64::new(1.0, 0.0)).norm() <= 1e-12);
        assert!((x[1] - C64::new(2.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn solve_rejects_singular_systems() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            [C64::new(2.0, 0.0), C64::new(4.0, 0.0)],
        ];
        let b = array![C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        assert!(matches!(
            solve_linear_vec(&a, &b),
            Err(Error::SingularSystem)
        ));
    }
}
