//! The extended dictionary of delay-shifted preambles.
//!
//! Unknown delays are absorbed into the measurement matrix: each device
//! contributes `tau_max + 1` columns, one per candidate shift. Column
//! `(n, tau)` is the device-n preamble preceded by `tau` zeros and followed
//! by `tau_max - tau` zeros, so every column has length `L + tau_max` and
//! squared norm exactly L.
//!
//! The solver never materializes the dense matrix: all products reduce to
//! windowed length-L operations provided here ([`ExtendedDictionary::correlate`],
//! [`ExtendedDictionary::add_outer`]). [`ExtendedDictionary::dense`] exists for
//! oracles and small-scale verification.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2};

use crate::model::PreambleBook;
use crate::C64;

/// Identifies one column of the extended dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId {
    /// Device index n.
    pub device: usize,
    /// Candidate shift tau.
    pub shift: usize,
}

/// Delay-shifted preamble dictionary with windowed kernels.
#[derive(Debug, Clone)]
pub struct ExtendedDictionary {
    preambles: PreambleBook,
    max_delay: usize,
}

impl ExtendedDictionary {
    pub fn new(preambles: PreambleBook, max_delay: usize) -> Self {
        Self {
            preambles,
            max_delay,
        }
    }

    pub fn preambles(&self) -> &PreambleBook {
        &self.preambles
    }

    pub fn num_devices(&self) -> usize {
        self.preambles.num_devices()
    }

    pub fn preamble_len(&self) -> usize {
        self.preambles.preamble_len()
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    /// Number of shift hypotheses per device, tau_max + 1.
    pub fn shifts_per_device(&self) -> usize {
        self.max_delay + 1
    }

    /// Total column count, N * (tau_max + 1).
    pub fn num_columns(&self) -> usize {
        self.num_devices() * self.shifts_per_device()
    }

    /// Rows of the dictionary, L + tau_max.
    pub fn num_rows(&self) -> usize {
        self.preamble_len() + self.max_delay
    }

    /// Column layout: device-major, shift-minor.
    pub fn col_index(&self, id: BlockId) -> usize {
        debug_assert!(id.device < self.num_devices());
        debug_assert!(id.shift <= self.max_delay);
        id.device * self.shifts_per_device() + id.shift
    }

    /// Inverse of [`Self::col_index`].
    pub fn block_of(&self, col: usize) -> BlockId {
        debug_assert!(col < self.num_columns());
        let s = self.shifts_per_device();
        BlockId {
            device: col / s,
            shift: col % s,
        }
    }

    /// Iterates all blocks in column order.
    pub fn blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        let s = self.shifts_per_device();
        (0..self.num_columns()).map(move |col| BlockId {
            device: col / s,
            shift: col % s,
        })
    }

    /// The dense zero-padded column for `id`, length L + tau_max.
    pub fn column(&self, id: BlockId) -> Array1<C64> {
        let mut col = Array1::<C64>::zeros(self.num_rows());
        let a = self.preambles.device(id.device);
        for (dl, &al) in a.iter().enumerate() {
            col[id.shift + dl] = al;
        }
        col
    }

    /// The full (L + tau_max) x N(tau_max + 1) matrix. Intended for oracles
    /// and small problems only; the solver works through the windowed kernels.
    pub fn dense(&self) -> Array2<C64> {
        let mut a = Array2::<C64>::zeros((self.num_rows(), self.num_columns()));
        for id in self.blocks() {
            let col = self.col_index(id);
            a.column_mut(col).assign(&self.column(id));
        }
        a
    }

    /// Correlation of one column against a signal: c = a_bar(id)^H Y,
    /// a length-M vector. Zero padding means only rows
    /// `id.shift .. id.shift + L` of `Y` participate.
    pub fn correlate(&self, id: BlockId, y: ArrayView2<'_, C64>, out: &mut Array1<C64>) {
        debug_assert_eq!(y.nrows(), self.num_rows());
        debug_assert_eq!(out.len(), y.ncols());
        out.fill(C64::new(0.0, 0.0));
        let a = self.preambles.device(id.device);
        for (dl, &al) in a.iter().enumerate() {
            let ac = al.conj();
            let row = y.row(id.shift + dl);
            // Contiguous fast path; the generic iterator handles the rest.
            match (row.as_slice(), out.as_slice_mut()) {
                (Some(rs), Some(os)) => {
                    for (o, &r) in os.iter_mut().zip(rs) {
                        *o += ac * r;
                    }
                }
                _ => {
                    for (o, &r) in out.iter_mut().zip(row.iter()) {
                        *o += ac * r;
                    }
                }
            }
        }
    }

    /// Rank-1 window update: Y += scale * a_bar(id) * x^T (x transposed,
    /// not conjugated). Touches only rows `id.shift .. id.shift + L`.
    pub fn add_outer(
        &self,
        id: BlockId,
        scale: f64,
        x: ArrayView1<'_, C64>,
        mut y: ArrayViewMut2<'_, C64>,
    ) {
        debug_assert_eq!(y.nrows(), self.num_rows());
        debug_assert_eq!(x.len(), y.ncols());
        let a = self.preambles.device(id.device);
        for (dl, &al) in a.iter().enumerate() {
            let coef = al * scale;
            let row = y.row_mut(id.shift + dl);
            match (row.into_slice(), x.as_slice()) {
                (Some(rs), Some(xs)) => {
                    for (r, &xm) in rs.iter_mut().zip(xs) {
                        *r += coef * xm;
                    }
                }
                _ => unreachable!("row-major storage guarantees contiguous rows"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_preambles, scenario_stream, SystemConfig, STREAM_PREAMBLES};
    use ndarray::Array2;
    use rand::Rng;

    fn dictionary(n: usize, l: usize, tau_max: usize, seed: u64) -> ExtendedDictionary {
        let config = SystemConfig {
            num_devices: n,
            preamble_len: l,
            max_delay: tau_max,
            num_active: 0,
            ..SystemConfig::default()
        };
        let book = generate_preambles(&config, &mut scenario_stream(seed, STREAM_PREAMBLES));
        ExtendedDictionary::new(book, tau_max)
    }

    fn random_signal(rows: usize, cols: usize, seed: u64) -> Array2<C64> {
        let mut rng = scenario_stream(seed, 77);
        Array2::from_shape_fn((rows, cols), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn column_layout_is_device_major() {
        let dict = dictionary(3, 4, 2, 1);
        assert_eq!(dict.num_columns(), 9);
        assert_eq!(dict.num_rows(), 6);
        // Device 1, shift 0 follows device 0, shift tau_max.
        assert_eq!(dict.col_index(BlockId { device: 0, shift: 2 }), 2);
        assert_eq!(dict.col_index(BlockId { device: 1, shift: 0 }), 3);
        assert_eq!(dict.col_index(BlockId { device: 2, shift: 1 }), 7);
        for col in 0..dict.num_columns() {
            assert_eq!(dict.col_index(dict.block_of(col)), col);
        }
    }

    #[test]
    fn columns_are_zero_padded_shifts() {
        let dict = dictionary(2, 3, 2, 5);
        for id in dict.blocks() {
            let col = dict.column(id);
            assert_eq!(col.len(), 5);
            let a = dict.preambles().device(id.device);
            for j in 0..col.len() {
                if j < id.shift || j >= id.shift + 3 {
                    assert_eq!(col[j], C64::new(0.0, 0.0), "padding must be zero");
                } else {
                    assert_eq!(col[j], a[j - id.shift]);
                }
            }
        }
    }

    #[test]
    fn every_column_has_squared_norm_l() {
        let dict = dictionary(4, 7, 3, 2);
        for id in dict.blocks() {
            let norm_sq: f64 = dict.column(id).iter().map(|z| z.norm_sqr()).sum();
            assert!(
                (norm_sq - 7.0).abs() <= 1e-12,
                "{id:?}: ||a_bar||^2 = {norm_sq}"
            );
        }
    }

    #[test]
    fn dense_matches_columns() {
        let dict = dictionary(3, 4, 2, 3);
        let a = dict.dense();
        assert_eq!(a.nrows(), dict.num_rows());
        assert_eq!(a.ncols(), dict.num_columns());
        for id in dict.blocks() {
            let col = dict.column(id);
            for (j, &v) in col.iter().enumerate() {
                assert_eq!(a[[j, dict.col_index(id)]], v);
            }
        }
    }

    #[test]
    fn correlate_matches_dense_product() {
        let dict = dictionary(3, 5, 2, 9);
        let y = random_signal(dict.num_rows(), 4, 10);
        let dense = dict.dense();
        let mut c = Array1::<C64>::zeros(4);
        for id in dict.blocks() {
            dict.correlate(id, y.view(), &mut c);
            // Oracle: full-length inner product against the dense column.
            let col = dense.column(dict.col_index(id));
            for m in 0..4 {
                let expect: C64 = col
                    .iter()
                    .zip(y.column(m).iter())
                    .map(|(&a, &yv)| a.conj() * yv)
                    .sum();
                assert!((c[m] - expect).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn add_outer_matches_dense_rank1_update() {
        let dict = dictionary(2, 4, 3, 11);
        let mut y = random_signal(dict.num_rows(), 3, 12);
        let x = Array1::from_vec(vec![
            C64::new(0.3, -1.1),
            C64::new(-0.4, 0.2),
            C64::new(1.5, 0.9),
        ]);
        let id = BlockId { device: 1, shift: 2 };

        let mut oracle = y.clone();
        let col = dict.column(id);
        for j in 0..dict.num_rows() {
            for m in 0..3 {
                oracle[[j, m]] += col[j] * x[m] * 0.7;
            }
        }

        dict.add_outer(id, 0.7, x.view(), y.view_mut());
        let err = y
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-12);
    }

    #[test]
    fn correlate_sees_only_its_window() {
        let dict = dictionary(1, 3, 2, 13);
        let mut y = Array2::<C64>::zeros((dict.num_rows(), 2));
        // Energy only in the last row; shift 0 and 1 windows exclude it.
        y[[4, 0]] = C64::new(3.0, -2.0);
        let mut c = Array1::<C64>::zeros(2);
        for shift in 0..2 {
            dict.correlate(BlockId { device: 0, shift }, y.view(), &mut c);
            assert!(c.iter().all(|z| z.norm() == 0.0), "shift {shift}");
        }
        dict.correlate(BlockId { device: 0, shift: 2 }, y.view(), &mut c);
        assert!(c[0].norm() > 0.0);
    }
}
