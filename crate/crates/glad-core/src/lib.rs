//! Joint device activity detection, delay estimation, and channel estimation
//! for asynchronous grant-free random access.
//!
//! Many low-rate devices share one base station; only a few are active per
//! coherence block, and each active device's known preamble arrives delayed
//! by an unknown integer number of symbols. Stacking every delayed copy of
//! every preamble into one extended dictionary turns the joint detection
//! problem into a group-sparse recovery problem, solved here by cyclic exact
//! block minimization (each block update is a closed-form matched filter plus
//! hard shrink) inside a geometric penalty-continuation loop.
//!
//! Modules:
//! - [`model`] — synthetic scenarios: preambles, activity, delays, channels, noise
//! - [`dictionary`] — shifted preambles, the extended dictionary, windowed kernels
//! - [`solver`] — the block coordinate descent group-LASSO solver
//! - [`continuation`] — penalty path, power thresholding, activity readout
//! - [`metrics`] — detection error / missed detection / false alarm scoring
//! - [`harness`] — seeded Monte Carlo campaigns and plot-data export
//! - [`reference`] — slow dense cross-checks (tests and `selftest` only)
//!
//! End to end, on a generated scenario:
//!
//! ```
//! use glad_core::continuation::{solve_with_continuation, ContinuationOptions};
//! use glad_core::dictionary::ExtendedDictionary;
//! use glad_core::model::{Scenario, SystemConfig};
//! use glad_core::solver::SolverOptions;
//!
//! let config = SystemConfig {
//!     num_devices: 20,
//!     num_antennas: 8,
//!     num_active: 2,
//!     ..SystemConfig::default()
//! };
//! let sc = Scenario::generate(&config);
//! let dict = ExtendedDictionary::new(sc.preambles.clone(), config.max_delay);
//! let result = solve_with_continuation(
//!     &dict,
//!     sc.received.samples.view(),
//!     config.tx_power,
//!     config.noise_var,
//!     Some(sc.truth.path_gains.as_slice()), // None => estimate gains
//!     &ContinuationOptions::default(),
//!     &SolverOptions::default(),
//! );
//! assert_eq!(result.active_set(), sc.truth.active_set());
//! ```

// Bound checks written as `!(x > 0.0)` are deliberate: unlike `x <= 0.0`,
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod dictionary;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod reference;
pub mod selftest;
pub mod solver;

use std::path::PathBuf;

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("records mix different sweep axes")]
    MixedSweepAxis,
    #[error("empty record set")]
    EmptyRecords,
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("reference solve did not converge: {0}")]
    ReferenceNotConverged(String),
    #[error("linear system is singular or ill-conditioned")]
    SingularSystem,
    #[error("trial with seed {seed} failed: {message}")]
    TrialFailed { seed: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
