//! Synthetic scenario generation.
//!
//! Produces everything the receiver-side algorithms consume: per-device
//! unit-modulus preambles, a ground-truth draw of activity / delays / path
//! losses / channels, and the noisy received signal matrix observed at the
//! base station over the first `L + tau_max` symbols of a coherence block.
//!
//! All randomness flows from one 64-bit seed through named sub-streams
//! ([`scenario_stream`]), so any instance can be replayed exactly.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{C64, Error, Result};

/// Devices are never placed closer to the base station than this, which
/// keeps path gains bounded.
pub const MIN_DEVICE_DISTANCE_M: f64 = 5.0;

/// Stream ids for [`scenario_stream`]; one per independent random quantity.
pub const STREAM_PREAMBLES: u64 = 0;
pub const STREAM_TRUTH: u64 = 1;
pub const STREAM_NOISE: u64 = 2;

/// Large-scale gain model applied to device positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    /// 128.1 + 37.6 log10(d_km) dB attenuation, a standard cellular model.
    #[default]
    CellularDb,
    /// All gains equal to one; useful for controlled unit tests.
    Unit,
}

/// Every scenario parameter in one place. Powers are linear watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// Number of devices N.
    pub num_devices: usize,
    /// Base-station antennas M.
    pub num_antennas: usize,
    /// Preamble length L in symbols.
    pub preamble_len: usize,
    /// Maximum transmission delay tau_max in symbols.
    pub max_delay: usize,
    /// Per-device transmit power p in watts.
    pub tx_power: f64,
    /// Noise variance per received sample in watts.
    pub noise_var: f64,
    /// Number of active devices K per coherence block.
    pub num_active: usize,
    /// Cell radius in meters.
    pub cell_radius: f64,
    /// Large-scale gain model.
    pub path_loss_model: PathLossModel,
    /// Master seed for scenario generation.
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    /// The simulation setup used throughout the experiments: 100 devices in a
    /// 250 m cell, 10 active, 128 antennas, L = 20, delays up to 5 symbols,
    /// 23 dBm transmit power, -169 dBm/Hz noise over 10 MHz.
    fn default() -> Self {
        Self {
            num_devices: 100,
            num_antennas: 128,
            preamble_len: 20,
            max_delay: 5,
            tx_power: dbm_to_watts(23.0),
            noise_var: noise_variance_from_psd(-169.0, 10.0e6),
            num_active: 10,
            cell_radius: 250.0,
            path_loss_model: PathLossModel::CellularDb,
            rng_seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_devices == 0 {
            return Err(Error::InvalidConfig("num_devices must be >= 1".into()));
        }
        if self.num_antennas == 0 {
            return Err(Error::InvalidConfig("num_antennas must be >= 1".into()));
        }
        if self.preamble_len == 0 {
            return Err(Error::InvalidConfig("preamble_len must be >= 1".into()));
        }
        if self.num_active > self.num_devices {
            return Err(Error::InvalidConfig(format!(
                "num_active ({}) exceeds num_devices ({})",
                self.num_active, self.num_devices
            )));
        }
        if !(self.tx_power > 0.0) {
            return Err(Error::InvalidConfig("tx_power must be > 0".into()));
        }
        if !(self.noise_var >= 0.0) {
            return Err(Error::InvalidConfig("noise_var must be >= 0".into()));
        }
        if self.path_loss_model == PathLossModel::CellularDb
            && self.cell_radius <= MIN_DEVICE_DISTANCE_M
        {
            return Err(Error::InvalidConfig(format!(
                "cell_radius must exceed the {MIN_DEVICE_DISTANCE_M} m minimum device distance"
            )));
        }
        Ok(())
    }

    /// Observation window length L + tau_max.
    pub fn obs_len(&self) -> usize {
        self.preamble_len + self.max_delay
    }

    /// Number of (device, shift) blocks, (tau_max + 1) * N.
    pub fn num_blocks(&self) -> usize {
        self.num_devices * (self.max_delay + 1)
    }
}

/// 23 dBm -> 0.1995 W and friends.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Noise variance per complex sample from a power spectral density in
/// dBm/Hz and a bandwidth in Hz (sampling at the bandwidth).
pub fn noise_variance_from_psd(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(psd_dbm_hz + 10.0 * bandwidth_hz.log10())
}

/// A dedicated RNG for one random quantity of one scenario. Streams with
/// different ids are statistically independent for the same seed.
pub fn scenario_stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The per-device preamble sequences, one length-L row per device.
#[derive(Debug, Clone)]
pub struct PreambleBook {
    symbols: Array2<C64>,
}

impl PreambleBook {
    /// Wraps a device-by-symbol matrix. Every symbol must be unit modulus;
    /// the closed-form solver depends on each preamble having squared norm L.
    pub fn new(symbols: Array2<C64>) -> Self {
        for (idx, s) in symbols.iter().enumerate() {
            let dev = (s.norm_sqr() - 1.0).abs();
            assert!(
                dev <= 1e-12,
                "preamble symbol {idx} is not unit modulus (|a|^2 - 1 = {dev:e})"
            );
        }
        Self { symbols }
    }

    pub fn num_devices(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn preamble_len(&self) -> usize {
        self.symbols.ncols()
    }

    /// The length-L sequence of device `n`.
    pub fn device(&self, n: usize) -> ndarray::ArrayView1<'_, C64> {
        self.symbols.row(n)
    }

    pub fn symbols(&self) -> &Array2<C64> {
        &self.symbols
    }
}

/// Draws N random-phase preambles: each symbol is exp(i*theta) with theta
/// i.i.d. uniform on [0, 2*pi).
pub fn generate_preambles<R: Rng>(config: &SystemConfig, rng: &mut R) -> PreambleBook {
    let n = config.num_devices;
    let l = config.preamble_len;
    let mut symbols = Array2::<C64>::zeros((n, l));
    for s in symbols.iter_mut() {
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        *s = C64::from_polar(1.0, phase);
    }
    PreambleBook::new(symbols)
}

/// One realization of device activity, delays, path losses, and channels.
///
/// Delays and channels are drawn for every device so the draw count does not
/// depend on which devices are active; only the active ones enter the signal.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// lambda_n per device.
    pub activity: Vec<bool>,
    /// tau_n per device, in [0, tau_max].
    pub delays: Vec<usize>,
    /// Large-scale gain alpha_n per device.
    pub path_gains: Vec<f64>,
    /// h_n stacked as an N x M matrix.
    pub channels: Array2<C64>,
}

impl GroundTruth {
    pub fn active_set(&self) -> Vec<usize> {
        self.activity
            .iter()
            .enumerate()
            .filter_map(|(n, &a)| a.then_some(n))
            .collect()
    }

    pub fn num_active(&self) -> usize {
        self.activity.iter().filter(|&&a| a).count()
    }

    pub fn channel(&self, n: usize) -> ndarray::ArrayView1<'_, C64> {
        self.channels.row(n)
    }
}

/// Cellular path loss: alpha = 10^(-(128.1 + 37.6 log10(d_km)) / 10).
pub fn path_loss(distance_m: f64) -> f64 {
    assert!(distance_m > 0.0, "path_loss requires a positive distance");
    let d_km = distance_m / 1000.0;
    10f64.powf(-(128.1 + 37.6 * d_km.log10()) / 10.0)
}

/// Draws activity (exactly K devices, uniformly without replacement), delays
/// uniform on {0..tau_max}, positions uniform over the cell disc outside the
/// minimum distance, and i.i.d. complex Gaussian channels with per-entry
/// variance alpha_n.
pub fn generate_ground_truth<R: Rng>(config: &SystemConfig, rng: &mut R) -> GroundTruth {
    let n = config.num_devices;
    assert!(config.num_active <= n, "num_active exceeds num_devices");

    let mut activity = vec![false; n];
    for idx in rand::seq::index::sample(rng, n, config.num_active) {
        activity[idx] = true;
    }

    let delays: Vec<usize> = (0..n)
        .map(|_| rng.random_range(0..=config.max_delay))
        .collect();

    let path_gains: Vec<f64> = (0..n)
        .map(|_| match config.path_loss_model {
            PathLossModel::Unit => {
                // Burn one draw so both models consume the same stream length.
                let _ = rng.random::<f64>();
                1.0
            }
            PathLossModel::CellularDb => {
                // Uniform over the annulus between the minimum distance and
                // the cell radius (area-uniform placement).
                let u = rng.random::<f64>();
                let d_min2 = MIN_DEVICE_DISTANCE_M * MIN_DEVICE_DISTANCE_M;
                let r2 = config.cell_radius * config.cell_radius;
                let d = (d_min2 + u * (r2 - d_min2)).sqrt();
                path_loss(d)
            }
        })
        .collect();

    let mut channels = Array2::<C64>::zeros((n, config.num_antennas));
    for (dev, mut row) in channels.rows_mut().into_iter().enumerate() {
        let scale = (path_gains[dev] / 2.0).sqrt();
        for h in row.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *h = C64::new(re * scale, im * scale);
        }
    }

    GroundTruth {
        activity,
        delays,
        path_gains,
        channels,
    }
}

/// The (L + tau_max) x M signal observed at the base station.
#[derive(Debug, Clone)]
pub struct ReceivedSignal {
    pub samples: Array2<C64>,
}

impl ReceivedSignal {
    pub fn obs_len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.samples.ncols()
    }
}

/// Superimposes sqrt(p) * a_bar_n(tau_n) * h_n^T over the active devices and
/// adds white complex Gaussian noise of per-entry variance `noise_var`.
///
/// Device n's preamble occupies rows tau_n .. tau_n + L; the rows before and
/// after its window receive nothing from it.
pub fn simulate_received_signal<R: Rng>(
    preambles: &PreambleBook,
    truth: &GroundTruth,
    config: &SystemConfig,
    rng: &mut R,
) -> ReceivedSignal {
    let n = config.num_devices;
    let l = config.preamble_len;
    assert_eq!(preambles.num_devices(), n, "preamble/config device mismatch");
    assert_eq!(preambles.preamble_len(), l, "preamble/config length mismatch");
    assert_eq!(truth.activity.len(), n, "truth/config device mismatch");
    assert_eq!(
        truth.channels.ncols(),
        config.num_antennas,
        "truth/config antenna mismatch"
    );

    let rows = config.obs_len();
    let m = config.num_antennas;
    let sqrt_p = config.tx_power.sqrt();
    let mut samples = Array2::<C64>::zeros((rows, m));

    for dev in 0..n {
        if !truth.activity[dev] {
            continue;
        }
        let tau = truth.delays[dev];
        debug_assert!(tau <= config.max_delay);
        let a = preambles.device(dev);
        let h = truth.channels.row(dev);
        for (dl, &al) in a.iter().enumerate() {
            let coef = al * sqrt_p;
            let mut out = samples.row_mut(tau + dl);
            // h enters transposed, not conjugated.
            for (y, &hm) in out.iter_mut().zip(h.iter()) {
                *y += coef * hm;
            }
        }
    }

    if config.noise_var > 0.0 {
        let scale = (config.noise_var / 2.0).sqrt();
        for y in samples.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += C64::new(re * scale, im * scale);
        }
    }

    ReceivedSignal { samples }
}

/// A fully generated instance: everything needed to run and score one trial.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: SystemConfig,
    pub preambles: PreambleBook,
    pub truth: GroundTruth,
    pub received: ReceivedSignal,
}

impl Scenario {
    /// Generates a scenario from `config.rng_seed`, with preambles, ground
    /// truth, and noise on independent sub-streams.
    pub fn generate(config: &SystemConfig) -> Scenario {
        let mut pre_rng = scenario_stream(config.rng_seed, STREAM_PREAMBLES);
        let mut truth_rng = scenario_stream(config.rng_seed, STREAM_TRUTH);
        let mut noise_rng = scenario_stream(config.rng_seed, STREAM_NOISE);
        let preambles = generate_preambles(config, &mut pre_rng);
        let truth = generate_ground_truth(config, &mut truth_rng);
        let received = simulate_received_signal(&preambles, &truth, config, &mut noise_rng);
        Scenario {
            config: config.clone(),
            preambles,
            truth,
            received,
        }
    }
}
