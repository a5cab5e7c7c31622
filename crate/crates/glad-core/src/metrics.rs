//! Scoring detection results against ground truth.
//!
//! The headline figure of merit is the detection error probability: the
//! fraction of realizations in which *any* activity-and-delay indicator is
//! estimated incorrectly — a missed device, a phantom device, or a correct
//! device with the wrong delay all count. Missed-detection and false-alarm
//! probabilities are per-device-event ratios (missed over all active device
//! events, false alarms over all inactive ones); per-realization counts are
//! also kept so either convention can be recovered. Channel quality is
//! tracked as an auxiliary normalized MSE over the correctly detected
//! devices.

use serde::{Deserialize, Serialize};

use crate::continuation::DetectionResult;
use crate::model::GroundTruth;

/// Outcome of scoring one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialScore {
    /// True iff any activity-and-delay indicator was wrong.
    pub detection_error: bool,
    /// Active devices declared inactive.
    pub missed_detections: usize,
    /// Inactive devices declared active.
    pub false_alarms: usize,
    /// Devices detected active with the wrong delay.
    pub delay_errors: usize,
    /// Truly active devices in this realization.
    pub num_active: usize,
    /// Truly inactive devices in this realization.
    pub num_inactive: usize,
    /// Sum of squared channel-estimate errors over devices whose activity
    /// and delay were both correct.
    pub channel_sq_err: f64,
    /// Sum of squared true-channel norms over the same devices.
    pub channel_sq_ref: f64,
}

impl TrialScore {
    /// Normalized channel MSE over correctly detected devices; `None` when
    /// no device qualified.
    pub fn channel_nmse(&self) -> Option<f64> {
        (self.channel_sq_ref > 0.0).then(|| self.channel_sq_err / self.channel_sq_ref)
    }
}

/// Campaign-level summary of many [`TrialScore`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    pub num_trials: usize,
    /// Fraction of realizations with any indicator error.
    pub detection_error_prob: f64,
    /// Missed detections over all active device events.
    pub missed_detection_prob: f64,
    /// False alarms over all inactive device events.
    pub false_alarm_prob: f64,
    /// Mean of the per-trial channel NMSE over trials where it was defined.
    pub mean_channel_nmse: Option<f64>,
    /// Total squared error over total reference energy, pooled across trials.
    pub pooled_channel_nmse: Option<f64>,
    /// Realizations containing at least one missed detection.
    pub trials_with_missed: usize,
    /// Realizations containing at least one false alarm.
    pub trials_with_false_alarm: usize,
    /// Realizations containing at least one delay error.
    pub trials_with_delay_error: usize,
}

/// Compares one detection result against the truth that generated it.
pub fn score_trial(result: &DetectionResult, truth: &GroundTruth) -> TrialScore {
    let n = truth.activity.len();
    assert_eq!(result.num_devices(), n, "result/truth device count mismatch");
    assert_eq!(
        result.channels.ncols(),
        truth.channels.ncols(),
        "result/truth antenna count mismatch"
    );
    let shifts = result.indicators.ncols();

    let mut detection_error = false;
    let mut missed = 0usize;
    let mut false_alarms = 0usize;
    let mut delay_errors = 0usize;
    let mut num_active = 0usize;
    let mut sq_err = 0.0f64;
    let mut sq_ref = 0.0f64;

    for dev in 0..n {
        let truth_active = truth.activity[dev];
        let truth_delay = truth.delays[dev];
        if truth_active {
            num_active += 1;
            debug_assert!(truth_delay < shifts, "true delay outside indicator range");
        }

        // Indicator mismatch at any shift marks the realization as an error.
        for shift in 0..shifts {
            let truth_ind = truth_active && truth_delay == shift;
            if result.indicators[[dev, shift]] != truth_ind {
                detection_error = true;
            }
        }

        match (truth_active, result.activity[dev]) {
            (true, false) => missed += 1,
            (false, true) => false_alarms += 1,
            (true, true) => {
                if result.delays[dev] == Some(truth_delay) {
                    // Correct device, correct delay: channel error counts.
                    for (got, want) in result
                        .channels
                        .row(dev)
                        .iter()
                        .zip(truth.channels.row(dev).iter())
                    {
                        sq_err += (got - want).norm_sqr();
                        sq_ref += want.norm_sqr();
                    }
                } else {
                    delay_errors += 1;
                }
            }
            (false, false) => {}
        }
    }

    TrialScore {
        detection_error,
        missed_detections: missed,
        false_alarms,
        delay_errors,
        num_active,
        num_inactive: n - num_active,
        channel_sq_err: sq_err,
        channel_sq_ref: sq_ref,
    }
}

/// Combines per-trial scores into campaign probabilities.
///
/// Panics on an empty slice — aggregating nothing is a contract violation.
pub fn aggregate(scores: &[TrialScore]) -> AggregateScore {
    assert!(!scores.is_empty(), "cannot aggregate zero trials");
    let num_trials = scores.len();

    let mut error_trials = 0usize;
    let mut missed = 0usize;
    let mut false_alarms = 0usize;
    let mut active_events = 0usize;
    let mut inactive_events = 0usize;
    let mut trials_with_missed = 0usize;
    let mut trials_with_fa = 0usize;
    let mut trials_with_delay = 0usize;
    let mut nmse_sum = 0.0f64;
    let mut nmse_count = 0usize;
    let mut pooled_err = 0.0f64;
    let mut pooled_ref = 0.0f64;

    for s in scores {
        error_trials += usize::from(s.detection_error);
        missed += s.missed_detections;
        false_alarms += s.false_alarms;
        active_events += s.num_active;
        inactive_events += s.num_inactive;
        trials_with_missed += usize::from(s.missed_detections > 0);
        trials_with_fa += usize::from(s.false_alarms > 0);
        trials_with_delay += usize::from(s.delay_errors > 0);
        if let Some(nmse) = s.channel_nmse() {
            nmse_sum += nmse;
            nmse_count += 1;
        }
        pooled_err += s.channel_sq_err;
        pooled_ref += s.channel_sq_ref;
    }

    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    AggregateScore {
        num_trials,
        detection_error_prob: error_trials as f64 / num_trials as f64,
        missed_detection_prob: ratio(missed, active_events),
        false_alarm_prob: ratio(false_alarms, inactive_events),
        mean_channel_nmse: (nmse_count > 0).then(|| nmse_sum / nmse_count as f64),
        pooled_channel_nmse: (pooled_ref > 0.0).then(|| pooled_err / pooled_ref),
        trials_with_missed,
        trials_with_false_alarm: trials_with_fa,
        trials_with_delay_error: trials_with_delay,
    }
}
