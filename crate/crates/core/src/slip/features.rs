use serde::{Deserialize, Serialize};

use super::SlipError;
use crate::sensor::{SensorFrame, ELECTRODES};

/// Per-tick values after collapsing the P_ac batch to (mean, peak-to-peak).
pub const TICK_FEATURES: usize = 5 + ELECTRODES;
/// `[x_t, x_t - x_{t-1}]`.
pub const FEATURE_DIM: usize = 2 * TICK_FEATURES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub tick: u64,
    pub values: Vec<f64>,
}

/// `[p_dc, p_ac mean, p_ac peak-to-peak, electrodes.., t_dc, t_ac]`
pub fn tick_features(frame: &SensorFrame) -> [f64; TICK_FEATURES] {
    let mut x = [0.0; TICK_FEATURES];
    x[0] = frame.p_dc;
    x[1] = frame.p_ac_mean();
    x[2] = frame.p_ac_peak_to_peak();
    x[3..3 + ELECTRODES].copy_from_slice(&frame.electrodes);
    x[3 + ELECTRODES] = frame.t_dc;
    x[4 + ELECTRODES] = frame.t_ac;
    x
}

/// Features over the two-tick history `{t-1, t}` of grounded frames.
pub fn extract_features(
    previous: &SensorFrame,
    current: &SensorFrame,
) -> Result<FeatureVector, SlipError> {
    if current.tick != previous.tick + 1 {
        return Err(SlipError::NonConsecutive {
            previous: previous.tick,
            current: current.tick,
        });
    }
    let a = tick_features(previous);
    let b = tick_features(current);
    let mut values = Vec::with_capacity(FEATURE_DIM);
    values.extend_from_slice(&b);
    values.extend(b.iter().zip(&a).map(|(now, before)| now - before));
    Ok(FeatureVector {
        tick: current.tick,
        values,
    })
}
