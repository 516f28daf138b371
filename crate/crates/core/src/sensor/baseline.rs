use serde::{Deserialize, Serialize};

use super::frame::{SensorFrame, CHANNELS};
use super::model::quantize;
use super::SensorError;

pub const MIN_BASELINE_FRAMES: usize = 10;

/// Per-channel resting level of one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub offsets: Vec<f64>,
    /// First and last tick of the window it was computed from.
    pub source_window: (u64, u64),
}

impl Baseline {
    pub fn zero() -> Self {
        Self {
            offsets: vec![0.0; CHANNELS],
            source_window: (0, 0),
        }
    }

    pub fn from_offsets(offsets: [f64; CHANNELS]) -> Self {
        Self {
            offsets: offsets.to_vec(),
            source_window: (0, 0),
        }
    }
}

/// Per-channel mean over a no-contact window, snapped to the sensor grid.
///
/// `in_contact[i]` flags whether frame `i` was taken while touching.
pub fn capture_baseline(frames: &[SensorFrame], in_contact: &[bool]) -> Result<Baseline, SensorError> {
    if frames.len() != in_contact.len() {
        return Err(SensorError::BaselineWindow(format!(
            "{} frames but {} contact flags",
            frames.len(),
            in_contact.len()
        )));
    }
    if frames.len() < MIN_BASELINE_FRAMES {
        return Err(SensorError::BaselineWindow(format!(
            "need at least {MIN_BASELINE_FRAMES} frames, got {}",
            frames.len()
        )));
    }
    if let Some(i) = in_contact.iter().position(|&c| c) {
        return Err(SensorError::BaselineWindow(format!(
            "frame at tick {} was taken in contact",
            frames[i].tick
        )));
    }
    let mut sums = [0.0; CHANNELS];
    for f in frames {
        for (s, v) in sums.iter_mut().zip(f.channels()) {
            *s += v;
        }
    }
    let n = frames.len() as f64;
    Ok(Baseline {
        offsets: sums.iter().map(|s| quantize(s / n)).collect(),
        source_window: (frames[0].tick, frames[frames.len() - 1].tick),
    })
}

/// Subtracts the baseline channel-wise.
pub fn ground_frame(frame: &SensorFrame, baseline: &Baseline) -> SensorFrame {
    let mut ch = frame.channels();
    for (v, b) in ch.iter_mut().zip(&baseline.offsets) {
        *v -= b;
    }
    SensorFrame::from_channels(frame.tick, &ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::model::{sample_sensor, SensorConfig, TactileStimulus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant(tick: u64, v: f64) -> SensorFrame {
        SensorFrame::from_channels(tick, &[v; CHANNELS])
    }

    #[test]
    fn constant_window() {
        let frames: Vec<_> = (0..12).map(|k| constant(k, 1234.5)).collect();
        let b = capture_baseline(&frames, &[false; 12]).unwrap();
        assert!(b.offsets.iter().all(|&o| o == 1234.5));
        assert_eq!(b.source_window, (0, 11));
    }

    #[test]
    fn short_or_touching_windows_rejected() {
        let frames: Vec<_> = (0..5).map(|k| constant(k, 1.0)).collect();
        assert!(capture_baseline(&frames, &[false; 5]).is_err());
        let frames: Vec<_> = (0..12).map(|k| constant(k, 1.0)).collect();
        let mut flags = [false; 12];
        flags[4] = true;
        assert!(capture_baseline(&frames, &flags).is_err());
    }

    #[test]
    fn noisy_window_within_standard_error_bound() {
        // sigma 0.5 on every channel, 100 frames: 3·σ/√n = 0.15 < 0.2
        let cfg = SensorConfig {
            noise: crate::sensor::NoiseConfig {
                p_dc: 0.5,
                p_ac: 0.5,
                electrode: 0.5,
                temperature: 0.5,
            },
            pac_noise_correlation: 0.0,
            ..SensorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let offsets = cfg.draw_offsets(&mut rng);
        let frames: Vec<_> = (0..100)
            .map(|k| sample_sensor(&TactileStimulus::default(), k, &offsets, &cfg, &mut rng))
            .collect();
        let b = capture_baseline(&frames, &[false; 100]).unwrap();
        for (est, truth) in b.offsets.iter().zip(offsets) {
            assert!((est - truth).abs() < 0.2, "{est} vs {truth}");
        }
    }

    #[test]
    fn grounding_against_itself_is_zero() {
        let f = constant(3, 77.25);
        let b = Baseline::from_offsets(f.channels());
        let g = ground_frame(&f, &b);
        assert!(g.channels().iter().all(|&v| v == 0.0));
        assert_eq!(g.tick, 3);
        assert_eq!(ground_frame(&f, &Baseline::zero()), f);
    }
}
