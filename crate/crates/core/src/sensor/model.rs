//! Synthetic tactile signal generation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::frame::{SensorFrame, CHANNELS, ELECTRODES, PAC_BATCH};
use super::SensorError;
use crate::physics::{ContactMode, ContactState};

/// Raw values are reported on a 1/256 s.p.u. grid, like a fixed-point ADC.
pub const QUANTUM: f64 = 1.0 / 256.0;

pub fn quantize(v: f64) -> f64 {
    (v / QUANTUM).round() * QUANTUM
}

/// Rate of the intra-tick pressure vibration batch, Hz.
const PAC_RATE: f64 = 2200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub p_dc: f64,
    pub p_ac: f64,
    pub electrode: f64,
    pub temperature: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            p_dc: 0.5,
            p_ac: 0.3,
            electrode: 0.2,
            temperature: 0.1,
        }
    }
}

impl NoiseConfig {
    pub fn silent() -> Self {
        Self {
            p_dc: 0.0,
            p_ac: 0.0,
            electrode: 0.0,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    /// s.p.u. per newton of normal force.
    pub pressure_gain: f64,
    pub noise: NoiseConfig,
    /// Electrode sensitivity falloff with angular distance, 1/rad².
    pub electrode_kappa: f64,
    /// Electrodes sit evenly on [-span, span] rad around the pad axis.
    pub electrode_span: f64,
    /// Utilization above which pre-slip vibration appears.
    pub vibration_onset: f64,
    /// Vibration amplitude at full utilization, s.p.u.
    pub vibration_amplitude: f64,
    /// Burst amplitude on ticks spent fully in slip, s.p.u.
    pub slip_burst_amplitude: f64,
    /// Vibration frequency range, Hz.
    pub vibration_band: (f64, f64),
    /// Correlation between successive P_ac noise samples.
    pub pac_noise_correlation: f64,
    /// Per-finger resting offsets are drawn uniformly from these ranges.
    pub pressure_offset_range: (f64, f64),
    pub electrode_offset_range: (f64, f64),
    pub temperature_offset_range: (f64, f64),
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            pressure_gain: 100.0,
            noise: NoiseConfig::default(),
            electrode_kappa: 8.0,
            electrode_span: 0.9,
            vibration_onset: 0.85,
            vibration_amplitude: 15.0,
            slip_burst_amplitude: 30.0,
            vibration_band: (150.0, 400.0),
            pac_noise_correlation: 0.5,
            pressure_offset_range: (1500.0, 2500.0),
            electrode_offset_range: (2000.0, 3500.0),
            temperature_offset_range: (1900.0, 2100.0),
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), SensorError> {
        let n = &self.noise;
        if !(self.pressure_gain > 0.0) {
            return Err(SensorError::InvalidConfig("pressure_gain must be > 0".into()));
        }
        if [n.p_dc, n.p_ac, n.electrode, n.temperature]
            .iter()
            .any(|s| !(*s >= 0.0))
        {
            return Err(SensorError::InvalidConfig("noise sigma must be >= 0".into()));
        }
        if !(self.vibration_onset > 0.0 && self.vibration_onset < 1.0) {
            return Err(SensorError::InvalidConfig(
                "vibration_onset must lie in (0, 1)".into(),
            ));
        }
        if !(self.pac_noise_correlation >= 0.0 && self.pac_noise_correlation < 1.0) {
            return Err(SensorError::InvalidConfig(
                "pac_noise_correlation must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn electrode_angle(&self, i: usize) -> f64 {
        -self.electrode_span + 2.0 * self.electrode_span * i as f64 / (ELECTRODES - 1) as f64
    }

    /// Pre-slip vibration amplitude for a given friction utilization.
    pub fn vibration_level(&self, utilization: f64) -> f64 {
        let u0 = self.vibration_onset;
        self.vibration_amplitude * ((utilization.min(1.0) - u0) / (1.0 - u0)).max(0.0)
    }

    /// Draws a resting-offset vector for one physical sensor.
    pub fn draw_offsets(&self, rng: &mut impl Rng) -> [f64; CHANNELS] {
        let mut off = [0.0; CHANNELS];
        let uniform = |rng: &mut dyn rand::RngCore, (lo, hi): (f64, f64)| {
            quantize(lo + (hi - lo) * rng.gen::<f64>())
        };
        off[0] = uniform(rng, self.pressure_offset_range);
        // the AC channel idles around the same fluid pressure
        let ac = uniform(rng, self.pressure_offset_range);
        for v in &mut off[1..1 + PAC_BATCH] {
            *v = ac;
        }
        for v in &mut off[1 + PAC_BATCH..1 + PAC_BATCH + ELECTRODES] {
            *v = uniform(rng, self.electrode_offset_range);
        }
        off[CHANNELS - 2] = uniform(rng, self.temperature_offset_range);
        off[CHANNELS - 1] = uniform(rng, self.temperature_offset_range);
        off
    }
}

/// Contact quantities the sensor responds to over one control tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TactileStimulus {
    pub normal_force: f64,
    pub utilization: f64,
    /// Fraction of the tick spent in slip mode, in [0, 1].
    pub slip_fraction: f64,
    /// Contact location on the pad, radians from the pad axis.
    pub contact_angle: f64,
}

impl TactileStimulus {
    pub fn from_contact(contact: &ContactState, contact_angle: f64, slip_fraction: f64) -> Self {
        if contact.mode == ContactMode::Free {
            return Self::default();
        }
        Self {
            normal_force: contact.normal_force,
            utilization: contact.utilization,
            slip_fraction: slip_fraction.clamp(0.0, 1.0),
            contact_angle,
        }
    }
}

/// Generates one raw frame. Consumes a fixed number of random draws per call
/// regardless of the stimulus, so noise streams stay aligned across fingers.
pub fn sample_sensor(
    stimulus: &TactileStimulus,
    tick: u64,
    offsets: &[f64; CHANNELS],
    config: &SensorConfig,
    rng: &mut ChaCha8Rng,
) -> SensorFrame {
    let noise = &config.noise;
    let pressure = config.pressure_gain * stimulus.normal_force;
    let mut ch = [0.0; CHANNELS];

    ch[0] = offsets[0] + pressure + noise.p_dc * gauss(rng);

    let rho = config.pac_noise_correlation;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut ar = gauss(rng);
    let u_freq: f64 = rng.gen();
    let u_phase: f64 = rng.gen();
    let (f_lo, f_hi) = config.vibration_band;
    let freq = f_lo + (f_hi - f_lo) * u_freq;
    let phase = std::f64::consts::TAU * u_phase;
    let amplitude = config.vibration_level(stimulus.utilization);
    let burst = config.slip_burst_amplitude * stimulus.slip_fraction;
    for k in 0..PAC_BATCH {
        if k > 0 {
            ar = rho * ar + innovation * gauss(rng);
        }
        let burst_draw = gauss(rng);
        let t = k as f64 / PAC_RATE;
        let vib = amplitude * (std::f64::consts::TAU * freq * t + phase).sin();
        ch[1 + k] = offsets[1 + k] + noise.p_ac * ar + vib + burst * burst_draw;
    }

    for i in 0..ELECTRODES {
        let d = stimulus.contact_angle - config.electrode_angle(i);
        let idx = 1 + PAC_BATCH + i;
        ch[idx] = offsets[idx]
            + pressure * (-config.electrode_kappa * d * d).exp()
            + noise.electrode * gauss(rng);
    }

    ch[CHANNELS - 2] =
        offsets[CHANNELS - 2] + noise.temperature * gauss(rng);
    ch[CHANNELS - 1] =
        offsets[CHANNELS - 1] + noise.temperature * gauss(rng);

    for v in &mut ch {
        *v = quantize(*v);
    }
    SensorFrame::from_channels(tick, &ch)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One physical sensor: its resting offsets and private noise stream.
#[derive(Debug, Clone)]
pub struct SensorModel {
    pub config: SensorConfig,
    pub offsets: [f64; CHANNELS],
    rng: ChaCha8Rng,
}

impl SensorModel {
    /// Offsets and noise are drawn from a stream keyed on `(seed, finger)`.
    pub fn new(config: SensorConfig, seed: u64, finger: usize) -> Result<Self, SensorError> {
        config.validate()?;
        let mut rng = crate::rng::stream(seed, crate::rng::Purpose::Sensor, finger as u64);
        let offsets = config.draw_offsets(&mut rng);
        Ok(Self {
            config,
            offsets,
            rng,
        })
    }

    pub fn with_offsets(
        config: SensorConfig,
        offsets: [f64; CHANNELS],
        rng: ChaCha8Rng,
    ) -> Result<Self, SensorError> {
        config.validate()?;
        Ok(Self {
            config,
            offsets,
            rng,
        })
    }

    pub fn sample(&mut self, stimulus: &TactileStimulus, tick: u64) -> SensorFrame {
        sample_sensor(stimulus, tick, &self.offsets, &self.config, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn silent() -> SensorConfig {
        SensorConfig {
            noise: NoiseConfig::silent(),
            ..SensorConfig::default()
        }
    }

    #[test]
    fn free_finger_reads_offsets() {
        let cfg = silent();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let offsets = cfg.draw_offsets(&mut rng);
        let f = sample_sensor(&TactileStimulus::default(), 0, &offsets, &cfg, &mut rng);
        assert_eq!(f.channels(), offsets);
    }

    #[test]
    fn pressure_gain_law() {
        let cfg = silent();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let offsets = cfg.draw_offsets(&mut rng);
        let stim = TactileStimulus {
            normal_force: 1.0,
            ..TactileStimulus::default()
        };
        let f = sample_sensor(&stim, 0, &offsets, &cfg, &mut rng);
        assert_eq!(f.p_dc - offsets[0], 100.0);
        // electrode under the contact sees the full pressure
        assert_eq!(f.electrodes[9] - offsets[1 + PAC_BATCH + 9], 100.0);
    }

    #[test]
    fn pressure_strictly_increasing_without_noise() {
        let cfg = silent();
        let offsets = [0.0; CHANNELS];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut last = f64::NEG_INFINITY;
        for k in 0..50 {
            let stim = TactileStimulus {
                normal_force: 0.1 * k as f64,
                ..TactileStimulus::default()
            };
            let f = sample_sensor(&stim, k, &offsets, &cfg, &mut rng);
            assert!(f.p_dc > last);
            last = f.p_dc;
        }
    }

    #[test]
    fn vibration_grows_with_utilization() {
        // Oracle: 1000 frames per condition, compare mean batch variance.
        let cfg = SensorConfig::default();
        let offsets = [0.0; CHANNELS];
        let mean_var = |u: f64, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stim = TactileStimulus {
                normal_force: 1.0,
                utilization: u,
                ..TactileStimulus::default()
            };
            (0..1000)
                .map(|k| sample_sensor(&stim, k, &offsets, &cfg, &mut rng).p_ac_variance())
                .sum::<f64>()
                / 1000.0
        };
        let high = mean_var(0.95, 11);
        let low = mean_var(0.5, 12);
        assert!(high > low, "{high} <= {low}");
    }

    #[test]
    fn vibration_level_law() {
        let cfg = SensorConfig::default();
        assert_eq!(cfg.vibration_level(0.5), 0.0);
        assert_eq!(cfg.vibration_level(0.85), 0.0);
        assert!((cfg.vibration_level(1.0) - cfg.vibration_amplitude).abs() < 1e-12);
        assert!((cfg.vibration_level(0.925) - 0.5 * cfg.vibration_amplitude).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_onset() {
        let cfg = SensorConfig {
            vibration_onset: 1.0,
            ..SensorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
