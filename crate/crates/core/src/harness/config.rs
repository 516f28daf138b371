use std::path::Path;

use serde::{Deserialize, Serialize};

use super::collect::CollectionProtocol;
use super::HarnessError;
use crate::controller::ControllerConfig;
use crate::physics::PhysicsConfig;
use crate::sensor::SensorConfig;
use crate::slip::{LabelThresholds, TrainConfig, DEFAULT_HORIZON};

/// Grasp-trial timing and fingertip geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspConfig {
    pub finger_radius: f64,
    /// Initial distance between fingertip and surface, m.
    pub gap: f64,
    /// Physics steps per control tick.
    pub steps_per_tick: u32,
    /// No-contact ticks used to capture the sensor baselines.
    pub baseline_ticks: u32,
    /// Time the fingers close on the supported object before release, s.
    pub preload_time: f64,
    /// Trial length after the support is removed, s.
    pub duration: f64,
    /// Trailing window used for steady-state force statistics, s.
    pub steady_window: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        Self {
            finger_radius: 0.01,
            gap: 0.001,
            steps_per_tick: 10,
            baseline_ticks: 20,
            preload_time: 0.4,
            duration: 10.0,
            steady_window: 2.0,
        }
    }
}

/// Everything a run needs, loadable from one TOML file with a section per part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub physics: PhysicsConfig,
    pub sensor: SensorConfig,
    pub controller: ControllerConfig,
    pub labels: LabelThresholds,
    pub grasp: GraspConfig,
    pub protocol: CollectionProtocol,
    pub training: TrainConfig,
    /// Prediction horizon in ticks.
    pub horizon: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsConfig::default(),
            sensor: SensorConfig::default(),
            controller: ControllerConfig::default(),
            labels: LabelThresholds::default(),
            grasp: GraspConfig::default(),
            protocol: CollectionProtocol::default(),
            training: TrainConfig::default(),
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl SimConfig {
    pub fn tick_dt(&self) -> f64 {
        self.physics.dt * self.grasp.steps_per_tick as f64
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.physics.validate()?;
        self.sensor.validate()?;
        self.controller.validate()?;
        let g = &self.grasp;
        if g.steps_per_tick == 0 || !(g.finger_radius > 0.0) || !(g.gap >= 0.0) || !(g.duration > 0.0) {
            return Err(HarnessError::Config("invalid grasp section".into()));
        }
        if (g.baseline_ticks as usize) < crate::sensor::MIN_BASELINE_FRAMES {
            return Err(HarnessError::Config(format!(
                "baseline_ticks must be at least {}",
                crate::sensor::MIN_BASELINE_FRAMES
            )));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Config("horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::from_toml_str("").unwrap(), SimConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = SimConfig::default();
        cfg.controller.leakage = 0.9;
        cfg.grasp.duration = 3.0;
        let back = SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_section_overrides() {
        let cfg = SimConfig::from_toml_str("[controller]\nleakage = 0.9\n").unwrap();
        assert_eq!(cfg.controller.leakage, 0.9);
        assert_eq!(cfg.controller.max_speed, ControllerConfig::default().max_speed);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(SimConfig::from_toml_str("[controller]\nleakage = 1.5\n").is_err());
        assert!(SimConfig::from_toml_str("[grasp]\nbaseline_ticks = 2\n").is_err());
    }
}
