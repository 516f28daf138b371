//! 44-channel synthetic tactile stream and per-finger grounding.

mod baseline;
mod frame;
mod model;

pub use baseline::{capture_baseline, ground_frame, Baseline, MIN_BASELINE_FRAMES};
pub use frame::{SensorFrame, CHANNELS, ELECTRODES, PAC_BATCH};
pub use model::{
    quantize, sample_sensor, NoiseConfig, SensorConfig, SensorModel, TactileStimulus, QUANTUM,
};

#[derive(Debug, thiserror::Error)]
pub enum SensorError {
    #[error("invalid sensor configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid baseline window: {0}")]
    BaselineWindow(String),
}
