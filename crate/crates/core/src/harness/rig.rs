//! Per-finger sensing shared by every kind of trial: raw sampling, baseline
//! capture and grounding, driven by the world state at each tick.

use crate::math::Vec2;
use crate::physics::{step_physics, ContactState, PhysicsConfig, PhysicsError, WorldState};
use crate::sensor::{
    capture_baseline, ground_frame, Baseline, SensorConfig, SensorError, SensorFrame, SensorModel,
    TactileStimulus,
};

/// Where the contact sits on the pad, measured from the pad axis.
pub fn contact_angle(axis: Vec2, contact: &ContactState) -> f64 {
    if contact.in_contact {
        axis.angle_to(-contact.normal)
    } else {
        0.0
    }
}

/// Advances `steps` physics steps and returns the slip fraction of each
/// contact over that interval.
pub fn advance(
    world: &WorldState,
    config: &PhysicsConfig,
    steps: u32,
) -> Result<(WorldState, Vec<f64>), PhysicsError> {
    let mut w = world.clone();
    let mut slip = vec![0u64; w.fingers.len()];
    for _ in 0..steps {
        w = step_physics(&w, config)?;
        for (s, c) in slip.iter_mut().zip(&w.contacts) {
            *s += u64::from(c.slip_substeps);
        }
    }
    let total = (steps as u64 * config.substeps as u64).max(1) as f64;
    Ok((w, slip.into_iter().map(|s| s as f64 / total).collect()))
}

#[derive(Debug, Clone)]
pub struct SensedFrame {
    pub raw: SensorFrame,
    /// `None` until the baseline is captured.
    pub grounded: Option<SensorFrame>,
}

/// The sensors of all fingers together with their baselines.
#[derive(Debug, Clone)]
pub struct SensorRig {
    pub models: Vec<SensorModel>,
    pub baselines: Vec<Option<Baseline>>,
    window: Vec<Vec<SensorFrame>>,
    window_contact: Vec<Vec<bool>>,
}

impl SensorRig {
    /// Each finger's offsets and noise come from its own stream.
    pub fn new(config: &SensorConfig, seed: u64, n_fingers: usize) -> Result<Self, SensorError> {
        let models = (0..n_fingers)
            .map(|i| SensorModel::new(config.clone(), seed, i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            models,
            baselines: vec![None; n_fingers],
            window: vec![Vec::new(); n_fingers],
            window_contact: vec![Vec::new(); n_fingers],
        })
    }

    /// Samples every finger for `tick` from the current contacts. Before the
    /// baseline exists, frames are buffered for it.
    pub fn sense(&mut self, world: &WorldState, slip_fraction: &[f64], tick: u64) -> Vec<SensedFrame> {
        let mut out = Vec::with_capacity(self.models.len());
        for i in 0..self.models.len() {
            let contact = &world.contacts[i];
            let angle = contact_angle(world.fingers[i].axis, contact);
            let stimulus = TactileStimulus::from_contact(contact, angle, slip_fraction.get(i).copied().unwrap_or(0.0));
            let raw = self.models[i].sample(&stimulus, tick);
            let grounded = match &self.baselines[i] {
                Some(b) => Some(ground_frame(&raw, b)),
                None => {
                    self.window[i].push(raw.clone());
                    self.window_contact[i].push(contact.in_contact);
                    None
                }
            };
            out.push(SensedFrame { raw, grounded });
        }
        out
    }

    /// Fixes the baselines from the buffered window.
    pub fn capture(&mut self) -> Result<(), SensorError> {
        for i in 0..self.models.len() {
            if self.baselines[i].is_none() {
                let b = capture_baseline(&self.window[i], &self.window_contact[i])?;
                self.baselines[i] = Some(b);
                self.window[i].clear();
                self.window_contact[i].clear();
            }
        }
        Ok(())
    }
}
