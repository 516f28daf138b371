//! Per-finger grip stabilizer: slip prediction drives a leaky integrator whose
//! output sets the fingertip's pressing speed along the contact normal.
//!
//! A controller sees only its own sensor frames, its own classifier and its
//! own contact normal. Nothing here can read another finger.

use serde::{Deserialize, Serialize};

use crate::class::ContactClass;
use crate::math::Vec2;
use crate::sensor::SensorFrame;
use crate::slip::{extract_features, SlipError, SlipPredictor};

#[derive(Debug, thiserror::Error)]
pub enum ControllerError {
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("contact normal is not a unit vector (|N| = {0})")]
    NonUnitNormal(f64),
    #[error(transparent)]
    Prediction(#[from] SlipError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Integrator leakage per 10 ms tick.
    pub leakage: f64,
    /// Pressing speed at full integrator output, m/s.
    pub max_speed: f64,
    /// Integrator value at activation.
    pub initial_fraction: f64,
    /// Output floor used until the minimum response has been learned.
    pub floor: f64,
    /// Consecutive `contact` predictions that make up the first stable period.
    pub stable_period: u32,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            leakage: 0.95,
            max_speed: 0.02,
            initial_fraction: 0.5,
            floor: 0.05,
            stable_period: 20,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.leakage > 0.0 && self.leakage < 1.0) {
            return Err(ControllerError::InvalidConfig(format!(
                "leakage must lie in (0, 1), got {}",
                self.leakage
            )));
        }
        if !(self.max_speed > 0.0 && self.max_speed.is_finite()) {
            return Err(ControllerError::InvalidConfig("max_speed must be > 0".into()));
        }
        if !(self.initial_fraction > 0.0 && self.initial_fraction <= 1.0) {
            return Err(ControllerError::InvalidConfig(
                "initial_fraction must lie in (0, 1]".into(),
            ));
        }
        if !(self.floor >= 0.0 && self.floor < 1.0) {
            return Err(ControllerError::InvalidConfig("floor must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub y: f64,
    /// Learned once per episode, then fixed.
    pub y_min: Option<f64>,
    pub previous_prediction: Option<ContactClass>,
    pub contact_streak: u32,
    pub seen_stable_period: bool,
    pub last_command: Vec2,
}

pub fn init_controller(config: &ControllerConfig) -> Result<ControllerState, ControllerError> {
    config.validate()?;
    Ok(ControllerState {
        y: config.initial_fraction,
        y_min: None,
        previous_prediction: None,
        contact_streak: 0,
        seen_stable_period: false,
        last_command: Vec2::ZERO,
    })
}

/// 1 when slip is predicted, 0 otherwise.
pub fn integrator_input(prediction: ContactClass) -> f64 {
    if prediction == ContactClass::Slip {
        1.0
    } else {
        0.0
    }
}

pub fn update_integrator(y_prev: f64, input: f64, leakage: f64) -> f64 {
    leakage * y_prev + (1.0 - leakage) * input
}

/// Records the integrator value at the first contact→slip transition that
/// follows a stable period.
pub fn update_y_min(
    state: &mut ControllerState,
    previous: Option<ContactClass>,
    current: ContactClass,
    y: f64,
) {
    if state.y_min.is_none()
        && state.seen_stable_period
        && previous == Some(ContactClass::Contact)
        && current == ContactClass::Slip
    {
        state.y_min = Some(y);
    }
}

const UNIT_TOLERANCE: f64 = 1e-6;

/// Fingertip velocity pressing into the surface along `-normal`, where `normal`
/// points from the object to the finger. `None` (no contact) commands rest.
pub fn command_velocity(
    y: f64,
    y_effective_min: f64,
    normal: Option<Vec2>,
    max_speed: f64,
) -> Result<Vec2, ControllerError> {
    let Some(n) = normal else {
        return Ok(Vec2::ZERO);
    };
    let len = n.norm();
    if (len - 1.0).abs() > UNIT_TOLERANCE {
        return Err(ControllerError::NonUnitNormal(len));
    }
    Ok(-n * (max_speed * y.max(y_effective_min)))
}

/// Everything one controller tick produced, for logging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickOutcome {
    pub prediction: Option<ContactClass>,
    pub input: f64,
    pub y: f64,
    pub y_min: Option<f64>,
    pub command: Vec2,
    /// Frames were missing; the previous command was held.
    pub sensor_gap: bool,
}

/// One control tick: predict, integrate, learn the minimum, command.
pub fn controller_tick(
    state: &ControllerState,
    config: &ControllerConfig,
    frames: Option<(&SensorFrame, &SensorFrame)>,
    predictor: &impl SlipPredictor,
    normal: Option<Vec2>,
) -> Result<(TickOutcome, ControllerState), ControllerError> {
    let mut next = state.clone();
    let Some((previous_frame, current_frame)) = frames else {
        return Ok((
            TickOutcome {
                prediction: None,
                input: 0.0,
                y: state.y,
                y_min: state.y_min,
                command: state.last_command,
                sensor_gap: true,
            },
            next,
        ));
    };
    let features = extract_features(previous_frame, current_frame)?;
    let prediction = predictor.predict(&features.values)?;
    let input = integrator_input(prediction);
    let y = update_integrator(state.y, input, config.leakage);
    next.y = y;
    update_y_min(&mut next, state.previous_prediction, prediction, y);

    if prediction == ContactClass::Contact {
        next.contact_streak = state.contact_streak.saturating_add(1);
        if next.contact_streak >= config.stable_period {
            next.seen_stable_period = true;
        }
    } else {
        next.contact_streak = 0;
    }
    next.previous_prediction = Some(prediction);

    let y_eff = next.y_min.unwrap_or(config.floor);
    let command = command_velocity(next.y, y_eff, normal, config.max_speed)?;
    next.last_command = command;
    Ok((
        TickOutcome {
            prediction: Some(prediction),
            input,
            y: next.y,
            y_min: next.y_min,
            command,
            sensor_gap: false,
        },
        next,
    ))
}

/// A controller instance bound to one finger.
#[derive(Debug, Clone)]
pub struct FingerController {
    pub config: ControllerConfig,
    pub state: ControllerState,
}

impl FingerController {
    pub fn new(config: ControllerConfig) -> Result<Self, ControllerError> {
        let state = init_controller(&config)?;
        Ok(Self { config, state })
    }

    pub fn tick(
        &mut self,
        frames: Option<(&SensorFrame, &SensorFrame)>,
        predictor: &impl SlipPredictor,
        normal: Option<Vec2>,
    ) -> Result<TickOutcome, ControllerError> {
        let (outcome, next) = controller_tick(&self.state, &self.config, frames, predictor, normal)?;
        self.state = next;
        Ok(outcome)
    }

    /// Command from the current integrator state without advancing it.
    pub fn hold_command(&self, normal: Option<Vec2>) -> Result<Vec2, ControllerError> {
        let y_eff = self.state.y_min.unwrap_or(self.config.floor);
        command_velocity(self.state.y, y_eff, normal, self.config.max_speed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerLogRecord {
    pub finger_id: usize,
    pub tick: u64,
    pub c_pred: Option<ContactClass>,
    #[serde(rename = "L")]
    pub input: f64,
    pub y: f64,
    pub y_min: Option<f64>,
    pub command: Vec2,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::CHANNELS;

    struct Fixed(ContactClass);

    impl SlipPredictor for Fixed {
        fn predict(&self, _: &[f64]) -> Result<ContactClass, SlipError> {
            Ok(self.0)
        }
    }

    fn frames(tick: u64) -> (SensorFrame, SensorFrame) {
        (
            SensorFrame::from_channels(tick, &[0.0; CHANNELS]),
            SensorFrame::from_channels(tick + 1, &[0.0; CHANNELS]),
        )
    }

    #[test]
    fn input_law() {
        assert_eq!(integrator_input(ContactClass::Slip), 1.0);
        assert_eq!(integrator_input(ContactClass::Contact), 0.0);
        assert_eq!(integrator_input(ContactClass::NoContact), 0.0);
    }

    #[test]
    fn integrator_arithmetic() {
        assert_eq!(update_integrator(0.0, 0.0, 0.95), 0.0);
        assert_eq!(update_integrator(1.0, 1.0, 0.95), 1.0);
        assert!((update_integrator(0.5, 1.0, 0.9) - 0.55).abs() < 1e-15);
    }

    #[test]
    fn y_min_is_first_transition_only() {
        let mut s = init_controller(&ControllerConfig::default()).unwrap();
        s.seen_stable_period = true;
        update_y_min(&mut s, Some(ContactClass::Contact), ContactClass::Slip, 0.3);
        assert_eq!(s.y_min, Some(0.3));
        update_y_min(&mut s, Some(ContactClass::Contact), ContactClass::Slip, 0.5);
        assert_eq!(s.y_min, Some(0.3));

        let mut s = init_controller(&ControllerConfig::default()).unwrap();
        s.seen_stable_period = true;
        update_y_min(&mut s, Some(ContactClass::Slip), ContactClass::Slip, 0.4);
        assert_eq!(s.y_min, None);
        s.seen_stable_period = false;
        update_y_min(&mut s, Some(ContactClass::Contact), ContactClass::Slip, 0.4);
        assert_eq!(s.y_min, None);
    }

    #[test]
    fn command_law() {
        assert_eq!(
            command_velocity(0.0, 0.0, Some(Vec2::new(1.0, 0.0)), 0.02).unwrap(),
            Vec2::ZERO
        );
        let v = command_velocity(0.5, 0.05, Some(Vec2::new(1.0, 0.0)), 0.02).unwrap();
        assert!((v.x + 0.01).abs() < 1e-15 && v.y == 0.0);
        let v = command_velocity(0.1, 0.3, Some(Vec2::new(0.0, 1.0)), 0.02).unwrap();
        assert!((v.norm() - 0.3 * 0.02).abs() < 1e-15);
        assert_eq!(command_velocity(0.7, 0.0, None, 0.02).unwrap(), Vec2::ZERO);
        assert!(matches!(
            command_velocity(0.5, 0.0, Some(Vec2::new(2.0, 0.0)), 0.02),
            Err(ControllerError::NonUnitNormal(_))
        ));
    }

    #[test]
    fn init_uses_initial_fraction() {
        let s = init_controller(&ControllerConfig::default()).unwrap();
        assert_eq!(s.y, 0.5);
        assert_eq!(s.y_min, None);
        assert!(!s.seen_stable_period);
        let full = ControllerConfig {
            initial_fraction: 1.0,
            ..ControllerConfig::default()
        };
        let c = FingerController::new(full).unwrap();
        let v = c.hold_command(Some(Vec2::new(0.0, 1.0))).unwrap();
        assert!((v.norm() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn stuck_on_contact_decays_geometrically() {
        let cfg = ControllerConfig::default();
        let mut c = FingerController::new(cfg.clone()).unwrap();
        for k in 1..=60u64 {
            let before = c.state.y;
            let (a, b) = frames(k);
            c.tick(Some((&a, &b)), &Fixed(ContactClass::Contact), Some(Vec2::new(1.0, 0.0)))
                .unwrap();
            assert_eq!(c.state.y, 0.95 * before);
            let closed_form = 0.5 * 0.95f64.powi(k as i32);
            assert!((c.state.y - closed_form).abs() <= 1e-14 * closed_form);
        }
        assert!(c.state.seen_stable_period);
        // command never drops below the floor
        assert!((c.state.last_command.norm() - 0.05 * 0.02).abs() < 1e-15);
    }

    #[test]
    fn stuck_on_slip_rises_to_one() {
        let mut c = FingerController::new(ControllerConfig::default()).unwrap();
        let mut last = c.state.y;
        for k in 0..400 {
            let (a, b) = frames(k);
            c.tick(Some((&a, &b)), &Fixed(ContactClass::Slip), Some(Vec2::new(1.0, 0.0)))
                .unwrap();
            assert!(c.state.y > last || c.state.y == 1.0);
            assert!(c.state.y <= 1.0);
            last = c.state.y;
        }
        assert!(c.state.y > 0.9999);
    }

    #[test]
    fn sensor_gap_holds_command() {
        let mut c = FingerController::new(ControllerConfig::default()).unwrap();
        let (a, b) = frames(0);
        let first = c
            .tick(Some((&a, &b)), &Fixed(ContactClass::Slip), Some(Vec2::new(1.0, 0.0)))
            .unwrap();
        let gap = c.tick(None, &Fixed(ContactClass::Slip), Some(Vec2::new(1.0, 0.0))).unwrap();
        assert!(gap.sensor_gap);
        assert_eq!(gap.command, first.command);
        assert_eq!(gap.y, first.y);
    }

    #[test]
    fn alternating_predictions_stay_on_two_cycle() {
        // Closed-form two-cycle of y' = a y + (1-a) L with L alternating 1, 0:
        // after the slip tick y_hi = (1-a)/(1-a^2) = 1/(1+a); after the leak y_lo = a/(1+a).
        let a = 0.95;
        let hi = 1.0 / (1.0 + a);
        let lo = a / (1.0 + a);
        let mut y = 0.5;
        for k in 0..2000 {
            let l = if k % 2 == 0 { 1.0 } else { 0.0 };
            let next = update_integrator(y, l, a);
            assert!((next - y).abs() <= (1.0 - a) + 1e-15);
            y = next;
        }
        // k = 1999 was a leak tick
        assert!((y - lo).abs() < 1e-12);
        assert!((update_integrator(y, 1.0, a) - hi).abs() < 1e-12);
    }
}
