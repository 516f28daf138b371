//! PID pressure servo used while collecting training data.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidGains {
    /// m/s per s.p.u. of error.
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Output magnitude limit, m/s.
    pub clamp: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 2e-5,
            ki: 8e-5,
            kd: 0.0,
            clamp: 0.006,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub gains: PidGains,
    pub integral: f64,
    pub previous_error: Option<f64>,
}

impl PidState {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
            previous_error: None,
        }
    }
}

/// Normal pressing speed (positive presses into the surface) driving the
/// measured pressure towards `target`. The integral stops accumulating while
/// the output saturates.
pub fn pid_pressure_servo(target: f64, measured: f64, state: &mut PidState, dt: f64) -> f64 {
    let g = state.gains;
    let error = target - measured;
    let derivative = match state.previous_error {
        Some(prev) if dt > 0.0 => (error - prev) / dt,
        _ => 0.0,
    };
    state.previous_error = Some(error);
    let candidate_integral = state.integral + error * dt;
    let raw = g.kp * error + g.ki * candidate_integral + g.kd * derivative;
    if raw.abs() <= g.clamp {
        state.integral = candidate_integral;
    }
    let out = g.kp * error + g.ki * state.integral + g.kd * derivative;
    out.clamp(-g.clamp, g.clamp)
}

/// Declares settling once the error has stayed within `tolerance`·target for
/// `hold` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleDetector {
    pub tolerance: f64,
    pub hold: f64,
    within_since: Option<f64>,
}

impl Default for SettleDetector {
    fn default() -> Self {
        Self {
            tolerance: 0.05,
            hold: 0.2,
            within_since: None,
        }
    }
}

impl SettleDetector {
    pub fn update(&mut self, time: f64, target: f64, measured: f64) -> bool {
        if (target - measured).abs() < self.tolerance * target.abs() {
            let since = *self.within_since.get_or_insert(time);
            time - since >= self.hold - 1e-9
        } else {
            self.within_since = None;
            false
        }
    }
}
