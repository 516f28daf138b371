//! Scheduled external wrenches acting on the object.

use serde::{Deserialize, Serialize};

use super::world::WorldState;
use super::PhysicsError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    pub torque: f64,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        fx: 0.0,
        fy: 0.0,
        torque: 0.0,
    };

    pub fn new(fx: f64, fy: f64, torque: f64) -> Self {
        Self { fx, fy, torque }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.fx * s, self.fy * s, self.torque * s)
    }

    pub fn force_magnitude(&self) -> f64 {
        self.fx.hypot(self.fy)
    }

    pub fn is_finite(&self) -> bool {
        self.fx.is_finite() && self.fy.is_finite() && self.torque.is_finite()
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, o: Wrench) -> Wrench {
        Wrench::new(self.fx + o.fx, self.fy + o.fy, self.torque + o.torque)
    }
}

/// Time profile of a scheduled wrench over its active interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// Full wrench for the whole interval.
    #[default]
    Constant,
    /// Smooth push: rises from zero to the peak at mid-interval and back.
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledWrench {
    pub start: f64,
    pub duration: f64,
    pub wrench: Wrench,
    #[serde(default)]
    pub envelope: Envelope,
}

impl ScheduledWrench {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Contribution at physics-step start time `t`; `dt` sets the half-step
    /// tolerance applied at the interval edges.
    pub fn at(&self, t: f64, dt: f64) -> Wrench {
        let half = 0.5 * dt;
        if t < self.start - half || t >= self.end() - half {
            return Wrench::ZERO;
        }
        match self.envelope {
            Envelope::Constant => self.wrench,
            Envelope::RaisedCosine => {
                let phase = ((t - self.start) / self.duration).clamp(0.0, 1.0);
                self.wrench
                    .scaled(0.5 * (1.0 - (std::f64::consts::TAU * phase).cos()))
            }
        }
    }
}

/// Overlapping entries are summed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WrenchSchedule {
    pub entries: Vec<ScheduledWrench>,
}

impl WrenchSchedule {
    pub fn evaluate(&self, t: f64, dt: f64) -> Wrench {
        self.entries
            .iter()
            .fold(Wrench::ZERO, |acc, e| acc + e.at(t, dt))
    }

    pub fn push(&mut self, entry: ScheduledWrench) {
        self.entries.push(entry);
    }
}

/// Schedules `wrench` on the object starting at the world's current time.
pub fn apply_external_wrench(
    world: &mut WorldState,
    wrench: Wrench,
    duration: f64,
    envelope: Envelope,
) -> Result<ScheduledWrench, PhysicsError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(PhysicsError::InvalidConfig(format!(
            "wrench duration must be positive, got {duration}"
        )));
    }
    if !wrench.is_finite() {
        return Err(PhysicsError::InvalidConfig("wrench must be finite".into()));
    }
    let entry = ScheduledWrench {
        start: world.time,
        duration,
        wrench,
        envelope,
    };
    world.schedule.push(entry);
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_pulse_edges() {
        let e = ScheduledWrench {
            start: 0.5,
            duration: 0.5,
            wrench: Wrench::new(0.0, -2.0, 0.0),
            envelope: Envelope::Constant,
        };
        let dt = 1e-3;
        assert_eq!(e.at(499.0 * dt, dt), Wrench::ZERO);
        assert_eq!(e.at(500.0 * dt, dt).fy, -2.0);
        assert_eq!(e.at(999.0 * dt, dt).fy, -2.0);
        assert_eq!(e.at(1000.0 * dt, dt), Wrench::ZERO);
        let active = (0..2000).filter(|&k| e.at(k as f64 * dt, dt) != Wrench::ZERO).count();
        assert_eq!(active, 500);
    }

    #[test]
    fn overlapping_entries_sum() {
        let mut s = WrenchSchedule::default();
        for _ in 0..2 {
            s.push(ScheduledWrench {
                start: 0.0,
                duration: 1.0,
                wrench: Wrench::new(1.0, 0.0, 0.1),
                envelope: Envelope::Constant,
            });
        }
        let w = s.evaluate(0.5, 1e-3);
        assert_eq!(w, Wrench::new(2.0, 0.0, 0.2));
    }

    #[test]
    fn raised_cosine_peaks_mid_interval() {
        let e = ScheduledWrench {
            start: 1.0,
            duration: 0.4,
            wrench: Wrench::new(3.0, 0.0, 0.0),
            envelope: Envelope::RaisedCosine,
        };
        assert!((e.at(1.2, 1e-3).fx - 3.0).abs() < 1e-12);
        assert!(e.at(1.0, 1e-3).fx.abs() < 1e-12);
    }
}
