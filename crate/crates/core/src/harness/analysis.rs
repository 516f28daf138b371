//! Metrics computed from trial records.

use serde::{Deserialize, Serialize};

use super::session::{SessionPhase, TickRecord, TrialResult};

/// How the integrators reacted to one scheduled pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseResponse {
    pub index: usize,
    pub start: f64,
    /// Fingers whose integrator rose at least once inside the window.
    pub rising_fingers: Vec<usize>,
    /// Delay from pulse start to the first rise, s.
    pub first_rise: Option<f64>,
}

impl PulseResponse {
    pub fn responded(&self) -> bool {
        !self.rising_fingers.is_empty()
    }
}

fn active(result: &TrialResult) -> Vec<&TickRecord> {
    result
        .ticks
        .iter()
        .filter(|t| t.phase == SessionPhase::Active)
        .collect()
}

/// Looks for integrator increases while each pulse acts or within `window`
/// seconds after it ends.
pub fn pulse_responses(result: &TrialResult, window: f64) -> Vec<PulseResponse> {
    let ticks = active(result);
    let eps = 1e-9;
    result
        .schedule
        .iter()
        .enumerate()
        .map(|(index, pulse)| {
            let mut rising = Vec::new();
            let mut first = None;
            for pair in ticks.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if b.time < pulse.start - eps || b.time > pulse.end() + window + eps {
                    continue;
                }
                for (fa, fb) in a.fingers.iter().zip(&b.fingers) {
                    if fb.y > fa.y {
                        if !rising.contains(&fb.id) {
                            rising.push(fb.id);
                        }
                        first.get_or_insert(b.time - pulse.start);
                    }
                }
            }
            rising.sort_unstable();
            PulseResponse {
                index,
                start: pulse.start,
                rising_fingers: rising,
                first_rise: first,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceMeasure {
    Normal,
    /// Magnitude of the full contact force, normal and tangential.
    Contact,
}

/// Mean force per finger over `[from, to)` seconds after release.
pub fn mean_forces(result: &TrialResult, from: f64, to: f64, measure: ForceMeasure) -> Vec<f64> {
    let mut sums = vec![0.0; result.n_fingers];
    let mut count = 0usize;
    for t in active(result) {
        if t.time >= from - 1e-9 && t.time < to - 1e-9 {
            for f in &t.fingers {
                sums[f.id] += match measure {
                    ForceMeasure::Normal => f.normal_force,
                    ForceMeasure::Contact => f.normal_force.hypot(f.tangential_force),
                };
            }
            count += 1;
        }
    }
    if count > 0 {
        for s in &mut sums {
            *s /= count as f64;
        }
    }
    sums
}

/// Force distribution settled after pulse `index`: mean per-finger contact
/// force over the `window` seconds before the next pulse (or the end of the
/// trial).
pub fn post_pulse_forces(result: &TrialResult, index: usize, window: f64) -> Vec<f64> {
    let end = match result.schedule.get(index + 1) {
        Some(next) => next.start,
        None => active(result).last().map_or(0.0, |t| t.time + 1e-6),
    };
    mean_forces(result, end - window, end, ForceMeasure::Contact)
}

/// Largest per-finger difference between two force distributions, relative to
/// the larger total.
pub fn distribution_difference(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().sum::<f64>().max(b.iter().sum::<f64>());
    if scale <= 0.0 {
        return 0.0;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Largest displacement of the object centroid from its pose at release.
pub fn max_displacement(result: &TrialResult) -> f64 {
    let ticks = active(result);
    let Some(first) = ticks.first() else {
        return 0.0;
    };
    let origin = first.pose.position();
    ticks
        .iter()
        .map(|t| (t.pose.position() - origin).norm())
        .fold(0.0, f64::max)
}
