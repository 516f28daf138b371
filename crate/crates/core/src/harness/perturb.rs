//! Irregular external-force schedules.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::physics::{Envelope, ScheduledWrench, Wrench};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleParams {
    pub count: usize,
    /// Quiet time after release before the first pulse, s.
    pub settle: f64,
    /// Peak force magnitude range, N.
    pub magnitude: (f64, f64),
    pub duration: (f64, f64),
    /// Quiet time between pulses, s.
    pub gap: (f64, f64),
    /// Schedules are squeezed to end this long before the horizon.
    pub horizon: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            count: 8,
            settle: 3.0,
            magnitude: (0.5, 3.0),
            duration: (0.1, 1.0),
            gap: (1.0, 4.0),
            horizon: 28.0,
        }
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.gen();
    lo + (hi - lo) * u
}

/// Random raised-cosine force pulses in random planar directions, no torque.
pub fn irregular_schedule(params: &ScheduleParams, seed: u64, index: u64) -> Vec<ScheduledWrench> {
    let mut rng = stream(seed, Purpose::Perturbation, index);
    let mut pulses: Vec<(f64, f64, f64, f64)> = (0..params.count)
        .map(|_| {
            let magnitude = uniform(&mut rng, params.magnitude);
            let angle = uniform(&mut rng, (0.0, std::f64::consts::TAU));
            let duration = uniform(&mut rng, params.duration);
            let gap = uniform(&mut rng, params.gap);
            (magnitude, angle, duration, gap)
        })
        .collect();
    let busy: f64 = pulses.iter().map(|p| p.2).sum();
    let gaps: f64 = pulses.iter().map(|p| p.3).sum();
    let room = params.horizon - params.settle - busy;
    if gaps > room && gaps > 0.0 {
        let s = room.max(0.0) / gaps;
        for p in &mut pulses {
            p.3 *= s;
        }
    }
    let mut t = params.settle;
    pulses
        .into_iter()
        .map(|(magnitude, angle, duration, gap)| {
            let w = ScheduledWrench {
                start: t,
                duration,
                wrench: Wrench::new(magnitude * angle.cos(), magnitude * angle.sin(), 0.0),
                envelope: Envelope::RaisedCosine,
            };
            t += duration + gap;
            w
        })
        .collect()
}

/// Replaces the pulses at `indices` with `pulse`, keeping their start times.
pub fn with_repeated_pulse(schedule: &[ScheduledWrench], indices: &[usize], pulse: ScheduledWrench) -> Vec<ScheduledWrench> {
    let mut out = schedule.to_vec();
    for &i in indices {
        if let Some(slot) = out.get_mut(i) {
            let start = slot.start;
            *slot = ScheduledWrench { start, ..pulse };
        }
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    // Shift later pulses so nothing overlaps.
    for i in 1..out.len() {
        let prev_end = out[i - 1].end();
        if out[i].start < prev_end {
            out[i].start = prev_end;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_ordered_within_bounds() {
        let p = ScheduleParams::default();
        for idx in 0..20 {
            let s = irregular_schedule(&p, 7, idx);
            assert_eq!(s.len(), p.count);
            assert!((s[0].start - p.settle).abs() < 1e-12);
            for w in s.windows(2) {
                assert!(w[1].start >= w[0].end() - 1e-9);
            }
            assert!(s.last().unwrap().end() <= p.horizon + 1e-9);
            for w in &s {
                let m = w.wrench.force_magnitude();
                assert!(m >= p.magnitude.0 - 1e-12 && m <= p.magnitude.1 + 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_schedule() {
        let p = ScheduleParams::default();
        assert_eq!(irregular_schedule(&p, 3, 1), irregular_schedule(&p, 3, 1));
        assert_ne!(irregular_schedule(&p, 3, 1), irregular_schedule(&p, 3, 2));
    }

    #[test]
    fn repeated_pulse_keeps_gaps() {
        let p = ScheduleParams::default();
        let base = irregular_schedule(&p, 1, 0);
        let pulse = ScheduledWrench {
            start: 0.0,
            duration: 0.5,
            wrench: Wrench::new(2.0, 0.0, 0.0),
            envelope: Envelope::RaisedCosine,
        };
        let s = with_repeated_pulse(&base, &[0, 3, 7], pulse);
        assert_eq!(s.iter().filter(|w| w.wrench == pulse.wrench).count(), 3);
        for w in s.windows(2) {
            assert!(w[1].start >= w[0].end() - 1e-9);
        }
    }
}
