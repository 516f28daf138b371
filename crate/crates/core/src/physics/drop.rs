use serde::{Deserialize, Serialize};

/// Object falls further than this below its starting height.
pub const DROP_HEIGHT: f64 = 0.05;
/// Longest tolerated stretch with no finger touching the object, seconds.
pub const CONTACT_LOSS_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub y: f64,
    pub contacts: usize,
}

/// True iff the object was dropped somewhere along the trajectory.
pub fn detect_drop(trajectory: &[TrajectorySample], initial_y: f64) -> bool {
    drop_time(trajectory, initial_y).is_some()
}

/// Time at which the drop criterion first fires.
pub fn drop_time(trajectory: &[TrajectorySample], initial_y: f64) -> Option<f64> {
    let mut lost_since: Option<f64> = None;
    for s in trajectory {
        if initial_y - s.y > DROP_HEIGHT {
            return Some(s.time);
        }
        if s.contacts == 0 {
            let since = *lost_since.get_or_insert(s.time);
            if s.time - since > CONTACT_LOSS_LIMIT + 1e-9 {
                return Some(s.time);
            }
        } else {
            lost_since = None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, f: impl Fn(f64) -> (f64, usize)) -> Vec<TrajectorySample> {
        (0..n)
            .map(|k| {
                let t = k as f64 * 0.01;
                let (y, contacts) = f(t);
                TrajectorySample { time: t, y, contacts }
            })
            .collect()
    }

    #[test]
    fn static_object_is_kept() {
        assert!(!detect_drop(&samples(100, |_| (0.0, 2)), 0.0));
    }

    #[test]
    fn free_fall_is_a_drop() {
        let traj = samples(21, |t| (-0.5 * 9.81 * t * t, 0));
        assert!(detect_drop(&traj, 0.0));
    }

    #[test]
    fn short_loss_and_small_sag_are_kept() {
        let traj = samples(100, |t| {
            let contacts = if (0.3..0.32).contains(&t) { 0 } else { 2 };
            (-0.008 * (t / 1.0).min(1.0), contacts)
        });
        assert!(!detect_drop(&traj, 0.0));
    }

    #[test]
    fn long_loss_is_a_drop_even_without_falling() {
        let traj = samples(100, |t| (0.0, if t > 0.5 { 0 } else { 1 }));
        assert!(detect_drop(&traj, 0.0));
    }
}
