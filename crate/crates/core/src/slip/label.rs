//! Automatic ground-truth labelling from pressure and fingertip motion.

use serde::{Deserialize, Serialize};

use crate::class::ContactClass;
use crate::math::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelThresholds {
    /// Grounded P_dc above which the finger counts as touching, s.p.u.
    pub contact: f64,
    /// Fingertip speed above which a touching finger counts as slipping, m/s.
    pub movement: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self {
            contact: 10.0,
            movement: 0.01,
        }
    }
}

/// Labels every tick of a trial. Speed comes from the position difference
/// to the previous tick; the first tick uses the forward difference.
pub fn auto_label(
    p_dc: &[f64],
    positions: &[Vec2],
    tick_dt: f64,
    thresholds: &LabelThresholds,
) -> Vec<ContactClass> {
    assert_eq!(p_dc.len(), positions.len(), "one position per tick");
    (0..p_dc.len())
        .map(|t| {
            if p_dc[t] <= thresholds.contact {
                return ContactClass::NoContact;
            }
            let speed = match t {
                0 if positions.len() > 1 => (positions[1] - positions[0]).norm() / tick_dt,
                0 => 0.0,
                _ => (positions[t] - positions[t - 1]).norm() / tick_dt,
            };
            if speed > thresholds.movement {
                ContactClass::Slip
            } else {
                ContactClass::Contact
            }
        })
        .collect()
}
