//! Object sets and fingertip placement.

use serde::{Deserialize, Serialize};

use crate::math::Vec2;
use crate::physics::{FingertipState, ObjectSpec, Shape};

/// The four surfaces used for tactile data collection.
pub fn training_objects() -> Vec<ObjectSpec> {
    vec![
        ObjectSpec::new("ball", Shape::Disk { radius: 0.035 }, 0.06, 0.6),
        ObjectSpec::new(
            "tea_box",
            Shape::Box {
                width: 0.07,
                height: 0.11,
            },
            0.12,
            0.45,
        ),
        ObjectSpec::new("tuna_can", Shape::Disk { radius: 0.042 }, 0.17, 0.35),
        ObjectSpec::new(
            "cup_proxy",
            Shape::Box {
                width: 0.05,
                height: 0.09,
            },
            0.03,
            0.7,
        ),
    ]
}

pub const TEST_FRICTIONS: [f64; 3] = [0.3, 0.5, 0.8];

/// Parametric test objects: masses log-spaced over [mass_lo, mass_hi], friction
/// cycling through `TEST_FRICTIONS`, shapes cycling disk/box/hexagon/octagon,
/// grasp widths growing with mass.
pub fn generate_objects(count: usize, mass_lo: f64, mass_hi: f64) -> Vec<ObjectSpec> {
    (0..count)
        .map(|i| {
            let frac = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let mass = mass_lo * (mass_hi / mass_lo).powf(frac);
            let friction = TEST_FRICTIONS[i % TEST_FRICTIONS.len()];
            let half_width = 0.015 + 0.03 * frac;
            let shape = match i % 4 {
                0 => Shape::Disk { radius: half_width },
                1 => Shape::Box {
                    width: 2.0 * half_width,
                    height: 2.0 * half_width * 1.4,
                },
                2 => Shape::RegularPolygon {
                    sides: 6,
                    circumradius: half_width / (std::f64::consts::PI / 6.0).cos(),
                },
                _ => Shape::RegularPolygon {
                    sides: 8,
                    circumradius: half_width / (std::f64::consts::PI / 8.0).cos(),
                },
            };
            ObjectSpec::new(format!("object_{i:02}"), shape, mass, friction)
        })
        .collect()
}

/// Where a fingertip starts and which way it presses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub position: Vec2,
    /// Outward surface normal at the intended contact (object → finger).
    pub normal: Vec2,
}

/// Contact directions around the object centroid, body frame, radians.
/// Two fingers pinch horizontally; more fingers oppose a thumb on the left with
/// the rest fanned across the right side.
pub fn placement_angles(n_fingers: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    match n_fingers {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![0.0, PI],
        n => {
            let others = n - 1;
            let spread = (25.0 + 5.0 * (others as f64 - 2.0)).to_radians();
            let mut angles: Vec<f64> = (0..others)
                .map(|k| spread - 2.0 * spread * k as f64 / (others - 1) as f64)
                .collect();
            angles.push(PI);
            angles
        }
    }
}

/// Places fingertip disks `gap` away from the surface along each contact direction.
pub fn place_fingers(object: &ObjectSpec, n_fingers: usize, finger_radius: f64, gap: f64) -> Vec<Placement> {
    let pose = object.initial_pose;
    placement_angles(n_fingers)
        .into_iter()
        .map(|phi| {
            let dir = Vec2::from_angle(phi);
            let surface = dir * object.shape.ray_extent(dir);
            let (_, n_body) = object.shape.signed_distance(surface + dir * 1e-6);
            let body_center = surface + n_body * (finger_radius + gap);
            Placement {
                position: pose.to_world(body_center),
                normal: n_body.rotate(pose.theta),
            }
        })
        .collect()
}

pub fn fingertips(placements: &[Placement], radius: f64) -> Vec<FingertipState> {
    placements
        .iter()
        .map(|p| FingertipState::new(p.position, radius, -p.normal))
        .collect()
}

/// Smallest total normal force per finger for a symmetric horizontal pinch.
pub fn pinch_minimum_force(mass: f64, friction: f64, gravity: f64) -> f64 {
    mass * gravity / (2.0 * friction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_spans_requested_range() {
        let objs = generate_objects(12, 0.01, 0.4);
        assert_eq!(objs.len(), 12);
        assert!((objs[0].mass - 0.01).abs() < 1e-15);
        assert!((objs[11].mass - 0.4).abs() < 1e-12);
        for o in &objs {
            o.validate().unwrap();
        }
        for mu in TEST_FRICTIONS {
            assert!(objs.iter().any(|o| o.friction == mu));
        }
    }

    #[test]
    fn pinch_placement_is_antipodal() {
        let disk = ObjectSpec::new("d", Shape::Disk { radius: 0.04 }, 0.2, 0.5);
        let p = place_fingers(&disk, 2, 0.01, 0.001);
        assert!((p[0].position.x - 0.051).abs() < 1e-12);
        assert!((p[1].position.x + 0.051).abs() < 1e-12);
        assert!((p[0].normal.x - 1.0).abs() < 1e-12);
        assert!((p[1].normal.x + 1.0).abs() < 1e-12);
    }

    #[test]
    fn placements_touch_the_right_faces() {
        for obj in generate_objects(8, 0.01, 0.4) {
            for n in 2..=5 {
                for p in place_fingers(&obj, n, 0.01, 0.001) {
                    let (d, normal) = obj.shape.signed_distance(obj.initial_pose.to_body(p.position));
                    assert!((d - 0.011).abs() < 1e-9, "{} n={n}: d={d}", obj.name);
                    assert!((normal - p.normal).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn minimum_force_value() {
        assert!((pinch_minimum_force(0.2, 0.5, 9.81) - 1.962).abs() < 1e-12);
    }
}
