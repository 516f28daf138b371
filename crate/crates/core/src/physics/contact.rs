//! Compliant normal contact with stick-slip Coulomb friction.

use serde::{Deserialize, Serialize};

use super::geometry::{ObjectSpec, Pose, Twist};
use super::world::{FingertipState, PhysicsConfig};
use crate::class::ContactClass;
use crate::math::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    Stick,
    Slip,
    #[default]
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactState {
    pub in_contact: bool,
    pub penetration: f64,
    /// Unit normal pointing from the object towards the fingertip.
    pub normal: Vec2,
    /// Closest object boundary point, world frame.
    pub point: Vec2,
    pub normal_force: f64,
    /// Force on the fingertip along `normal.perp()`.
    pub tangential_force: f64,
    pub mode: ContactMode,
    pub tangential_velocity: f64,
    pub tangential_displacement: f64,
    pub utilization: f64,
    /// Substeps spent in slip mode during the last physics step.
    #[serde(default)]
    pub slip_substeps: u32,
}

impl ContactState {
    pub fn tangent(&self) -> Vec2 {
        self.normal.perp()
    }

    /// Total contact force acting on the fingertip.
    pub fn force_on_finger(&self) -> Vec2 {
        self.normal * self.normal_force + self.tangent() * self.tangential_force
    }
}

/// Body of the grasped object as seen by the contact model.
#[derive(Debug, Clone, Copy)]
pub struct ObjectBody<'a> {
    pub spec: &'a ObjectSpec,
    pub pose: Pose,
    pub twist: Twist,
}

/// Evaluates one fingertip/object contact over an interval `dt`.
pub fn compute_contact(
    finger: &FingertipState,
    object: ObjectBody<'_>,
    previous: &ContactState,
    config: &PhysicsConfig,
    dt: f64,
) -> ContactState {
    let body_point = object.pose.to_body(finger.position);
    let (signed_dist, body_normal) = object.spec.shape.signed_distance(body_point);
    let normal = body_normal.rotate(object.pose.theta);
    let point = finger.position - normal * signed_dist;
    let penetration = finger.radius - signed_dist;

    let free = ContactState {
        normal,
        point,
        penetration: penetration.max(0.0),
        ..ContactState::default()
    };
    if penetration <= 0.0 {
        return free;
    }

    let lever = point - object.pose.position();
    let v_rel = finger.velocity - object.twist.point_velocity(lever);
    let penetration_rate = -v_rel.dot(normal);
    let normal_force =
        (config.contact_stiffness * penetration + config.contact_damping * penetration_rate).max(0.0);
    if normal_force <= 0.0 {
        return free;
    }

    let tangential_velocity = v_rel.dot(normal.perp());
    let mu_s = object.spec.friction;
    let mu_k = mu_s / config.static_kinetic_ratio;
    let cone = mu_s * normal_force;
    let k_t = config.tangential_stiffness;

    // A reversal ends the slide: friction has to pass through stick to change sign.
    let keep_sliding = previous.mode == ContactMode::Slip
        && tangential_velocity.abs() >= 0.5 * config.slip_velocity
        && tangential_velocity * previous.tangential_velocity > 0.0;

    let (mode, tangential_force, displacement) = if keep_sliding {
        let f = -tangential_velocity.signum() * mu_k * normal_force;
        (ContactMode::Slip, f, -f / k_t)
    } else {
        let s0 = if previous.mode == ContactMode::Free {
            0.0
        } else {
            previous.tangential_displacement
        };
        let s = s0 + tangential_velocity * dt;
        let trial = -(k_t * s + config.tangential_damping * tangential_velocity);
        if trial.abs() <= cone {
            (ContactMode::Stick, trial, s)
        } else if tangential_velocity.abs() >= 0.5 * config.slip_velocity {
            let f = trial.signum() * mu_k * normal_force;
            (ContactMode::Slip, f, -f / k_t)
        } else {
            // overloaded without appreciable motion: the spring anchor creeps
            // onto the cone
            let f = trial.signum() * cone;
            (ContactMode::Stick, f, -f / k_t)
        }
    };

    ContactState {
        in_contact: true,
        penetration,
        normal,
        point,
        normal_force,
        tangential_force,
        mode,
        tangential_velocity,
        tangential_displacement: displacement,
        utilization: tangential_force.abs() / cone,
        slip_substeps: 0,
    }
}

/// Ground-truth class of a contact from the simulator's own state.
pub fn ground_truth_contact_class(contact: &ContactState, config: &PhysicsConfig) -> ContactClass {
    if contact.normal_force <= 0.0 {
        ContactClass::NoContact
    } else if contact.tangential_velocity.abs() > config.slip_velocity {
        ContactClass::Slip
    } else {
        ContactClass::Contact
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::geometry::Shape;

    fn disk() -> ObjectSpec {
        ObjectSpec::new("disk", Shape::Disk { radius: 0.05 }, 0.2, 0.5)
    }

    fn finger_at(x: f64, vy: f64) -> FingertipState {
        let mut f = FingertipState::new(Vec2::new(x, 0.0), 0.01, Vec2::new(-1.0, 0.0));
        f.velocity = Vec2::new(0.0, vy);
        f
    }

    fn body(spec: &ObjectSpec) -> ObjectBody<'_> {
        ObjectBody {
            spec,
            pose: Pose::default(),
            twist: Twist::default(),
        }
    }

    #[test]
    fn separated_bodies_are_free() {
        let spec = disk();
        let c = compute_contact(
            &finger_at(0.07, 0.0),
            body(&spec),
            &ContactState::default(),
            &PhysicsConfig::default(),
            1e-3,
        );
        assert_eq!(c.normal_force, 0.0);
        assert_eq!(c.mode, ContactMode::Free);
        assert!(!c.in_contact);
    }

    #[test]
    fn linear_normal_law() {
        let spec = disk();
        let cfg = PhysicsConfig::default();
        // 1 mm overlap, no relative motion
        let c = compute_contact(
            &finger_at(0.059, 0.0),
            body(&spec),
            &ContactState::default(),
            &cfg,
            1e-3,
        );
        assert!((c.penetration - 0.001).abs() < 1e-12);
        assert!((c.normal_force - 5.0).abs() < 1e-9);
        assert_eq!(c.mode, ContactMode::Stick);
        assert!((c.normal.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cone_clamp_enters_slip() {
        let spec = disk();
        let cfg = PhysicsConfig {
            tangential_damping: 0.0,
            ..PhysicsConfig::default()
        };
        // F_N = 4 N (0.8 mm), mu F_N = 2 N; spring demand 4 N = 2 mm of displacement
        let prev = ContactState {
            in_contact: true,
            mode: ContactMode::Stick,
            tangential_displacement: 0.002,
            ..ContactState::default()
        };
        let c = compute_contact(&finger_at(0.0592, 0.0015), body(&spec), &prev, &cfg, 1e-6);
        assert!((c.normal_force - 4.0).abs() < 1e-9);
        assert_eq!(c.mode, ContactMode::Slip);
        assert!((c.tangential_force.abs() - 2.0).abs() < 1e-9);
        assert!((c.utilization - 1.0).abs() < 1e-12);

        // below the hysteresis speed the force sits on the cone without sliding
        let c = compute_contact(&finger_at(0.0592, 1e-6), body(&spec), &prev, &cfg, 1e-6);
        assert_eq!(c.mode, ContactMode::Stick);
        assert!((c.tangential_force.abs() - 2.0).abs() < 1e-9);
        assert!((c.tangential_displacement.abs() - 0.001).abs() < 1e-12);
    }

    #[test]
    fn slip_to_stick_hysteresis() {
        let spec = disk();
        let cfg = PhysicsConfig::default();
        let prev = ContactState {
            in_contact: true,
            mode: ContactMode::Slip,
            tangential_velocity: 0.003,
            ..ContactState::default()
        };
        // above half the slip threshold: keeps sliding
        let c = compute_contact(&finger_at(0.059, 0.0015), body(&spec), &prev, &cfg, 1e-4);
        assert_eq!(c.mode, ContactMode::Slip);
        // below half: sticks again
        let c = compute_contact(&finger_at(0.059, 0.0005), body(&spec), &prev, &cfg, 1e-4);
        assert_eq!(c.mode, ContactMode::Stick);
        // reversing at any speed sticks first
        let c = compute_contact(&finger_at(0.059, -0.004), body(&spec), &prev, &cfg, 1e-4);
        assert_eq!(c.mode, ContactMode::Stick);
    }

    #[test]
    fn ground_truth_classes() {
        let cfg = PhysicsConfig::default();
        let mut c = ContactState::default();
        assert_eq!(ground_truth_contact_class(&c, &cfg), ContactClass::NoContact);
        c.normal_force = 2.0;
        c.in_contact = true;
        assert_eq!(ground_truth_contact_class(&c, &cfg), ContactClass::Contact);
        c.tangential_velocity = 3.0 * cfg.slip_velocity;
        assert_eq!(ground_truth_contact_class(&c, &cfg), ContactClass::Slip);
    }
}
