use serde::{Deserialize, Serialize};

use super::contact::{compute_contact, ContactMode, ContactState, ObjectBody};
use super::geometry::{ObjectSpec, Pose, Twist};
use super::wrench::{Wrench, WrenchSchedule};
use super::PhysicsError;
use crate::math::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    /// Physics step, seconds.
    pub dt: f64,
    /// Integration substeps per physics step.
    pub substeps: u32,
    /// Gravity magnitude acting along -y.
    pub gravity: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub tangential_stiffness: f64,
    pub tangential_damping: f64,
    pub static_kinetic_ratio: f64,
    /// Relative tangential speed above which a contact counts as slipping.
    pub slip_velocity: f64,
    pub finger_speed_cap: f64,
    /// Back-drive damping of the fingertip actuators along the contact normal,
    /// N·s/m. `None` makes the fingertips perfectly rigid velocity sources.
    pub actuator_damping: Option<f64>,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            substeps: 20,
            gravity: 9.81,
            contact_stiffness: 5000.0,
            contact_damping: 50.0,
            tangential_stiffness: 2000.0,
            tangential_damping: 10.0,
            static_kinetic_ratio: 1.0,
            slip_velocity: 2e-3,
            finger_speed_cap: 0.5,
            actuator_damping: Some(750.0),
        }
    }
}

impl PhysicsConfig {
    /// Rigid fingertips, as used by the statics checks.
    pub fn rigid() -> Self {
        Self {
            actuator_damping: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(PhysicsError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("dt", self.dt)?;
        positive("contact_stiffness", self.contact_stiffness)?;
        positive("tangential_stiffness", self.tangential_stiffness)?;
        positive("slip_velocity", self.slip_velocity)?;
        positive("finger_speed_cap", self.finger_speed_cap)?;
        if self.static_kinetic_ratio < 1.0 {
            return Err(PhysicsError::InvalidConfig(
                "static/kinetic friction ratio must be >= 1".into(),
            ));
        }
        if self.substeps == 0 {
            return Err(PhysicsError::InvalidConfig("substeps must be >= 1".into()));
        }
        if self.gravity < 0.0 || self.contact_damping < 0.0 || self.tangential_damping < 0.0 {
            return Err(PhysicsError::InvalidConfig(
                "gravity and damping must be non-negative".into(),
            ));
        }
        if let Some(b) = self.actuator_damping {
            positive("actuator_damping", b)?;
        }
        Ok(())
    }
}

/// Task-space fingertip, modelled as a disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingertipState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub commanded_velocity: Vec2,
    pub radius: f64,
    /// Pointing direction of the fingertip pad; the sensor's electrode arc is
    /// centered on it.
    pub axis: Vec2,
}

impl FingertipState {
    pub fn new(position: Vec2, radius: f64, axis: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            commanded_velocity: Vec2::ZERO,
            radius,
            axis: axis.normalized().unwrap_or(Vec2::new(1.0, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time: f64,
    pub steps: u64,
    pub object: ObjectSpec,
    pub pose: Pose,
    pub twist: Twist,
    /// While set, the object is held by an immovable support.
    pub object_fixed: bool,
    pub fingers: Vec<FingertipState>,
    pub contacts: Vec<ContactState>,
    /// Wrench applied during the most recent physics step.
    pub external_wrench: Wrench,
    pub schedule: WrenchSchedule,
    pub seed: u64,
}

impl WorldState {
    pub fn new(
        object: ObjectSpec,
        fingers: Vec<FingertipState>,
        seed: u64,
    ) -> Result<Self, PhysicsError> {
        object.validate()?;
        if let Some(f) = fingers.iter().find(|f| !(f.radius > 0.0)) {
            return Err(PhysicsError::InvalidConfig(format!(
                "fingertip radius must be positive, got {}",
                f.radius
            )));
        }
        let contacts = vec![ContactState::default(); fingers.len()];
        Ok(Self {
            time: 0.0,
            steps: 0,
            pose: object.initial_pose,
            object,
            twist: Twist::default(),
            object_fixed: false,
            fingers,
            contacts,
            external_wrench: Wrench::ZERO,
            schedule: WrenchSchedule::default(),
            seed,
        })
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.object.mass * self.twist.linear().norm_sq()
            + 0.5 * self.object.moment_of_inertia() * self.twist.omega * self.twist.omega
    }

    pub fn set_commands(&mut self, commands: &[Vec2]) {
        for (f, c) in self.fingers.iter_mut().zip(commands) {
            f.commanded_velocity = *c;
        }
    }

    /// Recomputes contacts at the current configuration without advancing time.
    pub fn refresh_contacts(&mut self, config: &PhysicsConfig) {
        let body = ObjectBody {
            spec: &self.object,
            pose: self.pose,
            twist: self.twist,
        };
        for (c, f) in self.contacts.iter_mut().zip(&self.fingers) {
            *c = compute_contact(f, body, c, config, 0.0);
        }
    }

    fn check_finite(&self) -> Result<(), PhysicsError> {
        let fingers_ok = self
            .fingers
            .iter()
            .all(|f| f.position.is_finite() && f.velocity.is_finite());
        let contacts_ok = self
            .contacts
            .iter()
            .all(|c| c.normal_force.is_finite() && c.tangential_force.is_finite());
        if self.pose.is_finite() && self.twist.is_finite() && fingers_ok && contacts_ok {
            Ok(())
        } else {
            Err(PhysicsError::Diverged {
                time: self.time,
                steps: self.steps,
            })
        }
    }
}

/// Advances the world by one physics step.
///
/// Fingertips follow their commanded velocities, softened along the contact
/// normal by the actuator back-drive when configured. The object integrates
/// contact forces, gravity and the scheduled external wrench with
/// semi-implicit Euler.
pub fn step_physics(world: &WorldState, config: &PhysicsConfig) -> Result<WorldState, PhysicsError> {
    config.validate()?;
    let mut w = world.clone();
    let h = config.dt / config.substeps as f64;
    let wrench = w.schedule.evaluate(w.time, config.dt);
    let mass = w.object.mass;
    let inertia = w.object.moment_of_inertia();
    for c in &mut w.contacts {
        c.slip_substeps = 0;
    }

    for _ in 0..config.substeps {
        for (f, c) in w.fingers.iter_mut().zip(&w.contacts) {
            let mut v = f.commanded_velocity;
            if let (Some(b), true) = (config.actuator_damping, c.in_contact) {
                v += c.normal * (c.normal_force / b);
            }
            let speed = v.norm();
            if speed > config.finger_speed_cap {
                v = v * (config.finger_speed_cap / speed);
            }
            f.velocity = v;
            f.position += v * h;
        }

        let body = ObjectBody {
            spec: &w.object,
            pose: w.pose,
            twist: w.twist,
        };
        let mut force = Vec2::new(wrench.fx, wrench.fy - mass * config.gravity);
        let mut torque = wrench.torque;
        for (c, f) in w.contacts.iter_mut().zip(&w.fingers) {
            let slip_count = c.slip_substeps;
            *c = compute_contact(f, body, c, config, h);
            c.slip_substeps = slip_count + u32::from(c.mode == ContactMode::Slip);
            if c.in_contact {
                let on_object = -c.force_on_finger();
                force += on_object;
                torque += (c.point - w.pose.position()).cross(on_object);
            }
        }

        if !w.object_fixed {
            w.twist.vx += force.x / mass * h;
            w.twist.vy += force.y / mass * h;
            w.twist.omega += torque / inertia * h;
            w.pose.x += w.twist.vx * h;
            w.pose.y += w.twist.vy * h;
            w.pose.theta += w.twist.omega * h;
        }
    }

    w.external_wrench = wrench;
    w.steps += 1;
    w.time = w.steps as f64 * config.dt;
    w.check_finite()?;
    Ok(w)
}
