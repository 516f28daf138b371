//! Planar rigid-body world: one object, N task-space fingertips.

mod contact;
mod drop;
mod geometry;
mod world;
mod wrench;

pub use contact::{compute_contact, ground_truth_contact_class, ContactMode, ContactState, ObjectBody};
pub use drop::{detect_drop, drop_time, TrajectorySample, CONTACT_LOSS_LIMIT, DROP_HEIGHT};
pub use geometry::{ObjectSpec, Pose, Shape, Twist};
pub use world::{step_physics, FingertipState, PhysicsConfig, WorldState};
pub use wrench::{apply_external_wrench, Envelope, ScheduledWrench, Wrench, WrenchSchedule};

#[derive(Debug, thiserror::Error)]
pub enum PhysicsError {
    #[error("invalid physics configuration: {0}")]
    InvalidConfig(String),
    #[error("simulation diverged at t={time:.4}s (step {steps})")]
    Diverged { time: f64, steps: u64 },
}
