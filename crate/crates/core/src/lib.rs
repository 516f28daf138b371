//! Deterministic planar grasp simulator with independent, tactile slip-driven
//! finger controllers.

pub mod class;
pub mod controller;
pub mod harness;
pub mod math;
pub mod physics;
pub mod rng;
pub mod serve;
pub mod sensor;
pub mod slip;

pub use class::ContactClass;
pub use math::Vec2;
