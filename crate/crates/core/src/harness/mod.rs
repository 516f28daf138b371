//! Experiment harness: data collection, grasp trials, reports and the live server.

pub mod analysis;
pub mod collect;
pub mod config;
pub mod objects;
pub mod perturb;
pub mod pid;
pub mod report;
pub mod rig;
pub mod session;

pub use collect::{collect_training_data, CollectedData, CollectionProtocol, HOLDOUT_EVERY};
pub use config::{GraspConfig, SimConfig};
pub use objects::{generate_objects, pinch_minimum_force, place_fingers, training_objects, Placement};
pub use perturb::{irregular_schedule, with_repeated_pulse, ScheduleParams};
pub use report::{aggregate, export_report, write_trial_logs, AggregateReport};
pub use pid::{pid_pressure_servo, PidGains, PidState, SettleDetector};
pub use session::{
    run_grasp_trial, run_master_slave, run_perturbation_trial, GraspSession, GraspSpec, OverrideAction,
    OverrideSegment, SessionPhase, TickRecord, TrialOutcome, TrialResult,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    Physics(#[from] crate::physics::PhysicsError),
    #[error(transparent)]
    Sensor(#[from] crate::sensor::SensorError),
    #[error(transparent)]
    Controller(#[from] crate::controller::ControllerError),
    #[error(transparent)]
    Slip(#[from] crate::slip::SlipError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
