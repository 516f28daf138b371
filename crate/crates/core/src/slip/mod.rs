//! Slip prediction: features over a two-tick tactile history, automatic
//! labelling, horizon-shifted datasets, classifiers and evaluation.

mod classifier;
mod dataset;
mod eval;
mod features;
mod label;

pub use classifier::{
    train, Classifier, FeatureTransform, Model, ModelKind, SlipPredictor, Standardizer, TrainConfig,
    MODEL_VERSION,
};
pub use dataset::{
    build_dataset, class_counts, read_dataset, split_by_trial, write_dataset, LabeledSample,
    TrialRecord,
};
pub use eval::{evaluate, EvalReport, LeadTimeStats, LEAD_THRESHOLD};
pub use features::{extract_features, tick_features, FeatureVector, FEATURE_DIM, TICK_FEATURES};
pub use label::{auto_label, LabelThresholds};

use crate::class::ContactClass;

/// Prediction horizon in control ticks (100 ms).
pub const DEFAULT_HORIZON: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum SlipError {
    #[error("frames are not consecutive: tick {previous} then {current}")]
    NonConsecutive { previous: u64, current: u64 },
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("training data has no samples of class {0}")]
    MissingClass(ContactClass),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
