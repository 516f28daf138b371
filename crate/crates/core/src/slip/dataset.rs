use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{extract_features, FEATURE_DIM};
use super::SlipError;
use crate::class::ContactClass;
use crate::sensor::SensorFrame;

/// Grounded frames and per-tick labels of one finger in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub finger_id: usize,
    pub frames: Vec<SensorFrame>,
    pub labels: Vec<ContactClass>,
}

/// Features at `tick`, labelled with the class `horizon` ticks later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub trial_id: u64,
    pub finger_id: usize,
    pub tick: u64,
    pub features: Vec<f64>,
    pub label: ContactClass,
}

pub fn build_dataset(records: &[TrialRecord], horizon: usize) -> Result<Vec<LabeledSample>, SlipError> {
    let mut out = Vec::new();
    for rec in records {
        if rec.frames.len() != rec.labels.len() {
            return Err(SlipError::Dataset(format!(
                "trial {} finger {}: {} frames but {} labels",
                rec.trial_id,
                rec.finger_id,
                rec.frames.len(),
                rec.labels.len()
            )));
        }
        let n = rec.frames.len();
        if n < horizon + 2 {
            log::warn!(
                "trial {} finger {} has {n} ticks, shorter than horizon + 2; skipped",
                rec.trial_id,
                rec.finger_id
            );
            continue;
        }
        for t in 1..n - horizon {
            let f = extract_features(&rec.frames[t - 1], &rec.frames[t])?;
            out.push(LabeledSample {
                trial_id: rec.trial_id,
                finger_id: rec.finger_id,
                tick: f.tick,
                features: f.values,
                label: rec.labels[t + horizon],
            });
        }
    }
    Ok(out)
}

/// Deterministic trial-level split: every `every`-th trial is held out.
pub fn split_by_trial(samples: &[LabeledSample], every: u64) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    samples
        .iter()
        .cloned()
        .partition(|s| every == 0 || s.trial_id % every != every - 1)
}

pub fn class_counts(samples: &[LabeledSample]) -> [usize; 3] {
    let mut counts = [0; 3];
    for s in samples {
        counts[s.label.index()] += 1;
    }
    counts
}

pub fn write_dataset(path: &Path, samples: &[LabeledSample]) -> Result<(), SlipError> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledSample>, SlipError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: LabeledSample = serde_json::from_str(&line)?;
        if s.features.len() != FEATURE_DIM {
            return Err(SlipError::Dataset(format!(
                "line {}: expected {FEATURE_DIM} features, got {}",
                i + 1,
                s.features.len()
            )));
        }
        out.push(s);
    }
    Ok(out)
}
