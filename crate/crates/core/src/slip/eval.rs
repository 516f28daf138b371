use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classifier::SlipPredictor;
use super::dataset::LabeledSample;
use super::SlipError;
use crate::class::ContactClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadTimeStats {
    /// Ground-truth slip onsets with a prediction available at the onset tick.
    pub onsets: usize,
    /// Onsets where slip was not predicted at the onset tick.
    pub missed: usize,
    /// Lead per onset in ticks; missed onsets count as 0.
    pub leads: Vec<u64>,
    pub median: f64,
    pub fraction_at_least: f64,
    /// Threshold used for `fraction_at_least`.
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `confusion[true][predicted]`, rows and columns in `ContactClass::ALL` order.
    pub confusion: [[u64; 3]; 3],
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub balanced_accuracy: f64,
    pub lead: LeadTimeStats,
}

impl EvalReport {
    pub fn class_count(&self, class: ContactClass) -> u64 {
        self.confusion[class.index()].iter().sum()
    }
}

/// Lead-time threshold reported alongside the distribution.
pub const LEAD_THRESHOLD: u64 = 5;

pub fn evaluate(
    predictor: &impl SlipPredictor,
    samples: &[LabeledSample],
    horizon: usize,
) -> Result<EvalReport, SlipError> {
    if samples.is_empty() {
        return Err(SlipError::Dataset("cannot evaluate on an empty dataset".into()));
    }
    let mut confusion = [[0u64; 3]; 3];
    let mut sequences: BTreeMap<(u64, usize), Vec<(u64, ContactClass, ContactClass)>> =
        BTreeMap::new();
    for s in samples {
        let p = predictor.predict(&s.features)?;
        confusion[s.label.index()][p.index()] += 1;
        sequences
            .entry((s.trial_id, s.finger_id))
            .or_default()
            .push((s.tick, s.label, p));
    }

    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut recall_sum = 0.0;
    let mut present = 0;
    for c in 0..3 {
        let row: u64 = confusion[c].iter().sum();
        let col: u64 = (0..3).map(|r| confusion[r][c]).sum();
        precision[c] = if col > 0 { confusion[c][c] as f64 / col as f64 } else { 0.0 };
        if row > 0 {
            recall[c] = confusion[c][c] as f64 / row as f64;
            recall_sum += recall[c];
            present += 1;
        }
    }
    let balanced_accuracy = recall_sum / present as f64;

    let mut leads = Vec::new();
    let mut missed = 0;
    for seq in sequences.values_mut() {
        seq.sort_by_key(|e| e.0);
        let (found, miss) = onset_leads(seq, horizon as u64);
        leads.extend(found);
        missed += miss;
    }
    let lead = summarize(leads, missed);
    Ok(EvalReport {
        confusion,
        precision,
        recall,
        balanced_accuracy,
        lead,
    })
}

/// Leads for every slip onset in one finger's sample sequence. A sample at tick
/// `t` carries the ground truth for tick `t + horizon` and a prediction made at `t`.
fn onset_leads(seq: &[(u64, ContactClass, ContactClass)], horizon: u64) -> (Vec<u64>, usize) {
    let truth: BTreeMap<u64, ContactClass> = seq.iter().map(|&(t, l, _)| (t + horizon, l)).collect();
    let pred: BTreeMap<u64, ContactClass> = seq.iter().map(|&(t, _, p)| (t, p)).collect();
    let mut leads = Vec::new();
    let mut missed = 0;
    for (&tick, &class) in &truth {
        if class != ContactClass::Slip || tick == 0 {
            continue;
        }
        match truth.get(&(tick - 1)) {
            Some(&prev) if prev != ContactClass::Slip => {}
            _ => continue,
        }
        match pred.get(&tick) {
            None => continue,
            Some(&p) if p != ContactClass::Slip => {
                missed += 1;
                leads.push(0);
            }
            Some(_) => {
                let mut u = tick;
                while u > 0 && pred.get(&(u - 1)) == Some(&ContactClass::Slip) {
                    u -= 1;
                }
                leads.push(tick - u);
            }
        }
    }
    (leads, missed)
}

fn summarize(leads: Vec<u64>, missed: usize) -> LeadTimeStats {
    let onsets = leads.len();
    let mut sorted = leads.clone();
    sorted.sort_unstable();
    let median = match onsets {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) as f64,
    };
    let fraction_at_least = if onsets == 0 {
        0.0
    } else {
        leads.iter().filter(|&&l| l >= LEAD_THRESHOLD).count() as f64 / onsets as f64
    };
    LeadTimeStats {
        onsets,
        missed,
        leads,
        median,
        fraction_at_least,
        threshold: LEAD_THRESHOLD,
    }
}
