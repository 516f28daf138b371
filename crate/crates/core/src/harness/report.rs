//! Logs and report files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::session::{SessionPhase, TrialResult};
use super::HarnessError;
use crate::math::Vec2;
use crate::physics::{ContactMode, Pose, Twist, Wrench};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFinger {
    pub id: usize,
    pub position: Vec2,
    pub normal_force: f64,
    pub tangential_force: f64,
    pub mode: ContactMode,
    pub utilization: f64,
}

/// One line of the physics trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub pose: Pose,
    pub twist: Twist,
    pub fingers: Vec<TraceFinger>,
    pub applied_wrench: Wrench,
}

pub fn trace_records(result: &TrialResult) -> Vec<TraceRecord> {
    result
        .ticks
        .iter()
        .map(|t| TraceRecord {
            time: t.time,
            pose: t.pose,
            twist: t.twist,
            fingers: t
                .fingers
                .iter()
                .map(|f| TraceFinger {
                    id: f.id,
                    position: f.position,
                    normal_force: f.normal_force,
                    tangential_force: f.tangential_force,
                    mode: f.mode,
                    utilization: f.utilization,
                })
                .collect(),
            applied_wrench: t.applied_wrench,
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Physics trace, sensor log (when recorded) and controller log of one trial.
pub fn write_trial_logs(dir: &Path, result: &TrialResult) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let id = result.trial_id;
    write_jsonl(&dir.join(format!("trace_{id:04}.jsonl")), trace_records(result))?;
    write_jsonl(&dir.join(format!("controller_{id:04}.jsonl")), result.controller_log())?;
    if !result.sensor_log.is_empty() {
        write_jsonl(&dir.join(format!("sensor_{id:04}.jsonl")), &result.sensor_log)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrialRow {
    trial_id: u64,
    object: String,
    mass: f64,
    friction: f64,
    n_fingers: usize,
    seed: u64,
    valid: bool,
    stable: bool,
    drop_time: Option<f64>,
    steady_total_force: f64,
    steady_force_min: f64,
    steady_force_max: f64,
}

/// Per-tick time series of one trial: applied force and, per finger, normal
/// force, pressure, integrator output, speed and prediction.
pub fn write_ticks_csv(path: &Path, result: &TrialResult) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "fx".into(), "fy".into(), "force".into(), "object_y".into()];
    for i in 0..result.n_fingers {
        for col in ["fn", "p_dc", "y", "speed", "pred"] {
            header.push(format!("f{i}_{col}"));
        }
    }
    w.write_record(&header)?;
    for t in result.ticks.iter().filter(|t| t.phase == SessionPhase::Active) {
        let mut row = vec![
            format!("{:.3}", t.time),
            t.applied_wrench.fx.to_string(),
            t.applied_wrench.fy.to_string(),
            t.applied_wrench.force_magnitude().to_string(),
            t.pose.y.to_string(),
        ];
        let mut fingers: Vec<_> = t.fingers.iter().collect();
        fingers.sort_by_key(|f| f.id);
        for f in fingers {
            row.push(f.normal_force.to_string());
            row.push(f.p_dc.to_string());
            row.push(f.y.to_string());
            row.push(f.command.norm().to_string());
            row.push(f.prediction.map_or(String::new(), |c| c.name().to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ForceStats {
    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub trials: usize,
    pub valid: usize,
    pub stable: usize,
    /// Stable fraction of valid trials.
    pub stability_rate: f64,
    pub steady_total_force: Option<ForceStats>,
    pub drop_times: Vec<f64>,
}

pub fn aggregate(results: &[TrialResult]) -> AggregateReport {
    let valid: Vec<&TrialResult> = results.iter().filter(|r| r.valid()).collect();
    let stable = valid.iter().filter(|r| r.stable()).count();
    let forces: Vec<f64> = valid.iter().filter(|r| r.stable()).map(|r| r.steady_total()).collect();
    AggregateReport {
        trials: results.len(),
        valid: valid.len(),
        stable,
        stability_rate: if valid.is_empty() { 0.0 } else { stable as f64 / valid.len() as f64 },
        steady_total_force: ForceStats::from_values(&forces),
        drop_times: valid.iter().filter_map(|r| r.drop_time()).collect(),
    }
}

/// Writes `trials.csv`, `aggregate.json` and, when `detailed`, per-trial
/// tick series and logs.
pub fn export_report(dir: &Path, results: &[TrialResult], detailed: bool) -> Result<AggregateReport, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    for r in results {
        let min = r.steady_force.iter().copied().fold(f64::INFINITY, f64::min);
        let max = r.steady_force.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        w.serialize(TrialRow {
            trial_id: r.trial_id,
            object: r.object.clone(),
            mass: r.mass,
            friction: r.friction,
            n_fingers: r.n_fingers,
            seed: r.seed,
            valid: r.valid(),
            stable: r.stable(),
            drop_time: r.drop_time(),
            steady_total_force: r.steady_total(),
            steady_force_min: min,
            steady_force_max: max,
        })?;
    }
    w.flush()?;
    let report = aggregate(results);
    std::fs::write(dir.join("aggregate.json"), serde_json::to_string_pretty(&report)?)?;
    if detailed {
        for r in results {
            write_ticks_csv(&dir.join(format!("ticks_{:04}.csv", r.trial_id)), r)?;
            write_trial_logs(dir, r)?;
        }
    }
    Ok(report)
}
