//! Scripted tactile data collection: approach, servo to a target pressure,
//! load tangentially into incipient slip, survey across the surface, hold,
//! retract. The object rests on a fixed support throughout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::objects::{fingertips, place_fingers, training_objects};
use super::pid::{pid_pressure_servo, PidGains, PidState, SettleDetector};
use super::rig::{advance, SensorRig};
use super::HarnessError;
use crate::math::Vec2;
use crate::physics::{ObjectSpec, WorldState};
use crate::rng::{stream, Purpose};
use crate::slip::{auto_label, TrialRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectionProtocol {
    /// Grounded P_dc targets, s.p.u.
    pub target_pressures: Vec<f64>,
    pub trials_per_pressure: usize,
    pub fingers: usize,
    pub objects: Vec<ObjectSpec>,
    pub pid: PidGains,
    pub approach_speed: f64,
    pub approach_timeout: f64,
    pub servo_time_limit: f64,
    /// Time taken to load the contact tangentially up to the friction limit, s
    /// (uniform range).
    pub load_time: (f64, f64),
    /// Extra loading time past the predicted friction limit, s (uniform range).
    pub creep: (f64, f64),
    /// Survey speed range, m/s.
    pub survey_speed: (f64, f64),
    pub survey_duration: (f64, f64),
    pub survey_travel_max: f64,
    /// Time spent backing off tangentially after the survey, unloading the
    /// contact from the friction limit, s.
    pub relax_time: f64,
    pub hold_time: f64,
    pub retract_speed: f64,
    pub retract_time: f64,
}

impl Default for CollectionProtocol {
    fn default() -> Self {
        Self {
            target_pressures: vec![100.0, 200.0, 300.0],
            trials_per_pressure: 9,
            fingers: 3,
            objects: training_objects(),
            pid: PidGains::default(),
            approach_speed: 0.004,
            approach_timeout: 2.0,
            servo_time_limit: 2.0,
            load_time: (0.5, 0.9),
            creep: (0.0, 0.08),
            survey_speed: (0.015, 0.04),
            survey_duration: (0.6, 1.0),
            survey_travel_max: 0.02,
            relax_time: 0.15,
            hold_time: 0.4,
            retract_speed: 0.003,
            retract_time: 0.5,
        }
    }
}

impl CollectionProtocol {
    pub fn trial_count(&self) -> usize {
        self.objects.len() * self.target_pressures.len() * self.trials_per_pressure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Baseline,
    Approach,
    Servo,
    Load,
    Survey,
    Relax,
    Hold,
    Retract,
    Done,
}

/// Per-finger random choices, drawn up front in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerScript {
    pub direction: f64,
    pub load_time: f64,
    pub creep: f64,
    pub survey_speed: f64,
    pub survey_duration: f64,
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.gen();
    lo + (hi - lo) * u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionTrial {
    pub trial_id: u64,
    pub object: String,
    pub target_pressure: f64,
    pub scripts: Vec<FingerScript>,
    /// Whether each finger's servo met its settle criterion before loading.
    pub settled: Vec<bool>,
    /// Per finger: each phase entered and the tick it started.
    pub transitions: Vec<Vec<(Phase, u64)>>,
    pub ticks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectedData {
    pub trials: Vec<CollectionTrial>,
    pub records: Vec<TrialRecord>,
}

struct FingerRun {
    phase: Phase,
    since: f64,
    pid: PidState,
    settle: SettleDetector,
    settled: bool,
    transitions: Vec<(Phase, u64)>,
    load_speed: f64,
    load_time: f64,
    relax_speed: f64,
    frames: Vec<crate::sensor::SensorFrame>,
    positions: Vec<Vec2>,
}

/// Runs every trial of the protocol. Trial ids run object-major, then
/// pressure, then repetition.
pub fn collect_training_data(config: &SimConfig, seed: u64) -> Result<CollectedData, HarnessError> {
    config.validate()?;
    let protocol = &config.protocol;
    let mut data = CollectedData {
        trials: Vec::new(),
        records: Vec::new(),
    };
    let mut trial_id = 0u64;
    for object in &protocol.objects {
        for &target in &protocol.target_pressures {
            for _ in 0..protocol.trials_per_pressure {
                let (trial, records) = run_collection_trial(config, object, target, trial_id, seed)?;
                log::debug!("collection trial {trial_id}: {} ticks", trial.ticks);
                data.trials.push(trial);
                data.records.extend(records);
                trial_id += 1;
            }
        }
    }
    Ok(data)
}

pub fn run_collection_trial(
    config: &SimConfig,
    object: &ObjectSpec,
    target: f64,
    trial_id: u64,
    seed: u64,
) -> Result<(CollectionTrial, Vec<TrialRecord>), HarnessError> {
    let protocol = &config.protocol;
    let grasp = &config.grasp;
    let n = protocol.fingers;
    let tick_dt = config.tick_dt();
    let placements = place_fingers(object, n, grasp.finger_radius, grasp.gap);

    let mut rng = stream(seed, Purpose::Protocol, trial_id);
    let sensor_seed: u64 = rng.gen();
    let scripts: Vec<FingerScript> = (0..n)
        .map(|_| {
            let direction = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let load_time = uniform(&mut rng, protocol.load_time);
            let creep = uniform(&mut rng, protocol.creep);
            let survey_speed = uniform(&mut rng, protocol.survey_speed);
            let mut survey_duration = uniform(&mut rng, protocol.survey_duration);
            if survey_speed > 0.0 {
                survey_duration = survey_duration.min(protocol.survey_travel_max / survey_speed);
            }
            FingerScript {
                direction,
                load_time,
                creep,
                survey_speed,
                survey_duration,
            }
        })
        .collect();

    let mut world = WorldState::new(object.clone(), fingertips(&placements, grasp.finger_radius), seed)?;
    world.object_fixed = true;
    world.refresh_contacts(&config.physics);
    let mut rig = SensorRig::new(&config.sensor, sensor_seed, n)?;

    // Tangential travel that brings the target pressure to the friction limit.
    let limit_travel = |mu: f64| {
        mu * (target / config.sensor.pressure_gain) / config.physics.tangential_stiffness
    };

    let mut runs: Vec<FingerRun> = scripts
        .iter()
        .map(|s| FingerRun {
            phase: Phase::Baseline,
            since: 0.0,
            pid: PidState::new(protocol.pid),
            settle: SettleDetector::default(),
            settled: false,
            transitions: vec![(Phase::Baseline, 0)],
            load_speed: limit_travel(object.friction) / s.load_time,
            load_time: s.load_time + s.creep,
            relax_speed: limit_travel(object.friction) / protocol.relax_time,
            frames: Vec::new(),
            positions: Vec::new(),
        })
        .collect();

    let mut slip = vec![0.0; n];
    let mut tick = 0u64;
    let max_ticks = 60_000u64;
    while runs.iter().any(|r| r.phase != Phase::Done) {
        if tick >= max_ticks {
            return Err(HarnessError::Protocol(format!("trial {trial_id} did not finish")));
        }
        let time = tick as f64 * tick_dt;
        let sensed = rig.sense(&world, &slip, tick);
        if tick + 1 == grasp.baseline_ticks as u64 {
            rig.capture()?;
        }
        let mut commands = vec![Vec2::ZERO; n];
        for i in 0..n {
            let run = &mut runs[i];
            let script = &scripts[i];
            let approach = placements[i].normal;
            let contact = &world.contacts[i];
            let normal = if contact.in_contact { contact.normal } else { approach };
            let tangent = normal.perp() * script.direction;
            let p_dc = sensed[i].grounded.as_ref().map(|f| f.p_dc);
            if let Some(g) = &sensed[i].grounded {
                run.frames.push(g.clone());
                run.positions.push(world.fingers[i].position);
            }
            let elapsed = time - run.since;
            let mut next = None;
            let mut command = Vec2::ZERO;
            let servo = |run: &mut FingerRun| {
                -normal * pid_pressure_servo(target, p_dc.unwrap_or(0.0), &mut run.pid, tick_dt)
            };
            match run.phase {
                Phase::Baseline => {
                    if p_dc.is_some() {
                        next = Some(Phase::Approach);
                    }
                }
                Phase::Approach => {
                    if p_dc.unwrap_or(0.0) > config.labels.contact {
                        next = Some(Phase::Servo);
                    } else if elapsed > protocol.approach_timeout {
                        return Err(HarnessError::Protocol(format!(
                            "trial {trial_id} finger {i}: no contact after {elapsed:.2} s"
                        )));
                    } else {
                        command = -approach * protocol.approach_speed;
                    }
                }
                Phase::Servo => {
                    if run.settle.update(time, target, p_dc.unwrap_or(0.0)) {
                        run.settled = true;
                        next = Some(Phase::Load);
                    } else if elapsed > protocol.servo_time_limit {
                        log::warn!("trial {trial_id} finger {i}: servo did not settle");
                        next = Some(Phase::Load);
                    }
                    command = servo(run);
                }
                Phase::Load => {
                    if elapsed >= run.load_time {
                        next = Some(Phase::Survey);
                    }
                    command = servo(run) + tangent * run.load_speed;
                }
                Phase::Survey => {
                    if elapsed >= script.survey_duration {
                        next = Some(Phase::Relax);
                    } else {
                        command = servo(run) + tangent * script.survey_speed;
                    }
                }
                Phase::Relax => {
                    if elapsed >= protocol.relax_time {
                        next = Some(Phase::Hold);
                    } else {
                        command = servo(run) - tangent * run.relax_speed;
                    }
                }
                Phase::Hold => {
                    if elapsed >= protocol.hold_time {
                        next = Some(Phase::Retract);
                    } else {
                        command = servo(run);
                    }
                }
                Phase::Retract => {
                    if elapsed >= protocol.retract_time {
                        next = Some(Phase::Done);
                    } else {
                        command = normal * protocol.retract_speed;
                    }
                }
                Phase::Done => {}
            }
            // Phase changes take effect from the next tick, except that the
            // first survey tick already moves.
            if let Some(p) = next {
                run.phase = p;
                run.since = time;
                run.transitions.push((p, tick));
                if p == Phase::Survey {
                    command = servo(run) + tangent * script.survey_speed;
                }
            }
            commands[i] = command;
        }
        world.set_commands(&commands);
        let (w, s) = advance(&world, &config.physics, grasp.steps_per_tick)?;
        world = w;
        slip = s;
        tick += 1;
    }

    let mut records = Vec::with_capacity(n);
    for (i, run) in runs.iter().enumerate() {
        let p_dc: Vec<f64> = run.frames.iter().map(|f| f.p_dc).collect();
        let labels = auto_label(&p_dc, &run.positions, tick_dt, &config.labels);
        records.push(TrialRecord {
            trial_id,
            finger_id: i,
            frames: run.frames.clone(),
            labels,
        });
    }
    Ok((
        CollectionTrial {
            trial_id,
            object: object.name.clone(),
            target_pressure: target,
            scripts,
            settled: runs.iter().map(|r| r.settled).collect(),
            transitions: runs.iter().map(|r| r.transitions.clone()).collect(),
            ticks: tick as usize,
        },
        records,
    ))
}

/// Every fourth collection trial is held out from training.
pub const HOLDOUT_EVERY: u64 = 4;
