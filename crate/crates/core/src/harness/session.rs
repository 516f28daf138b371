//! Grasp trials: place the fingers, capture baselines, close on the supported
//! object, remove the support and let the per-finger controllers hold it.

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::objects::{fingertips, place_fingers, Placement};
use super::rig::{advance, SensorRig};
use super::HarnessError;
use crate::class::ContactClass;
use crate::controller::{ControllerLogRecord, FingerController};
use crate::math::Vec2;
use crate::physics::{
    ContactMode, ObjectSpec, PhysicsError, Pose, ScheduledWrench, Twist, WorldState, Wrench,
    CONTACT_LOSS_LIMIT, DROP_HEIGHT,
};
use crate::sensor::SensorFrame;
use crate::slip::SlipPredictor;

/// What replaces a finger's controller output while an override is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverrideAction {
    /// Fixed task-space velocity, m/s.
    Velocity { vx: f64, vy: f64 },
    /// Move away from the surface at `speed`.
    Retract { speed: f64 },
    /// The controller's own command scaled by `factor`.
    Scale { factor: f64 },
}

/// Override for one finger over [start, end) seconds after release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverrideSegment {
    pub finger: usize,
    pub start: f64,
    pub end: f64,
    pub action: OverrideAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspSpec {
    pub trial_id: u64,
    pub object: ObjectSpec,
    pub n_fingers: usize,
    pub seed: u64,
    /// Trial length after release; `None` uses the configured duration.
    pub duration: Option<f64>,
    /// External wrenches, times relative to release.
    pub schedule: Vec<ScheduledWrench>,
    pub overrides: Vec<OverrideSegment>,
    /// Order in which the finger controllers are updated within a tick.
    /// Ascending when empty; any permutation gives identical results.
    pub update_order: Vec<usize>,
    pub record_sensors: bool,
}

impl GraspSpec {
    pub fn new(trial_id: u64, object: ObjectSpec, n_fingers: usize, seed: u64) -> Self {
        Self {
            trial_id,
            object,
            n_fingers,
            seed,
            duration: None,
            schedule: Vec::new(),
            overrides: Vec::new(),
            update_order: Vec::new(),
            record_sensors: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionPhase {
    Baseline,
    Preload,
    Active,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialOutcome {
    Held,
    Dropped { time: f64 },
    /// Numerical failure; the trial is invalid rather than a drop.
    Diverged { time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerTick {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub normal_force: f64,
    pub tangential_force: f64,
    pub mode: ContactMode,
    pub utilization: f64,
    pub p_dc: f64,
    pub prediction: Option<ContactClass>,
    pub input: f64,
    pub y: f64,
    pub y_min: Option<f64>,
    pub command: Vec2,
    pub overridden: bool,
}

/// State at the start of a tick together with what each finger decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Seconds since release; negative before it.
    pub time: f64,
    pub phase: SessionPhase,
    pub pose: Pose,
    pub twist: Twist,
    pub applied_wrench: Wrench,
    pub fingers: Vec<FingerTick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorLogRecord {
    pub finger_id: usize,
    pub tick: u64,
    pub raw: SensorFrame,
    pub grounded: Option<SensorFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: u64,
    pub object: String,
    pub mass: f64,
    pub friction: f64,
    pub n_fingers: usize,
    pub seed: u64,
    pub outcome: TrialOutcome,
    /// Mean normal force per finger over the trailing steady window.
    pub steady_force: Vec<f64>,
    pub schedule: Vec<ScheduledWrench>,
    pub ticks: Vec<TickRecord>,
    pub sensor_log: Vec<SensorLogRecord>,
}

impl TrialResult {
    pub fn stable(&self) -> bool {
        self.outcome == TrialOutcome::Held
    }

    pub fn valid(&self) -> bool {
        !matches!(self.outcome, TrialOutcome::Diverged { .. })
    }

    pub fn drop_time(&self) -> Option<f64> {
        match self.outcome {
            TrialOutcome::Dropped { time } => Some(time),
            _ => None,
        }
    }

    pub fn steady_total(&self) -> f64 {
        self.steady_force.iter().sum()
    }

    pub fn active_ticks(&self) -> impl Iterator<Item = &TickRecord> {
        self.ticks.iter().filter(|t| t.phase == SessionPhase::Active)
    }

    pub fn controller_log(&self) -> Vec<ControllerLogRecord> {
        self.active_ticks()
            .flat_map(|t| {
                t.fingers.iter().map(move |f| ControllerLogRecord {
                    finger_id: f.id,
                    tick: t.tick,
                    c_pred: f.prediction,
                    input: f.input,
                    y: f.y,
                    y_min: f.y_min,
                    command: f.command,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
struct DropMonitor {
    initial_y: f64,
    lost_since: Option<f64>,
}

impl DropMonitor {
    fn update(&mut self, time: f64, y: f64, contacts: usize) -> bool {
        if self.initial_y - y > DROP_HEIGHT {
            return true;
        }
        if contacts == 0 {
            let since = *self.lost_since.get_or_insert(time);
            time - since > CONTACT_LOSS_LIMIT + 1e-9
        } else {
            self.lost_since = None;
            false
        }
    }
}

/// A grasp advanced one control tick at a time. Batch trials run it to the
/// end; the live server drives it interactively.
pub struct GraspSession<'a, P: SlipPredictor> {
    pub config: SimConfig,
    predictor: &'a P,
    pub spec: GraspSpec,
    pub world: WorldState,
    pub placements: Vec<Placement>,
    order: Vec<usize>,
    rig: SensorRig,
    controllers: Vec<FingerController>,
    previous: Vec<Option<SensorFrame>>,
    /// Live overrides set interactively; they take precedence over the script.
    pub live_overrides: Vec<Option<OverrideAction>>,
    slip: Vec<f64>,
    pub tick: u64,
    pub phase: SessionPhase,
    activation_tick: u64,
    end_tick: u64,
    monitor: DropMonitor,
    outcome: Option<TrialOutcome>,
    ticks: Vec<TickRecord>,
    sensor_log: Vec<SensorLogRecord>,
}

impl<'a, P: SlipPredictor> GraspSession<'a, P> {
    pub fn new(config: &SimConfig, predictor: &'a P, spec: GraspSpec) -> Result<Self, HarnessError> {
        config.validate()?;
        let n = spec.n_fingers;
        if n == 0 {
            return Err(HarnessError::Config("a grasp needs at least one finger".into()));
        }
        let order: Vec<usize> = if spec.update_order.is_empty() {
            (0..n).collect()
        } else {
            let mut sorted = spec.update_order.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                return Err(HarnessError::Config("update_order must be a permutation of the fingers".into()));
            }
            spec.update_order.clone()
        };
        let placements = place_fingers(&spec.object, n, config.grasp.finger_radius, config.grasp.gap);
        let mut world = WorldState::new(
            spec.object.clone(),
            fingertips(&placements, config.grasp.finger_radius),
            spec.seed,
        )?;
        world.object_fixed = true;
        world.refresh_contacts(&config.physics);

        let tick_dt = config.tick_dt();
        let preload_ticks = (config.grasp.preload_time / tick_dt).round() as u64;
        let activation_tick = config.grasp.baseline_ticks as u64 + preload_ticks;
        let activation_time = activation_tick as f64 * tick_dt;
        for s in &spec.schedule {
            world.schedule.push(ScheduledWrench {
                start: s.start + activation_time,
                ..*s
            });
        }
        let duration = spec.duration.unwrap_or(config.grasp.duration);
        let end_tick = activation_tick + (duration / tick_dt).round() as u64;
        let controllers = (0..n)
            .map(|_| FingerController::new(config.controller.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let rig = SensorRig::new(&config.sensor, spec.seed, n)?;
        Ok(Self {
            config: config.clone(),
            predictor,
            monitor: DropMonitor {
                initial_y: spec.object.initial_pose.y,
                lost_since: None,
            },
            spec,
            world,
            placements,
            order,
            rig,
            controllers,
            previous: vec![None; n],
            live_overrides: vec![None; n],
            slip: vec![0.0; n],
            tick: 0,
            phase: SessionPhase::Baseline,
            activation_tick,
            end_tick,
            outcome: None,
            ticks: Vec::new(),
            sensor_log: Vec::new(),
        })
    }

    pub fn tick_dt(&self) -> f64 {
        self.config.tick_dt()
    }

    /// Seconds since release (negative before it).
    pub fn time(&self) -> f64 {
        (self.tick as f64 - self.activation_tick as f64) * self.tick_dt()
    }

    pub fn is_finished(&self) -> bool {
        self.phase == SessionPhase::Finished
    }

    pub fn outcome(&self) -> Option<TrialOutcome> {
        self.outcome
    }

    pub fn records(&self) -> &[TickRecord] {
        &self.ticks
    }

    /// Hands over the tick records gathered so far, for long-running sessions.
    pub fn drain_records(&mut self) -> Vec<TickRecord> {
        std::mem::take(&mut self.ticks)
    }

    pub fn controller(&self, slot: usize) -> &FingerController {
        &self.controllers[slot]
    }

    /// Extends a live session so it keeps running.
    pub fn extend(&mut self, seconds: f64) {
        self.end_tick += (seconds / self.tick_dt()).round() as u64;
    }

    fn scripted_override(&self, finger: usize, time: f64) -> Option<OverrideAction> {
        self.spec
            .overrides
            .iter()
            .find(|o| o.finger == finger && time >= o.start - 1e-9 && time < o.end - 1e-9)
            .map(|o| o.action)
    }

    /// Schedules a wrench starting now.
    pub fn apply_wrench_now(&mut self, wrench: Wrench, duration: f64, envelope: crate::physics::Envelope) -> Result<(), HarnessError> {
        crate::physics::apply_external_wrench(&mut self.world, wrench, duration, envelope)?;
        Ok(())
    }

    /// Runs one control tick. Returns false once the trial has finished.
    pub fn step(&mut self) -> Result<bool, HarnessError> {
        if self.is_finished() {
            return Ok(false);
        }
        let n = self.spec.n_fingers;
        let time = self.time();
        let baseline_ticks = self.config.grasp.baseline_ticks as u64;
        self.phase = if self.tick < baseline_ticks {
            SessionPhase::Baseline
        } else if self.tick < self.activation_tick {
            SessionPhase::Preload
        } else {
            SessionPhase::Active
        };
        if self.tick == self.activation_tick {
            self.world.object_fixed = false;
        }

        let sensed = self.rig.sense(&self.world, &self.slip, self.tick);
        if self.tick + 1 == baseline_ticks {
            self.rig.capture()?;
        }
        if self.spec.record_sensors {
            for (slot, s) in sensed.iter().enumerate() {
                self.sensor_log.push(SensorLogRecord {
                    finger_id: slot,
                    tick: self.tick,
                    raw: s.raw.clone(),
                    grounded: s.grounded.clone(),
                });
            }
        }

        let mut commands = vec![Vec2::ZERO; n];
        let mut fingers: Vec<Option<FingerTick>> = vec![None; n];
        for &slot in &self.order {
            let contact = &self.world.contacts[slot];
            let approach = self.placements[slot].normal;
            let normal = if contact.in_contact { contact.normal } else { approach };
            let grounded = sensed[slot].grounded.clone();
            let mut prediction = None;
            let mut input = 0.0;
            let action = if self.phase == SessionPhase::Active {
                self.live_overrides[slot].or_else(|| self.scripted_override(slot, time))
            } else {
                None
            };
            let ctrl = &mut self.controllers[slot];
            let own = match self.phase {
                SessionPhase::Baseline => Vec2::ZERO,
                SessionPhase::Preload => ctrl.hold_command(Some(normal))?,
                _ => {
                    let frames = match (&self.previous[slot], &grounded) {
                        (Some(p), Some(c)) => Some((p, c)),
                        _ => None,
                    };
                    let out = ctrl.tick(frames, self.predictor, Some(normal))?;
                    prediction = out.prediction;
                    input = out.input;
                    out.command
                }
            };
            let command = match action {
                None => own,
                Some(OverrideAction::Velocity { vx, vy }) => Vec2::new(vx, vy),
                Some(OverrideAction::Retract { speed }) => normal * speed,
                Some(OverrideAction::Scale { factor }) => own * factor,
            };
            commands[slot] = command;
            let f = &self.world.fingers[slot];
            fingers[slot] = Some(FingerTick {
                id: slot,
                position: f.position,
                velocity: f.velocity,
                normal_force: contact.normal_force,
                tangential_force: contact.tangential_force,
                mode: contact.mode,
                utilization: contact.utilization,
                p_dc: grounded.as_ref().map_or(0.0, |g| g.p_dc),
                prediction,
                input,
                y: ctrl.state.y,
                y_min: ctrl.state.y_min,
                command,
                overridden: action.is_some(),
            });
            self.previous[slot] = grounded;
        }
        self.ticks.push(TickRecord {
            tick: self.tick,
            time,
            phase: self.phase,
            pose: self.world.pose,
            twist: self.world.twist,
            applied_wrench: self.world.external_wrench,
            fingers: fingers.into_iter().map(|f| f.expect("every finger updated")).collect(),
        });

        self.world.set_commands(&commands);
        match advance(&self.world, &self.config.physics, self.config.grasp.steps_per_tick) {
            Ok((w, s)) => {
                self.world = w;
                self.slip = s;
            }
            Err(PhysicsError::Diverged { .. }) => {
                log::warn!("trial {} diverged at t={time:.3}", self.spec.trial_id);
                self.outcome = Some(TrialOutcome::Diverged { time });
                self.phase = SessionPhase::Finished;
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        }
        self.tick += 1;

        if self.tick > self.activation_tick {
            let t = self.time();
            let contacts = self.world.contacts.iter().filter(|c| c.in_contact).count();
            if self.monitor.update(t, self.world.pose.y, contacts) {
                self.outcome = Some(TrialOutcome::Dropped { time: t });
                self.phase = SessionPhase::Finished;
                return Ok(false);
            }
        }
        if self.tick >= self.end_tick {
            self.outcome = Some(TrialOutcome::Held);
            self.phase = SessionPhase::Finished;
            return Ok(false);
        }
        Ok(true)
    }

    pub fn run(mut self) -> Result<TrialResult, HarnessError> {
        while self.step()? {}
        Ok(self.finish())
    }

    pub fn finish(self) -> TrialResult {
        let n = self.spec.n_fingers;
        let tick_dt = self.config.tick_dt();
        let window = self.config.grasp.steady_window;
        let active: Vec<&TickRecord> = self
            .ticks
            .iter()
            .filter(|t| t.phase == SessionPhase::Active)
            .collect();
        let last = active.last().map_or(0.0, |t| t.time);
        let tail: Vec<&&TickRecord> = active
            .iter()
            .filter(|t| t.time > last - window + 0.5 * tick_dt)
            .collect();
        let mut steady = vec![0.0; n];
        for t in &tail {
            for f in &t.fingers {
                steady[f.id] += f.normal_force;
            }
        }
        if !tail.is_empty() {
            for s in &mut steady {
                *s /= tail.len() as f64;
            }
        }
        TrialResult {
            trial_id: self.spec.trial_id,
            object: self.spec.object.name.clone(),
            mass: self.spec.object.mass,
            friction: self.spec.object.friction,
            n_fingers: n,
            seed: self.spec.seed,
            outcome: self.outcome.unwrap_or(TrialOutcome::Held),
            steady_force: steady,
            schedule: self.spec.schedule.clone(),
            ticks: self.ticks,
            sensor_log: self.sensor_log,
        }
    }
}

pub fn run_grasp_trial<P: SlipPredictor>(
    config: &SimConfig,
    predictor: &P,
    spec: GraspSpec,
) -> Result<TrialResult, HarnessError> {
    GraspSession::new(config, predictor, spec)?.run()
}

pub fn run_perturbation_trial<P: SlipPredictor>(
    config: &SimConfig,
    predictor: &P,
    mut spec: GraspSpec,
    schedule: Vec<ScheduledWrench>,
) -> Result<TrialResult, HarnessError> {
    spec.schedule = schedule;
    GraspSession::new(config, predictor, spec)?.run()
}

pub fn run_master_slave<P: SlipPredictor>(
    config: &SimConfig,
    predictor: &P,
    mut spec: GraspSpec,
    script: Vec<OverrideSegment>,
) -> Result<TrialResult, HarnessError> {
    if let Some(s) = script.iter().find(|s| s.finger >= spec.n_fingers) {
        return Err(HarnessError::Config(format!("override names finger {} of {}", s.finger, spec.n_fingers)));
    }
    spec.overrides = script;
    GraspSession::new(config, predictor, spec)?.run()
}
