//! Live session over WebSocket: state snapshots out, commands in.
//!
//! Every text message is one JSON object with a `type` field. The server
//! greets with `hello`, then streams `state` at a fixed rate. Client commands
//! are queued and applied at the next control-tick boundary; malformed or
//! invalid commands are answered with `error` and otherwise ignored.

use std::collections::VecDeque;
use std::io::ErrorKind;
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tungstenite::{Message, WebSocket};

use crate::class::ContactClass;
use crate::harness::{GraspSession, GraspSpec, HarnessError, OverrideAction, SessionPhase, SimConfig, TrialOutcome};
use crate::math::Vec2;
use crate::physics::{ContactMode, Envelope, ObjectSpec, Pose, Shape, Twist, Wrench};
use crate::slip::SlipPredictor;

pub const PROTOCOL_VERSION: u32 = 1;
/// State snapshots per second.
pub const SNAPSHOT_RATE: f64 = 30.0;
/// A live session runs this long unless reset.
const LIVE_DURATION: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientCommand {
    Wrench {
        fx: f64,
        fy: f64,
        #[serde(default)]
        torque: f64,
        duration: f64,
        #[serde(default)]
        envelope: Envelope,
    },
    Override {
        finger: usize,
        action: OverrideAction,
    },
    Release {
        finger: usize,
    },
    Pause,
    Resume,
    Reset {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        object: Option<ObjectSpec>,
        #[serde(default)]
        fingers: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerSnapshot {
    pub id: usize,
    pub pos: Vec2,
    pub radius: f64,
    #[serde(rename = "F_N")]
    pub normal_force: f64,
    #[serde(rename = "F_t")]
    pub tangential_force: f64,
    pub mode: ContactMode,
    pub y: f64,
    pub y_min: Option<f64>,
    pub c_pred: Option<ContactClass>,
    pub command: Vec2,
    pub overridden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSnapshot {
    pub pose: Pose,
    pub twist: Twist,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub tick: u64,
    /// Seconds since the support was removed; negative before.
    pub time: f64,
    pub phase: SessionPhase,
    pub paused: bool,
    pub object: ObjectSnapshot,
    pub fingers: Vec<FingerSnapshot>,
    pub applied_wrench: Wrench,
    pub outcome: Option<TrialOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        protocol_version: u32,
        tick_dt: f64,
        snapshot_rate: f64,
        object: ObjectSpec,
        fingers: usize,
    },
    State(StateSnapshot),
    /// A queued command took effect before simulating `tick`.
    Ack {
        command: String,
        tick: u64,
    },
    Error {
        message: String,
    },
}

impl ClientCommand {
    pub fn name(&self) -> &'static str {
        match self {
            ClientCommand::Wrench { .. } => "wrench",
            ClientCommand::Override { .. } => "override",
            ClientCommand::Release { .. } => "release",
            ClientCommand::Pause => "pause",
            ClientCommand::Resume => "resume",
            ClientCommand::Reset { .. } => "reset",
        }
    }
}

/// The default live grasp: a 0.2 kg disk pinched by two fingers.
pub fn default_live_spec(seed: u64) -> GraspSpec {
    let object = ObjectSpec::new("disk", Shape::Disk { radius: 0.035 }, 0.2, 0.5);
    let mut spec = GraspSpec::new(0, object, 2, seed);
    spec.duration = Some(LIVE_DURATION);
    spec
}

/// Interactive simulation state, independent of the transport.
pub struct LiveSim<'a, P: SlipPredictor> {
    config: SimConfig,
    predictor: &'a P,
    pub session: GraspSession<'a, P>,
    pub paused: bool,
    queue: VecDeque<ClientCommand>,
}

impl<'a, P: SlipPredictor> LiveSim<'a, P> {
    pub fn new(config: &SimConfig, predictor: &'a P, spec: GraspSpec) -> Result<Self, HarnessError> {
        Ok(Self {
            config: config.clone(),
            predictor,
            session: GraspSession::new(config, predictor, spec)?,
            paused: false,
            queue: VecDeque::new(),
        })
    }

    pub fn hello(&self) -> ServerMessage {
        ServerMessage::Hello {
            protocol_version: PROTOCOL_VERSION,
            tick_dt: self.config.tick_dt(),
            snapshot_rate: SNAPSHOT_RATE,
            object: self.session.spec.object.clone(),
            fingers: self.session.spec.n_fingers,
        }
    }

    /// Parses and queues one client message. Returns an error reply when the
    /// message cannot be accepted.
    pub fn receive(&mut self, text: &str) -> Option<ServerMessage> {
        match serde_json::from_str::<ClientCommand>(text) {
            Ok(cmd) => match self.check(&cmd) {
                Ok(()) => {
                    self.queue.push_back(cmd);
                    None
                }
                Err(message) => Some(ServerMessage::Error { message }),
            },
            Err(e) => Some(ServerMessage::Error {
                message: format!("malformed command: {e}"),
            }),
        }
    }

    fn check(&self, cmd: &ClientCommand) -> Result<(), String> {
        let n = self.session.spec.n_fingers;
        match cmd {
            ClientCommand::Wrench { fx, fy, torque, duration, .. } => {
                if ![*fx, *fy, *torque].iter().all(|v| v.is_finite()) {
                    return Err("wrench must be finite".into());
                }
                if !(*duration > 0.0 && duration.is_finite()) {
                    return Err("wrench duration must be positive".into());
                }
            }
            ClientCommand::Override { finger, action } => {
                if *finger >= n {
                    return Err(format!("no finger {finger}; session has {n}"));
                }
                let finite = match *action {
                    OverrideAction::Velocity { vx, vy } => vx.is_finite() && vy.is_finite(),
                    OverrideAction::Retract { speed } => speed.is_finite(),
                    OverrideAction::Scale { factor } => factor.is_finite(),
                };
                if !finite {
                    return Err("override values must be finite".into());
                }
            }
            ClientCommand::Release { finger } => {
                if *finger >= n {
                    return Err(format!("no finger {finger}; session has {n}"));
                }
            }
            ClientCommand::Reset { object, fingers, .. } => {
                if let Some(o) = object {
                    o.validate().map_err(|e| e.to_string())?;
                }
                if *fingers == Some(0) {
                    return Err("a grasp needs at least one finger".into());
                }
            }
            ClientCommand::Pause | ClientCommand::Resume => {}
        }
        Ok(())
    }

    fn apply(&mut self, cmd: ClientCommand) -> Result<(), HarnessError> {
        match cmd {
            ClientCommand::Wrench { fx, fy, torque, duration, envelope } => {
                self.session
                    .apply_wrench_now(Wrench::new(fx, fy, torque), duration, envelope)?;
            }
            ClientCommand::Override { finger, action } => {
                self.session.live_overrides[finger] = Some(action);
            }
            ClientCommand::Release { finger } => {
                self.session.live_overrides[finger] = None;
            }
            ClientCommand::Pause => self.paused = true,
            ClientCommand::Resume => self.paused = false,
            ClientCommand::Reset { seed, object, fingers } => {
                let old = &self.session.spec;
                let mut spec = default_live_spec(seed.unwrap_or(old.seed));
                spec.object = object.unwrap_or_else(|| old.object.clone());
                spec.n_fingers = fingers.unwrap_or(old.n_fingers);
                self.session = GraspSession::new(&self.config, self.predictor, spec)?;
                self.paused = false;
            }
        }
        Ok(())
    }

    /// Applies queued commands at the tick boundary, then runs one tick
    /// unless paused or finished. Returns an ack or error per applied command.
    pub fn tick(&mut self) -> Result<Vec<ServerMessage>, HarnessError> {
        let mut replies = Vec::new();
        while let Some(cmd) = self.queue.pop_front() {
            let name = cmd.name();
            match self.apply(cmd) {
                Ok(()) => replies.push(ServerMessage::Ack {
                    command: name.to_string(),
                    tick: self.session.tick,
                }),
                Err(e) => replies.push(ServerMessage::Error { message: e.to_string() }),
            }
        }
        if !self.paused && !self.session.is_finished() {
            self.session.step()?;
            self.session.drain_records();
        }
        Ok(replies)
    }

    pub fn snapshot(&self) -> ServerMessage {
        let s = &self.session;
        let world = &s.world;
        let fingers = (0..s.spec.n_fingers)
            .map(|i| {
                let f = &world.fingers[i];
                let c = &world.contacts[i];
                let ctrl = s.controller(i);
                FingerSnapshot {
                    id: i,
                    pos: f.position,
                    radius: f.radius,
                    normal_force: c.normal_force,
                    tangential_force: c.tangential_force,
                    mode: c.mode,
                    y: ctrl.state.y,
                    y_min: ctrl.state.y_min,
                    c_pred: ctrl.state.previous_prediction,
                    command: f.commanded_velocity,
                    overridden: s.live_overrides[i].is_some(),
                }
            })
            .collect();
        ServerMessage::State(StateSnapshot {
            tick: s.tick,
            time: s.time(),
            phase: s.phase,
            paused: self.paused,
            object: ObjectSnapshot {
                pose: world.pose,
                twist: world.twist,
                shape: world.object.shape.clone(),
            },
            fingers,
            applied_wrench: world.external_wrench,
            outcome: s.outcome(),
        })
    }
}

fn send(ws: &mut WebSocket<TcpStream>, msg: &ServerMessage) -> Result<(), tungstenite::Error> {
    let text = serde_json::to_string(msg).expect("server messages serialize");
    ws.send(Message::text(text))
}

/// Serves one client until it disconnects, pacing the simulation in real time.
pub fn serve_client<P: SlipPredictor>(
    stream: TcpStream,
    config: &SimConfig,
    predictor: &P,
    seed: u64,
) -> Result<(), HarnessError> {
    let mut ws = tungstenite::accept(stream).map_err(|e| HarnessError::Protocol(e.to_string()))?;
    ws.get_mut().set_read_timeout(Some(Duration::from_millis(2)))?;
    let mut sim = LiveSim::new(config, predictor, default_live_spec(seed))?;
    let ws_err = |e: tungstenite::Error| HarnessError::Protocol(e.to_string());
    send(&mut ws, &sim.hello()).map_err(ws_err)?;

    let tick = Duration::from_secs_f64(config.tick_dt());
    let frame = Duration::from_secs_f64(1.0 / SNAPSHOT_RATE);
    let start = Instant::now();
    let mut ticks_run: u32 = 0;
    let mut next_snapshot = start;
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                if let Some(reply) = sim.receive(&text) {
                    send(&mut ws, &reply).map_err(ws_err)?;
                }
            }
            Ok(Message::Binary(_)) => {
                let reply = ServerMessage::Error {
                    message: "binary messages are not supported".into(),
                };
                send(&mut ws, &reply).map_err(ws_err)?;
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(ws_err(e)),
        }
        while start + tick * ticks_run <= Instant::now() {
            for reply in sim.tick()? {
                send(&mut ws, &reply).map_err(ws_err)?;
            }
            ticks_run += 1;
        }
        if Instant::now() >= next_snapshot {
            send(&mut ws, &sim.snapshot()).map_err(ws_err)?;
            next_snapshot += frame;
        }
    }
}

/// Accepts clients one after another; each gets a fresh session.
/// `max_clients` bounds how many are served before returning.
pub fn serve_listener<P: SlipPredictor>(
    listener: TcpListener,
    config: &SimConfig,
    predictor: &P,
    seed: u64,
    max_clients: Option<usize>,
) -> Result<(), HarnessError> {
    let mut served = 0;
    for stream in listener.incoming() {
        let stream = stream?;
        if let Err(e) = serve_client(stream, config, predictor, seed) {
            log::warn!("client session ended: {e}");
        }
        served += 1;
        if max_clients.is_some_and(|m| served >= m) {
            break;
        }
    }
    Ok(())
}

pub fn serve<P: SlipPredictor>(addr: &str, config: &SimConfig, predictor: &P, seed: u64) -> Result<(), HarnessError> {
    let listener = TcpListener::bind(addr)?;
    log::info!("listening on ws://{}", listener.local_addr()?);
    serve_listener(listener, config, predictor, seed, None)
}
