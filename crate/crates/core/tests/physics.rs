use gripsim::physics::*;
use gripsim::Vec2;
use proptest::prelude::*;

const RADIUS: f64 = 0.035;
const TIP: f64 = 0.01;

/// Minimum per-finger normal force of a horizontal two-finger pinch:
/// 2·μ·F ≥ m·g.
fn pinch_minimum(mass: f64, mu: f64, g: f64) -> f64 {
    mass * g / (2.0 * mu)
}

/// Square block squeezed between two fingertips on the x axis, each pressing
/// with `force` through a preset overlap. Flat faces keep the contact normals
/// horizontal while the tangential springs sag.
fn pinch(mass: f64, mu: f64, force: f64, cfg: &PhysicsConfig) -> WorldState {
    let overlap = force / cfg.contact_stiffness;
    let reach = RADIUS + TIP - overlap;
    let shape = Shape::Box {
        width: 2.0 * RADIUS,
        height: 2.0 * RADIUS,
    };
    let spec = ObjectSpec::new("block", shape, mass, mu);
    let fingers = vec![
        FingertipState::new(Vec2::new(reach, 0.0), TIP, Vec2::new(-1.0, 0.0)),
        FingertipState::new(Vec2::new(-reach, 0.0), TIP, Vec2::new(1.0, 0.0)),
    ];
    let mut w = WorldState::new(spec, fingers, 0).unwrap();
    w.refresh_contacts(cfg);
    w
}

fn run(mut w: WorldState, cfg: &PhysicsConfig, steps: usize) -> Vec<WorldState> {
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        w = step_physics(&w, cfg).unwrap();
        out.push(w.clone());
    }
    out
}

/// Loads gravity in quasi-statically over `ramp` steps, then holds.
fn run_ramped(mut w: WorldState, cfg: &PhysicsConfig, ramp: usize, steps: usize) -> Vec<WorldState> {
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let stage = PhysicsConfig {
            gravity: cfg.gravity * ((i + 1) as f64 / ramp as f64).min(1.0),
            ..cfg.clone()
        };
        w = step_physics(&w, &stage).unwrap();
        out.push(w.clone());
    }
    out
}

#[test]
fn rigid_pinch_statics_grid() {
    let cfg = PhysicsConfig::rigid();
    for mass in [0.05, 0.1, 0.2, 0.4] {
        for mu in [0.3, 0.5, 0.8] {
            let f_min = pinch_minimum(mass, mu, cfg.gravity);
            let held = run_ramped(pinch(mass, mu, 1.03 * f_min, &cfg), &cfg, 500, 1500);
            for w in &held {
                for c in &w.contacts {
                    assert_eq!(c.mode, ContactMode::Stick, "m={mass} mu={mu} t={} {:?}", w.time, c);
                    assert!(c.tangential_force.abs() <= mu * c.normal_force + 1e-12);
                }
            }
            let sag = held.last().unwrap().pose.y;
            assert!(sag.abs() < 1e-3, "m={mass} mu={mu} sag={sag}");

            let lost = run_ramped(pinch(mass, mu, 0.97 * f_min, &cfg), &cfg, 500, 1000);
            assert!(lost.iter().any(|w| w.contacts.iter().any(|c| c.mode == ContactMode::Slip)));
            assert!(lost.last().unwrap().pose.y < -0.005, "m={mass} mu={mu} should slide");
        }
    }
}

#[test]
fn held_pinch_drifts_less_than_a_millimetre() {
    let cfg = PhysicsConfig::rigid();
    let f = 1.6 * pinch_minimum(0.2, 0.5, cfg.gravity);
    let traj = run(pinch(0.2, 0.5, f, &cfg), &cfg, 1000);
    let drift = traj
        .iter()
        .map(|w| w.pose.position().norm())
        .fold(0.0, f64::max);
    assert!(drift < 1e-3, "drift {drift}");
}

fn stored_energy(w: &WorldState, cfg: &PhysicsConfig) -> f64 {
    let springs: f64 = w
        .contacts
        .iter()
        .filter(|c| c.in_contact)
        .map(|c| {
            0.5 * cfg.contact_stiffness * c.penetration * c.penetration
                + 0.5 * cfg.tangential_stiffness * c.tangential_displacement.powi(2)
        })
        .sum();
    w.kinetic_energy() + springs
}

#[test]
fn unpowered_contacts_are_passive() {
    let cfg = PhysicsConfig {
        gravity: 0.0,
        ..PhysicsConfig::rigid()
    };
    let mut w = pinch(0.2, 0.5, 2.0, &cfg);
    w.twist = Twist {
        vx: 0.05,
        vy: 0.03,
        omega: 2.0,
    };
    let e0 = stored_energy(&w, &cfg);
    let w0_kinetic = w.kinetic_energy();
    let traj = run(w, &cfg, 2000);
    let mut peak: f64 = 0.0;
    for s in &traj {
        peak = peak.max(stored_energy(s, &cfg));
    }
    assert!(peak <= e0 * 1.01, "energy grew from {e0} to {peak}");
    let settled = traj.last().unwrap().kinetic_energy();
    assert!(settled < 0.01 * w0_kinetic, "kinetic energy left: {settled}");
}

#[test]
fn seeded_runs_are_bit_identical() {
    let cfg = PhysicsConfig::default();
    let mut w = pinch(0.1, 0.5, 2.0, &cfg);
    w.fingers[0].commanded_velocity = Vec2::new(-0.002, 0.0);
    w.fingers[1].commanded_velocity = Vec2::new(0.003, 0.001);
    apply_external_wrench(&mut w, Wrench::new(0.3, -0.2, 0.001), 0.2, Envelope::RaisedCosine)
        .unwrap();
    let a = run(w.clone(), &cfg, 500);
    let b = run(w, &cfg, 500);
    assert_eq!(a, b);
}

#[test]
fn zero_wrench_leaves_trajectory_unchanged() {
    let cfg = PhysicsConfig::default();
    let w = pinch(0.2, 0.5, 3.0, &cfg);
    let mut with_zero = w.clone();
    apply_external_wrench(&mut with_zero, Wrench::ZERO, 0.3, Envelope::Constant).unwrap();
    let a = run(w, &cfg, 400);
    let b = run(with_zero, &cfg, 400);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.pose, y.pose);
        assert_eq!(x.twist, y.twist);
        assert_eq!(x.contacts, y.contacts);
    }
}

#[test]
fn lateral_pulse_breaks_a_marginal_grip() {
    let cfg = PhysicsConfig::rigid();
    let f_min = pinch_minimum(0.2, 0.5, cfg.gravity);
    // settle with a firm grip, then open to 1.05× the minimum
    let mut w = run(pinch(0.2, 0.5, 2.0 * f_min, &cfg), &cfg, 500).pop().unwrap();
    let opening = 0.95 * f_min / cfg.contact_stiffness;
    let speed = 1e-3;
    w.fingers[0].commanded_velocity = Vec2::new(speed, 0.0);
    w.fingers[1].commanded_velocity = Vec2::new(-speed, 0.0);
    w = run(w, &cfg, (opening / speed / cfg.dt).round() as usize).pop().unwrap();
    w.fingers[0].commanded_velocity = Vec2::ZERO;
    w.fingers[1].commanded_velocity = Vec2::ZERO;
    w = run(w, &cfg, 200).pop().unwrap();
    for c in &w.contacts {
        assert_eq!(c.mode, ContactMode::Stick);
        let ratio = c.normal_force / f_min;
        assert!((ratio - 1.05).abs() < 0.02, "ratio {ratio}");
    }

    let quiet = run(w.clone(), &cfg, 300);
    assert!(quiet.iter().all(|s| s.contacts.iter().all(|c| c.mode == ContactMode::Stick)));

    apply_external_wrench(&mut w, Wrench::new(0.0, -1.0, 0.0), 0.2, Envelope::Constant).unwrap();
    let pushed = run(w, &cfg, 300);
    assert!(pushed
        .iter()
        .any(|s| s.contacts.iter().all(|c| c.mode == ContactMode::Slip)));
}

proptest! {
    #[test]
    fn friction_stays_inside_the_cone(
        x in 0.036f64..0.046,
        y in -0.01f64..0.01,
        vx in -0.05f64..0.05,
        vy in -0.05f64..0.05,
        s0 in -0.002f64..0.002,
        prev_v in -0.01f64..0.01,
        mu in 0.1f64..1.2,
        prev_mode in prop_oneof![Just(ContactMode::Stick), Just(ContactMode::Slip), Just(ContactMode::Free)],
    ) {
        let spec = ObjectSpec::new("disk", Shape::Disk { radius: RADIUS }, 0.2, mu);
        let mut finger = FingertipState::new(Vec2::new(x, y), TIP, Vec2::new(-1.0, 0.0));
        finger.velocity = Vec2::new(vx, vy);
        let previous = ContactState {
            mode: prev_mode,
            tangential_displacement: s0,
            tangential_velocity: prev_v,
            ..ContactState::default()
        };
        let body = ObjectBody { spec: &spec, pose: Pose::default(), twist: Twist::default() };
        let c = compute_contact(&finger, body, &previous, &PhysicsConfig::default(), 5e-5);
        prop_assert!(c.normal_force >= 0.0);
        prop_assert!(c.tangential_force.abs() <= mu * c.normal_force * (1.0 + 1e-12) + 1e-15);
        if !c.in_contact {
            prop_assert_eq!(c.normal_force, 0.0);
            prop_assert_eq!(c.tangential_force, 0.0);
        }
    }
}
