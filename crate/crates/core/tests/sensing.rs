use gripsim::harness::rig::{advance, SensorRig};
use gripsim::harness::{pid_pressure_servo, PidGains, PidState};
use gripsim::physics::*;
use gripsim::sensor::*;
use gripsim::Vec2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stimuli() -> Vec<TactileStimulus> {
    (0..60)
        .map(|t| {
            if t < 20 {
                TactileStimulus::default()
            } else {
                let f = 0.05 * (t - 20) as f64;
                TactileStimulus {
                    normal_force: f,
                    utilization: (0.03 * (t - 20) as f64).min(1.0),
                    slip_fraction: if t > 50 { 0.5 } else { 0.0 },
                    contact_angle: 0.1,
                }
            }
        })
        .collect()
}

fn grounded_trace(offsets: [f64; CHANNELS], noise_seed: u64) -> Vec<[f64; CHANNELS]> {
    let cfg = SensorConfig::default();
    let mut model = SensorModel::with_offsets(cfg, offsets, ChaCha8Rng::seed_from_u64(noise_seed)).unwrap();
    let frames: Vec<SensorFrame> = stimuli()
        .iter()
        .enumerate()
        .map(|(t, s)| model.sample(s, t as u64))
        .collect();
    let baseline = capture_baseline(&frames[..20], &[false; 20]).unwrap();
    frames[20..]
        .iter()
        .map(|f| ground_frame(f, &baseline).channels())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn grounding_removes_sensor_offsets(
        a in prop::collection::vec(-40_000i32..40_000, CHANNELS),
        b in prop::collection::vec(-40_000i32..40_000, CHANNELS),
        noise_seed in 0u64..1000,
    ) {
        // resting offsets sit on the converter grid
        let on_grid = |v: &[i32]| {
            let mut o = [0.0; CHANNELS];
            for (x, k) in o.iter_mut().zip(v) {
                *x = *k as f64 * QUANTUM;
            }
            o
        };
        let ta = grounded_trace(on_grid(&a), noise_seed);
        let tb = grounded_trace(on_grid(&b), noise_seed);
        // equal up to rounding on the converter grid, once in the sample and
        // once in the baseline mean
        for (fa, fb) in ta.iter().zip(&tb) {
            for (x, y) in fa.iter().zip(fb) {
                prop_assert!((x - y).abs() <= 2.0 * QUANTUM + 1e-9, "{} vs {}", x, y);
            }
        }
    }
}

#[test]
fn pid_servo_step_to_100_spu() {
    let physics = PhysicsConfig::default();
    let block = ObjectSpec::new("block", Shape::Box { width: 0.06, height: 0.06 }, 0.2, 0.5);
    // fingertip surface resting 0.1 mm off the right face
    let finger = FingertipState::new(Vec2::new(0.03 + 0.01 + 1e-4, 0.0), 0.01, Vec2::new(-1.0, 0.0));
    let mut world = WorldState::new(block, vec![finger], 0).unwrap();
    world.object_fixed = true;
    let mut rig = SensorRig::new(&SensorConfig::default(), 5, 1).unwrap();
    let tick_dt = 0.01;
    let steps = 10;
    for tick in 0..20 {
        let (w, slip) = advance(&world, &physics, steps).unwrap();
        world = w;
        rig.sense(&world, &slip, tick);
    }
    rig.capture().unwrap();

    let target = 100.0;
    let mut pid = PidState::new(PidGains::default());
    let mut trace = Vec::new();
    for tick in 20..320 {
        let (w, slip) = advance(&world, &physics, steps).unwrap();
        world = w;
        let frame = rig.sense(&world, &slip, tick).remove(0);
        let p = frame.grounded.unwrap().p_dc;
        trace.push(p);
        let speed = pid_pressure_servo(target, p, &mut pid, tick_dt);
        world.set_commands(&[Vec2::new(-speed, 0.0)]);
    }
    let overshoot = trace.iter().cloned().fold(f64::MIN, f64::max);
    assert!(overshoot < 1.2 * target, "overshoot to {overshoot}");
    // last tick outside the ±5% band
    let last_out = trace
        .iter()
        .rposition(|p| (p - target).abs() > 0.05 * target)
        .unwrap();
    let settle = (last_out + 1) as f64 * tick_dt;
    assert!(settle < 1.0, "settled after {settle} s");
}
