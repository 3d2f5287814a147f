//! Robot construction, actuator behaviour, and state readout.

use approx::assert_relative_eq;
use nalgebra::{UnitQuaternion, Vector3};
use snakesim_core::robot::{actuator_torque, build_robot, JointCommand, ServoGains};
use snakesim_core::{
    ActuatorParams, HingeJoint, RigidBody, RobotConfig, SimParams, World, JOINT_COUNT, LINK_COUNT,
};

#[test]
fn build_produces_expected_structure() {
    let cfg = RobotConfig::default();
    let (world, robot) = build_robot(&cfg, &SimParams::default()).unwrap();
    assert_eq!(world.bodies.len(), LINK_COUNT);
    assert_eq!(world.joints.len(), JOINT_COUNT);
    // 5 bilateral rows per hinge.
    let rows = world.assemble_constraints(1e-3);
    assert_eq!(rows.len(), 55);

    // Straight chain: every joint reads zero.
    let (_, q) = robot.partition_state(&world);
    for angle in q {
        assert_relative_eq!(angle, 0.0, epsilon = 1e-12);
    }

    // Total mass is additive.
    assert_relative_eq!(robot.total_mass(&world), 12.0 * cfg.link_mass, epsilon = 1e-12);
}

#[test]
fn build_rejects_non_alternating_axes() {
    let mut cfg = RobotConfig::default();
    cfg.axes[3] = cfg.axes[2];
    assert!(build_robot(&cfg, &SimParams::default()).is_err());
}

#[test]
fn joint_angle_readout_inverts_imposition() {
    let cfg = RobotConfig::default();
    let (mut world, robot) = build_robot(&cfg, &SimParams::default()).unwrap();
    // Impose a rotation of link k+1 about joint k's axis and read it back.
    for k in [0usize, 1, 4, 9] {
        for &angle in &[-3.0, -1.2, -0.01, 0.0, 0.4, 1.5, 3.0] {
            let j = &world.joints[robot.joints[k]];
            let qa = world.bodies[j.body_a].orientation;
            let rot = UnitQuaternion::from_axis_angle(
                &nalgebra::Unit::new_normalize(j.axis_a),
                angle,
            );
            let body_b = j.body_b;
            world.bodies[body_b].orientation = qa * j.rest_rel * rot;
            assert_relative_eq!(
                world.joint_angle(robot.joints[k]),
                angle,
                epsilon = 1e-9
            );
        }
        // Reset.
        let j = &world.joints[robot.joints[k]];
        let body_b = j.body_b;
        let qa = world.bodies[j.body_a].orientation;
        let rest = j.rest_rel;
        world.bodies[body_b].orientation = qa * rest;
    }
}

#[test]
fn partition_state_reads_head_pose() {
    let cfg = RobotConfig::default();
    let (mut world, robot) = build_robot(&cfg, &SimParams::default()).unwrap();
    let shift = Vector3::new(1.0, 2.0, 0.0);
    for &id in &robot.links {
        world.bodies[id].position += shift;
    }
    let (head, q) = robot.partition_state(&world);
    assert_relative_eq!(head.position.x, 1.0, epsilon = 1e-12);
    assert_relative_eq!(head.position.y, 2.0, epsilon = 1e-12);
    for angle in q {
        assert_relative_eq!(angle, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn servo_torque_law() {
    let p = ActuatorParams {
        j_m: 1e-3,
        b_m: 0.05,
        k_t: 2.0,
        u_max: 3.0,
    };
    let g = ServoGains { kp: 10.0, kd: 0.5 };

    // Zero error, zero rate: zero torque.
    assert_relative_eq!(actuator_torque(0.3, 0.0, JointCommand { q_ref: 0.3 }, &p, &g), 0.0);

    // Small error: linear region, u = k_t * kp * e - b_m * qd.
    let u = actuator_torque(0.0, 0.0, JointCommand { q_ref: 0.1 }, &p, &g);
    assert_relative_eq!(u, 2.0 * 10.0 * 0.1, epsilon = 1e-12);

    // Large error saturates at u_max (minus damping at zero rate).
    let u = actuator_torque(0.0, 0.0, JointCommand { q_ref: 10.0 }, &p, &g);
    assert_relative_eq!(u, 3.0, epsilon = 1e-12);

    // Damping acts outside the saturation.
    let u = actuator_torque(0.0, 1.0, JointCommand { q_ref: 10.0 }, &p, &g);
    assert_relative_eq!(u, 3.0 - 0.05, epsilon = 1e-12);
}

/// Single-joint rig in free space (no gravity, no ground): a step reference
/// converges with near-zero steady-state error for the unloaded joint.
fn single_joint_rig(actuator: ActuatorParams, servo: ServoGains) -> (World, usize) {
    let mut world = World::new();
    world.gravity = Vector3::zeros();
    let mut base = RigidBody::cylinder_x(0.4, 0.04, 0.1).unwrap();
    base.make_static();
    let a = world.add_body(base);
    let mut child = RigidBody::cylinder_x(0.4, 0.04, 0.1)
        .unwrap()
        .at(Vector3::new(0.1, 0.0, 0.0));
    // Reflected transmission inertia about the hinge axis (z).
    child.inertia_body += actuator.j_m * Vector3::z() * Vector3::z().transpose();
    let b = world.add_body(child);
    let joint = HingeJoint::new(
        a,
        b,
        Vector3::new(0.05, 0.0, 0.0),
        Vector3::new(-0.05, 0.0, 0.0),
        Vector3::z(),
        Vector3::z(),
        0.2,
        1e-5,
    )
    .unwrap();
    let j = world.add_joint(joint).unwrap();
    let _ = servo;
    (world, j)
}

fn step_response(actuator: ActuatorParams, servo: ServoGains, q_target: f64, t_end: f64) -> Vec<f64> {
    let (mut world, j) = single_joint_rig(actuator, servo);
    let h = 1e-3;
    let steps = (t_end / h) as usize;
    let mut trace = Vec::with_capacity(steps);
    for _ in 0..steps {
        let q = world.joint_angle(j);
        let qd = world.joint_rate(j);
        let u = actuator_torque(q, qd, JointCommand { q_ref: q_target }, &actuator, &servo);
        world.apply_joint_torque(j, u);
        world.step(h).unwrap();
        trace.push(world.joint_angle(j));
    }
    trace
}

#[test]
fn step_reference_converges_with_zero_steady_state_error() {
    let actuator = ActuatorParams::default();
    let servo = ServoGains { kp: 60.0, kd: 1.2 };
    let trace = step_response(actuator, servo, 0.5, 2.0);
    let tail = &trace[trace.len() - 200..];
    for q in tail {
        assert!((q - 0.5).abs() < 1e-3, "steady-state error too large: {q}");
    }
}

/// Doubling the internal damping strictly reduces the overshoot of the step
/// response.
#[test]
fn more_internal_damping_means_less_overshoot() {
    let servo = ServoGains { kp: 20.0, kd: 0.05 };
    let overshoot = |b_m: f64| -> f64 {
        let actuator = ActuatorParams {
            b_m,
            ..ActuatorParams::default()
        };
        let trace = step_response(actuator, servo, 0.4, 3.0);
        trace.iter().cloned().fold(f64::MIN, f64::max) - 0.4
    };
    let o1 = overshoot(0.02);
    let o2 = overshoot(0.04);
    let o3 = overshoot(0.08);
    assert!(o1 > 0.005, "base case should overshoot, got {o1}");
    assert!(o2 < o1, "doubling b_m must reduce overshoot: {o2} !< {o1}");
    assert!(o3 < o2, "doubling again must reduce it further: {o3} !< {o2}");
}

/// Increasing the transmission inertia with fixed gains slows the 10-90%
/// rise time (checked at three values). Low derivative gain keeps the
/// response inertia-dominated.
#[test]
fn transmission_inertia_slows_rise_time() {
    let servo = ServoGains { kp: 20.0, kd: 0.05 };
    let rise_time = |j_m: f64| -> f64 {
        let actuator = ActuatorParams {
            j_m,
            ..ActuatorParams::default()
        };
        let trace = step_response(actuator, servo, 0.4, 3.0);
        let h = 1e-3;
        let t10 = trace.iter().position(|&q| q >= 0.04).unwrap() as f64 * h;
        let t90 = trace.iter().position(|&q| q >= 0.36).unwrap() as f64 * h;
        t90 - t10
    };
    let r1 = rise_time(1e-3);
    let r2 = rise_time(5e-3);
    let r3 = rise_time(2e-2);
    assert!(r1 < r2 && r2 < r3, "rise times must grow: {r1} {r2} {r3}");
}

/// Holding q_ref = 0 on flat ground keeps the chain within a centimetre of
/// its start over 10 s: no self-propulsion at rest.
#[test]
fn chain_at_rest_does_not_walk() {
    let cfg = RobotConfig::default();
    let (mut world, robot) = build_robot(&cfg, &SimParams::default()).unwrap();
    let start: Vec<Vector3<f64>> = robot
        .links
        .iter()
        .map(|&i| world.bodies[i].position)
        .collect();
    let h = 1e-3;
    let zeros = [0.0; JOINT_COUNT];
    for _ in 0..10_000 {
        robot.apply_actuation(&mut world, &zeros);
        world.step(h).unwrap();
    }
    for (k, &id) in robot.links.iter().enumerate() {
        let d = world.bodies[id].position - start[k];
        let planar = (d.x * d.x + d.y * d.y).sqrt();
        assert!(planar < 0.01, "link {k} drifted {planar:.4} m");
    }
}
