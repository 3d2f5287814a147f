//! The 12-link snake robot: chain construction, actuator model, and state
//! readout partitioned into head pose and joint angles.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::body::RigidBody;
use crate::error::PhysicsError;
use crate::joint::HingeJoint;
use crate::params::SimParams;
use crate::world::{Shape, World};

pub const LINK_COUNT: usize = 12;
pub const JOINT_COUNT: usize = 11;

/// Hinge axis class. Pitch bends the chain vertically (body-frame y axis for
/// links laid along x), yaw bends it in the ground plane (body-frame z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointAxis {
    Pitch,
    Yaw,
}

impl JointAxis {
    pub fn body_axis(self) -> Vector3<f64> {
        match self {
            JointAxis::Pitch => Vector3::y(),
            JointAxis::Yaw => Vector3::z(),
        }
    }
}

/// DC-servo actuator model shared by all joints: transmission inertia,
/// internal damping, motor constant, and the torque saturation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActuatorParams {
    /// Transmission inertia reflected onto the joint axis (kg m^2).
    pub j_m: f64,
    /// Internal damping (N m s/rad).
    pub b_m: f64,
    /// Motor constant (aggregated torque gain).
    pub k_t: f64,
    /// Torque saturation (N m).
    pub u_max: f64,
}

impl ActuatorParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.j_m > 0.0) || self.b_m < 0.0 || !(self.k_t > 0.0) || !(self.u_max > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "actuator requires j_m > 0, b_m >= 0, k_t > 0, u_max > 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            j_m: 1e-3,
            b_m: 0.02,
            k_t: 1.0,
            u_max: 4.0,
        }
    }
}

/// PD gains of the position servo running on every actuated joint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ServoGains {
    /// Proportional gain (N m / rad before the motor constant).
    pub kp: f64,
    /// Derivative gain (N m s / rad before the motor constant).
    pub kd: f64,
}

impl Default for ServoGains {
    fn default() -> Self {
        Self { kp: 60.0, kd: 1.2 }
    }
}

/// Reference angle for one joint at one control tick.
#[derive(Debug, Clone, Copy)]
pub struct JointCommand {
    pub q_ref: f64,
}

/// Robot geometry and actuation description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotConfig {
    /// Link length (m).
    pub link_length: f64,
    /// Contact sphere / link radius (m).
    pub link_radius: f64,
    /// Mass per link (kg).
    pub link_mass: f64,
    /// Symmetric mechanical joint limit (rad).
    pub joint_limit: f64,
    /// Axis pattern, head-most joint first; must alternate.
    pub axes: Vec<JointAxis>,
    pub actuator: ActuatorParams,
    pub servo: ServoGains,
}

impl Default for RobotConfig {
    fn default() -> Self {
        // The platform's masses and dimensions are declared assumptions at
        // desk scale; everything is overridable through the config file.
        let axes = (0..JOINT_COUNT)
            .map(|i| if i % 2 == 0 { JointAxis::Pitch } else { JointAxis::Yaw })
            .collect();
        Self {
            link_length: 0.1,
            link_radius: 0.04,
            link_mass: 0.4,
            joint_limit: 100.0_f64.to_radians(),
            axes,
            actuator: ActuatorParams::default(),
            servo: ServoGains::default(),
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if self.axes.len() != JOINT_COUNT {
            return Err(PhysicsError::InvalidConfig(format!(
                "expected {JOINT_COUNT} joint axes, got {}",
                self.axes.len()
            )));
        }
        for w in self.axes.windows(2) {
            if w[0] == w[1] {
                return Err(PhysicsError::InvalidConfig(
                    "joint axes must alternate between pitch and yaw".into(),
                ));
            }
        }
        if !(self.link_length > 0.0 && self.link_radius > 0.0 && self.link_mass > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "link geometry and mass must be positive".into(),
            ));
        }
        if !(self.joint_limit > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "joint limit must be positive".into(),
            ));
        }
        self.actuator.validate()
    }

    /// Joints driven with the pitch amplitude (head-most joint is index 0).
    pub fn pitch_joints(&self) -> Vec<usize> {
        (0..JOINT_COUNT).filter(|&i| self.axes[i] == JointAxis::Pitch).collect()
    }

    pub fn yaw_joints(&self) -> Vec<usize> {
        (0..JOINT_COUNT).filter(|&i| self.axes[i] == JointAxis::Yaw).collect()
    }
}

/// Handle tying a built robot to its world indices.
#[derive(Debug, Clone)]
pub struct Robot {
    pub links: [usize; LINK_COUNT],
    pub joints: [usize; JOINT_COUNT],
    pub actuator: ActuatorParams,
    pub servo: ServoGains,
    pub config: RobotConfig,
}

/// Head pose extracted from the unactuated partition of the state.
#[derive(Debug, Clone, Copy)]
pub struct HeadPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

/// Build the 12-link chain lying along +x on the ground plane.
///
/// The head link (index 0) carries no actuator; every hinge gets the ERP/CFM
/// softness from `params`, and the transmission inertia is reflected onto the
/// child link's axis inertia.
pub fn build_robot(cfg: &RobotConfig, params: &SimParams) -> Result<(World, Robot), PhysicsError> {
    cfg.validate()?;
    params.validate()?;

    let mut world = World::new();
    world.ground = params.ground();

    let actuator = ActuatorParams {
        j_m: params.j_m,
        b_m: params.b_m,
        k_t: params.k_t,
        u_max: cfg.actuator.u_max,
    };
    actuator.validate()?;

    let l = cfg.link_length;
    let mut links = [0usize; LINK_COUNT];
    for (i, slot) in links.iter_mut().enumerate() {
        let mut body = RigidBody::cylinder_x(cfg.link_mass, cfg.link_radius, l)?
            .at(Vector3::new(i as f64 * l, 0.0, cfg.link_radius));
        // Reflected transmission inertia of the joint driving this link
        // (links 1.. are children of joints 0..).
        if i > 0 {
            let axis = cfg.axes[i - 1].body_axis();
            body.inertia_body += actuator.j_m * axis * axis.transpose();
        }
        *slot = world.add_body_with_shape(body, Shape::Sphere { radius: cfg.link_radius });
    }

    let mut joints = [0usize; JOINT_COUNT];
    for (i, slot) in joints.iter_mut().enumerate() {
        let axis = cfg.axes[i].body_axis();
        let joint = HingeJoint::new(
            links[i],
            links[i + 1],
            Vector3::new(l / 2.0, 0.0, 0.0),
            Vector3::new(-l / 2.0, 0.0, 0.0),
            axis,
            axis,
            params.erp,
            params.cfm,
        )?
        .with_limits(-cfg.joint_limit, cfg.joint_limit)?;
        *slot = world.add_joint(joint)?;
    }

    Ok((
        world,
        Robot {
            links,
            joints,
            actuator,
            servo: cfg.servo,
            config: cfg.clone(),
        },
    ))
}

/// Servo torque for one joint:
///
/// ```text
/// u = clamp(k_t * (kp * (q_ref - q) - kd * q_dot), ±u_max) - b_m * q_dot
/// ```
pub fn actuator_torque(
    q: f64,
    q_dot: f64,
    cmd: JointCommand,
    p: &ActuatorParams,
    gains: &ServoGains,
) -> f64 {
    actuator_torque_scaled(q, q_dot, cmd, p, gains, 1.0)
}

/// [`actuator_torque`] with the rate-feedback terms scaled by `damping_scale`.
///
/// The stepper passes `1 / (1 + h c / I_eff)` (with `c = k_t kd + b_m` and
/// `I_eff` the joint's effective axis inertia), which integrates the damping
/// implicitly: the explicit form goes unstable for strong damping on light
/// joints. The scale tends to 1 as `h` shrinks, recovering the plain law.
pub fn actuator_torque_scaled(
    q: f64,
    q_dot: f64,
    cmd: JointCommand,
    p: &ActuatorParams,
    gains: &ServoGains,
    damping_scale: f64,
) -> f64 {
    let servo = p.k_t * (gains.kp * (cmd.q_ref - q) - gains.kd * q_dot * damping_scale);
    servo.clamp(-p.u_max, p.u_max) - p.b_m * q_dot * damping_scale
}

impl Robot {
    /// Compute and apply servo torques for all actuated joints. `h` is the
    /// physics step the torques will be integrated with. Commands beyond the
    /// mechanical joint limit are clamped.
    pub fn apply_actuation_stepped(&self, world: &mut World, q_ref: &[f64; JOINT_COUNT], h: f64) {
        let c = self.actuator.k_t * self.servo.kd + self.actuator.b_m;
        let limit = self.config.joint_limit;
        for (i, &joint) in self.joints.iter().enumerate() {
            let q = world.joint_angle(joint);
            let q_dot = world.joint_rate(joint);
            let i_eff = world.joint_axis_inertia(joint);
            let scale = 1.0 / (1.0 + h * c / i_eff.max(1e-9));
            let u = actuator_torque_scaled(
                q,
                q_dot,
                JointCommand {
                    q_ref: q_ref[i].clamp(-limit, limit),
                },
                &self.actuator,
                &self.servo,
                scale,
            );
            world.apply_joint_torque(joint, u);
        }
    }

    /// Compute and apply servo torques at the default physics step.
    pub fn apply_actuation(&self, world: &mut World, q_ref: &[f64; JOINT_COUNT]) {
        self.apply_actuation_stepped(world, q_ref, 1e-3);
    }

    /// Head pose plus the 11 joint angles (the underactuated / actuated
    /// partition of the state).
    pub fn partition_state(&self, world: &World) -> (HeadPose, [f64; JOINT_COUNT]) {
        let head = &world.bodies[self.links[0]];
        let mut q = [0.0; JOINT_COUNT];
        for (i, &joint) in self.joints.iter().enumerate() {
            q[i] = world.joint_angle(joint);
        }
        (
            HeadPose {
                position: head.position,
                orientation: head.orientation,
            },
            q,
        )
    }

    pub fn total_mass(&self, world: &World) -> f64 {
        self.links.iter().map(|&i| world.bodies[i].mass).sum()
    }

    /// Direction from the head towards link 2, projected onto the plane.
    pub fn forward_axis(&self, world: &World) -> nalgebra::Vector2<f64> {
        let head = world.bodies[self.links[0]].position;
        let second = world.bodies[self.links[1]].position;
        let d = second - head;
        let v = nalgebra::Vector2::new(d.x, d.y);
        if v.norm() < 1e-9 {
            nalgebra::Vector2::new(1.0, 0.0)
        } else {
            v.normalize()
        }
    }
}

/// Inertia helper exposed for tests: solid cylinder about its own axes.
pub fn cylinder_inertia(mass: f64, radius: f64, length: f64) -> Matrix3<f64> {
    let ixx = 0.5 * mass * radius * radius;
    let iyy = mass * (3.0 * radius * radius + length * length) / 12.0;
    Matrix3::from_diagonal(&Vector3::new(ixx, iyy, iyy))
}
