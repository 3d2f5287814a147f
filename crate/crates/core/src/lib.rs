//! Simulation core for an articulated snake robot on a frictional ground plane.
//!
//! The world is a maximal-coordinate rigid-body system: every link carries its
//! full 6-DOF state and hinges are enforced as soft constraint rows solved by a
//! projected Gauss–Seidel sweep each step. Ground interaction comes either from
//! a compliant penalty model with Stribeck friction or from unilateral contact
//! rows with a friction-pyramid approximation.
//!
//! Layered on top: the 12-link robot description with its DC-servo actuator
//! model, sine and coupled-oscillator gait generators, and the episode runner
//! that records trajectories and computes comparison metrics.

pub mod body;
pub mod constraint;
pub mod contact;
pub mod error;
pub mod gait;
pub mod joint;
pub mod math;
pub mod metrics;
pub mod params;
pub mod robot;
pub mod runtime;
pub mod solver;
pub mod world;

pub use body::RigidBody;
pub use constraint::{erp_cfm_from_spring, ConstraintRow, SoftParams};
pub use contact::{ContactPoint, GroundParams, PyramidMode, StickSlipParams};
pub use error::PhysicsError;
pub use gait::{KuramotoParams, KuramotoState, SineGaitParams};
pub use joint::HingeJoint;
pub use params::{ParamBounds, SimParams};
pub use robot::{ActuatorParams, Robot, RobotConfig, JOINT_COUNT, LINK_COUNT};
pub use runtime::{EpisodeConfig, Gait, Sample, Trajectory};
pub use solver::SolverConfig;
pub use world::{ContactMode, Shape, World};
