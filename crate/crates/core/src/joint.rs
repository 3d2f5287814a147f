//! Hinge joints between body pairs.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::PhysicsError;

/// A hinge: coincident anchor points plus a single free rotation axis.
///
/// Each hinge removes five degrees of freedom and therefore contributes five
/// constraint rows per step (three translational, two rotational). Optional
/// angle limits add unilateral rows when violated.
#[derive(Debug, Clone)]
pub struct HingeJoint {
    pub body_a: usize,
    pub body_b: usize,
    /// Anchor in body a's frame (m).
    pub anchor_a: Vector3<f64>,
    /// Anchor in body b's frame (m).
    pub anchor_b: Vector3<f64>,
    /// Hinge axis in body a's frame (unit).
    pub axis_a: Vector3<f64>,
    /// Hinge axis in body b's frame (unit).
    pub axis_b: Vector3<f64>,
    /// Error reduction parameter in `[0, 1]`.
    pub erp: f64,
    /// Constraint force mixing, `>= 0`.
    pub cfm: f64,
    /// Lower angle limit (rad), if any.
    pub limit_lo: Option<f64>,
    /// Upper angle limit (rad), if any.
    pub limit_hi: Option<f64>,
    /// Relative orientation `qa^-1 qb` captured at construction; the joint
    /// angle is the twist of the deviation from this rest pose about `axis_a`.
    pub rest_rel: UnitQuaternion<f64>,
}

impl HingeJoint {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        body_a: usize,
        body_b: usize,
        anchor_a: Vector3<f64>,
        anchor_b: Vector3<f64>,
        axis_a: Vector3<f64>,
        axis_b: Vector3<f64>,
        erp: f64,
        cfm: f64,
    ) -> Result<Self, PhysicsError> {
        if axis_a.norm() < 1e-12 || axis_b.norm() < 1e-12 {
            return Err(PhysicsError::InvalidConfig("hinge axis must be non-zero".into()));
        }
        if !(0.0..=1.0).contains(&erp) {
            return Err(PhysicsError::InvalidConfig(format!(
                "erp must be in [0, 1], got {erp}"
            )));
        }
        if cfm < 0.0 {
            return Err(PhysicsError::InvalidConfig(format!(
                "cfm must be non-negative, got {cfm}"
            )));
        }
        if body_a == body_b {
            return Err(PhysicsError::InvalidConfig(
                "hinge must connect two distinct bodies".into(),
            ));
        }
        Ok(Self {
            body_a,
            body_b,
            anchor_a,
            anchor_b,
            axis_a: axis_a.normalize(),
            axis_b: axis_b.normalize(),
            erp,
            cfm,
            limit_lo: None,
            limit_hi: None,
            rest_rel: UnitQuaternion::identity(),
        })
    }

    pub fn with_limits(mut self, lo: f64, hi: f64) -> Result<Self, PhysicsError> {
        if lo > hi {
            return Err(PhysicsError::InvalidConfig(format!(
                "joint limits out of order: {lo} > {hi}"
            )));
        }
        self.limit_lo = Some(lo);
        self.limit_hi = Some(hi);
        Ok(self)
    }
}
