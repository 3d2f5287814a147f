//! Constraint rows and the soft-constraint parameter mapping.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;

/// Spring–damper view of a soft constraint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SoftParams {
    /// Step size (s).
    pub h: f64,
    /// Spring constant.
    pub kp: f64,
    /// Damping constant.
    pub kd: f64,
}

impl SoftParams {
    pub fn new(h: f64, kp: f64, kd: f64) -> Result<Self, PhysicsError> {
        if !(h > 0.0) || kp < 0.0 || kd < 0.0 {
            return Err(PhysicsError::InvalidConfig(format!(
                "soft params require h > 0, kp >= 0, kd >= 0 (got h={h}, kp={kp}, kd={kd})"
            )));
        }
        if h * kp + kd <= 0.0 {
            return Err(PhysicsError::DegenerateSoftParams);
        }
        Ok(Self { h, kp, kd })
    }
}

/// Map an implicitly integrated spring-damper onto the soft-constraint pair
/// `(erp, cfm)`:
///
/// ```text
/// erp = h*kp / (h*kp + kd)        cfm = 1 / (h*kp + kd)
/// ```
///
/// A constraint driven with these values follows the same trajectory as the
/// explicit spring-damper force model integrated implicitly to first order.
pub fn erp_cfm_from_spring(soft: SoftParams) -> Result<(f64, f64), PhysicsError> {
    let denom = soft.h * soft.kp + soft.kd;
    if denom <= 0.0 {
        return Err(PhysicsError::DegenerateSoftParams);
    }
    Ok((soft.h * soft.kp / denom, 1.0 / denom))
}

/// One scalar velocity constraint acting on one or two bodies.
///
/// The row asks the solver for `J v' = rhs` softened by `cfm`, with the force
/// multiplier clamped to `[lambda_lo, lambda_hi]`. Positional stabilisation is
/// already folded into `rhs` by the assembler as `-(erp/h) * error`.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub body_a: usize,
    /// Second body, or `None` when constraining against the static environment.
    pub body_b: Option<usize>,
    pub j_lin_a: Vector3<f64>,
    pub j_ang_a: Vector3<f64>,
    pub j_lin_b: Vector3<f64>,
    pub j_ang_b: Vector3<f64>,
    /// Target constraint-space velocity (with Baumgarte term folded in).
    pub rhs: f64,
    /// Constraint force mixing; `>= 0`.
    pub cfm: f64,
    /// Lower force bound (N or N m).
    pub lambda_lo: f64,
    /// Upper force bound.
    pub lambda_hi: f64,
}

impl ConstraintRow {
    /// Bilateral row on a single body.
    pub fn single(body: usize, j_lin: Vector3<f64>, j_ang: Vector3<f64>, rhs: f64, cfm: f64) -> Self {
        Self {
            body_a: body,
            body_b: None,
            j_lin_a: j_lin,
            j_ang_a: j_ang,
            j_lin_b: Vector3::zeros(),
            j_ang_b: Vector3::zeros(),
            rhs,
            cfm,
            lambda_lo: f64::NEG_INFINITY,
            lambda_hi: f64::INFINITY,
        }
    }

    /// Bilateral row between two bodies.
    #[allow(clippy::too_many_arguments)]
    pub fn pair(
        body_a: usize,
        body_b: usize,
        j_lin_a: Vector3<f64>,
        j_ang_a: Vector3<f64>,
        j_lin_b: Vector3<f64>,
        j_ang_b: Vector3<f64>,
        rhs: f64,
        cfm: f64,
    ) -> Self {
        Self {
            body_a,
            body_b: Some(body_b),
            j_lin_a,
            j_ang_a,
            j_lin_b,
            j_ang_b,
            rhs,
            cfm,
            lambda_lo: f64::NEG_INFINITY,
            lambda_hi: f64::INFINITY,
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        self.lambda_lo = lo;
        self.lambda_hi = hi;
        self
    }
}
