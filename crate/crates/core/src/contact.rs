//! Ground interaction: compliant penalty contact with Stribeck friction,
//! the smooth stick-slip force curve, and constraint-based contact rows with
//! two friction-pyramid approximations.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintRow;
use crate::error::PhysicsError;
use crate::math::tangent_basis;

/// Velocity scale used to smooth the sign function in the tangential ground
/// force; raw `sgn` chatters at stick.
pub const SGN_SMOOTHING_VEL: f64 = 1e-4;

/// Compliant ground model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundParams {
    /// Normal spring stiffness (N/m).
    pub k1: f64,
    /// Normal damping (N s/m).
    pub k2: f64,
    /// Coulomb friction coefficient.
    pub mu_c: f64,
    /// Static friction coefficient.
    pub mu_s: f64,
    /// Viscous friction coefficient (N s/m).
    pub mu_v: f64,
    /// Stribeck velocity (m/s), strictly positive.
    pub v_s: f64,
}

impl GroundParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if self.k1 < 0.0 || self.k2 < 0.0 || self.mu_c < 0.0 || self.mu_s < 0.0 || self.mu_v < 0.0 {
            return Err(PhysicsError::InvalidConfig(
                "ground coefficients must be non-negative".into(),
            ));
        }
        if !(self.v_s > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "Stribeck velocity must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for GroundParams {
    fn default() -> Self {
        Self {
            k1: 2500.0,
            k2: 40.0,
            mu_c: 0.35,
            mu_s: 0.5,
            mu_v: 0.3,
            v_s: 0.08,
        }
    }
}

/// Parameters of the smooth stick-slip friction curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StickSlipParams {
    /// Breakaway force (N).
    pub f_brk: f64,
    /// Coulomb force (N).
    pub f_c: f64,
    /// Viscous coefficient (N s/m).
    pub f_v: f64,
    /// Breakaway velocity (m/s), strictly positive.
    pub v_brk: f64,
}

impl StickSlipParams {
    pub fn new(f_brk: f64, f_c: f64, f_v: f64, v_brk: f64) -> Result<Self, PhysicsError> {
        if !(f_brk >= f_c && f_c >= 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "stick-slip requires F_brk >= F_C >= 0".into(),
            ));
        }
        if !(v_brk > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "breakaway velocity must be positive".into(),
            ));
        }
        Ok(Self { f_brk, f_c, f_v, v_brk })
    }

    /// Stribeck velocity threshold `v_brk / sqrt(2)`.
    pub fn v_st(&self) -> f64 {
        self.v_brk / std::f64::consts::SQRT_2
    }

    /// Coulomb velocity threshold `v_brk / 10`.
    pub fn v_coul(&self) -> f64 {
        self.v_brk / 10.0
    }
}

/// One detected contact.
#[derive(Debug, Clone)]
pub struct ContactPoint {
    /// Body the contact acts on.
    pub body: usize,
    /// Second body for pair contacts; `None` against the static ground.
    pub other: Option<usize>,
    /// Contact location in world coordinates (m).
    pub point: Vector3<f64>,
    /// Contact normal (unit, pointing out of the surface towards `body`).
    pub normal: Vector3<f64>,
    /// Signed separation along the normal; `<= 0` when in contact (m).
    pub penetration: f64,
    /// Velocity of `body`'s material point relative to the other surface (m/s).
    pub rel_vel: Vector3<f64>,
    /// Stable identifier of the contact feature (e.g. cuboid corner index),
    /// used to warm-start the solver across steps.
    pub feature: u32,
}

/// Velocity-dependent friction coefficient
/// `s(v) = mu_c - (mu_c - mu_s) * exp(-v^2 / v_s^2)`.
///
/// Collapses to `mu_s` at rest and approaches `mu_c` at speed.
pub fn stribeck_coefficient(v: f64, gp: &GroundParams) -> f64 {
    gp.mu_c - (gp.mu_c - gp.mu_s) * (-(v * v) / (gp.v_s * gp.v_s)).exp()
}

/// Ground reaction force of the compliant contact model.
///
/// Zero when separated. In contact the normal component is the spring-damper
/// `-k1*p - k2*p_dot` clamped to be non-adhesive, and each tangential axis
/// carries `-s_i * F_n * sgn(v_i) - mu_v * v_i` with the sign smoothed by
/// `tanh(v / SGN_SMOOTHING_VEL)`.
pub fn ground_force(cp: &ContactPoint, gp: &GroundParams) -> Vector3<f64> {
    if cp.penetration > 0.0 {
        return Vector3::zeros();
    }
    let n = cp.normal;
    let v_n = cp.rel_vel.dot(&n);
    // Clamped: the spring-damper must not pull the body back down while it
    // separates.
    let f_n = (-gp.k1 * cp.penetration - gp.k2 * v_n).max(0.0);

    let v_t = cp.rel_vel - n * v_n;
    let (t1, t2) = tangent_basis(&n);
    let mut f = n * f_n;
    for t in [t1, t2] {
        let v_i = v_t.dot(&t);
        let s_i = stribeck_coefficient(v_i, gp);
        let sgn = (v_i / SGN_SMOOTHING_VEL).tanh();
        f += t * (-s_i * f_n * sgn - gp.mu_v * v_i);
    }
    f
}

/// [`ground_force`] with the tangential components clamped so the friction
/// impulse over one step of size `h` cannot reverse the sliding velocity.
///
/// The smoothed stick term has a slope of order `mu_s k1 / SGN_SMOOTHING_VEL`
/// near rest, far too stiff for explicit integration; without the clamp a
/// resting body chatters at the contact. `m_eff` is the effective mass felt
/// at the contact point along each tangent axis.
pub fn ground_force_clamped(
    cp: &ContactPoint,
    gp: &GroundParams,
    h: f64,
    m_eff: (f64, f64),
) -> Vector3<f64> {
    if cp.penetration > 0.0 {
        return Vector3::zeros();
    }
    let n = cp.normal;
    let v_n = cp.rel_vel.dot(&n);
    let f_n = (-gp.k1 * cp.penetration - gp.k2 * v_n).max(0.0);

    let v_t = cp.rel_vel - n * v_n;
    let (t1, t2) = tangent_basis(&n);
    let mut f = n * f_n;
    for (t, m) in [(t1, m_eff.0), (t2, m_eff.1)] {
        let v_i = v_t.dot(&t);
        let s_i = stribeck_coefficient(v_i, gp);
        let sgn = (v_i / SGN_SMOOTHING_VEL).tanh();
        let mut f_i = -s_i * f_n * sgn - gp.mu_v * v_i;
        if f_i * v_i < 0.0 {
            // Decelerating: cap at the impulse that exactly stops the point.
            let stop = m * v_i.abs() / h;
            f_i = f_i.clamp(-stop, stop);
        }
        f += t * f_i;
    }
    f
}

/// Smooth stick-slip friction force:
///
/// ```text
/// F(v) = sqrt(2e) (F_brk - F_C) exp(-(v/v_St)^2) (v/v_St)
///        + F_C tanh(v/v_Coul) + f_v v
/// ```
pub fn stick_slip_force(v: f64, p: &StickSlipParams) -> f64 {
    let x = v / p.v_st();
    (2.0 * std::f64::consts::E).sqrt() * (p.f_brk - p.f_c) * (-x * x).exp() * x
        + p.f_c * (v / p.v_coul()).tanh()
        + p.f_v * v
}

/// Friction-pyramid variant used when contacts are solved as constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PyramidMode {
    /// Tangential force bounded by a constant limit, independent of the
    /// normal force; `mu` is interpreted directly as that limit (N).
    ConstantLimit,
    /// Normals are solved frictionless first; the tangential bound is then
    /// `mu * |F_N|` with the normal force found in that first pass.
    NormalScaled { normal_force: f64 },
}

/// Build constraint rows for one contact: a unilateral normal row plus two
/// bounded tangential rows.
///
/// `com_a` (and `com_b` for pair contacts) locate the centres of mass so the
/// rows carry the correct lever arms. `erp`, `cfm` and `h` shape the normal
/// row's Baumgarte term; the tangential rows target zero sliding velocity
/// within their force bounds.
#[allow(clippy::too_many_arguments)]
pub fn contact_rows(
    cp: &ContactPoint,
    mu: f64,
    mode: PyramidMode,
    erp: f64,
    cfm: f64,
    h: f64,
    com_a: Vector3<f64>,
    com_b: Option<Vector3<f64>>,
) -> Vec<ConstraintRow> {
    assert!(mu >= 0.0, "friction coefficient must be non-negative");
    let r_a = cp.point - com_a;
    let mut rows = Vec::with_capacity(3);

    let make = |dir: Vector3<f64>, rhs: f64, cfm: f64| -> ConstraintRow {
        // Row measures the velocity of the contact point on `body` relative
        // to the other surface along `dir`.
        match (cp.other, com_b) {
            (Some(b), Some(cb)) => {
                let r_b = cp.point - cb;
                ConstraintRow::pair(cp.body, b, dir, r_a.cross(&dir), -dir, -r_b.cross(&dir), rhs, cfm)
            }
            _ => ConstraintRow::single(cp.body, dir, r_a.cross(&dir), rhs, cfm),
        }
    };

    let depth = cp.penetration.min(0.0);
    let normal_rhs = -(erp / h) * depth;
    rows.push(make(cp.normal, normal_rhs, cfm).with_bounds(0.0, f64::INFINITY));

    let limit = match mode {
        PyramidMode::ConstantLimit => mu,
        PyramidMode::NormalScaled { normal_force } => mu * normal_force.abs(),
    };
    let (t1, t2) = tangent_basis(&cp.normal);
    for t in [t1, t2] {
        rows.push(make(t, 0.0, cfm).with_bounds(-limit, limit));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gp(mu_c: f64, mu_s: f64) -> GroundParams {
        GroundParams {
            k1: 1000.0,
            k2: 50.0,
            mu_c,
            mu_s,
            mu_v: 0.0,
            v_s: 0.1,
            }
    }

    #[test]
    fn stribeck_limits() {
        let p = gp(0.3, 0.5);
        assert_relative_eq!(stribeck_coefficient(0.0, &p), 0.5, epsilon = 1e-15);
        assert_relative_eq!(stribeck_coefficient(1e6, &p), 0.3, epsilon = 1e-9);
        // v = v_s: s = mu_c - (mu_c - mu_s) e^-1 = 0.3 + 0.2/e.
        assert_relative_eq!(
            stribeck_coefficient(0.1, &p),
            0.3 + 0.2 * (-1.0f64).exp(),
            epsilon = 1e-12
        );
        assert_relative_eq!(stribeck_coefficient(0.1, &p), 0.37358, epsilon = 1e-5);
    }

    #[test]
    fn stribeck_monotone_decreasing_when_static_exceeds_coulomb() {
        let p = gp(0.3, 0.5);
        let mut prev = stribeck_coefficient(0.0, &p);
        for i in 1..200 {
            let v = i as f64 * 0.01;
            let s = stribeck_coefficient(v, &p);
            assert!(s <= prev + 1e-15);
            prev = s;
        }
    }

    #[test]
    fn ground_force_separated_is_zero() {
        let cp = ContactPoint {
            body: 0,
            other: None,
            point: Vector3::zeros(),
            normal: Vector3::z(),
            penetration: 0.01,
            rel_vel: Vector3::new(1.0, 2.0, -3.0),
            feature: 0,
        };
        assert_relative_eq!(ground_force(&cp, &gp(0.3, 0.5)), Vector3::zeros());
    }

    #[test]
    fn ground_force_hand_value() {
        // k1=1000, k2=50, p=-0.01, vz=-0.1 -> F_z = 10 + 5 = 15 N; no sliding.
        let cp = ContactPoint {
            body: 0,
            other: None,
            point: Vector3::zeros(),
            normal: Vector3::z(),
            penetration: -0.01,
            rel_vel: Vector3::new(0.0, 0.0, -0.1),
            feature: 0,
        };
        let f = ground_force(&cp, &gp(0.3, 0.5));
        assert_relative_eq!(f.z, 15.0, epsilon = 1e-12);
        assert_relative_eq!(f.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_force_clamps_adhesion() {
        // Fast separation: spring-damper would pull the body down; clamp to 0.
        let cp = ContactPoint {
            body: 0,
            other: None,
            point: Vector3::zeros(),
            normal: Vector3::z(),
            penetration: -0.001,
            rel_vel: Vector3::new(0.0, 0.0, 1.0),
            feature: 0,
        };
        let f = ground_force(&cp, &gp(0.3, 0.5));
        assert_relative_eq!(f, Vector3::zeros());
    }

    #[test]
    fn ground_force_opposes_sliding() {
        let p = gp(0.3, 0.5);
        let cp = ContactPoint {
            body: 0,
            other: None,
            point: Vector3::zeros(),
            normal: Vector3::z(),
            penetration: -0.004,
            rel_vel: Vector3::new(0.2, 0.0, 0.0),
            feature: 0,
        };
        let f = ground_force(&cp, &p);
        assert!(f.x < 0.0, "friction must oppose +x sliding, got {}", f.x);
        let fn_expected = 1000.0 * 0.004;
        let s = stribeck_coefficient(0.2, &p);
        assert_relative_eq!(f.x.abs(), s * fn_expected, max_relative = 1e-6);
    }

    #[test]
    fn ground_force_continuous_near_stick() {
        // The smoothed sgn keeps the tangential force continuous through v=0.
        let p = gp(0.3, 0.5);
        let mut prev: Option<f64> = None;
        for i in -100..=100 {
            let v = i as f64 * 1e-6;
            let cp = ContactPoint {
                body: 0,
                other: None,
                point: Vector3::zeros(),
                normal: Vector3::z(),
                penetration: -0.004,
                rel_vel: Vector3::new(v, 0.0, 0.0),
                feature: 0,
            };
            let f = ground_force(&cp, &p).x;
            if let Some(prev) = prev {
                assert!((f - prev).abs() < 0.1, "jump at v={v}: {prev} -> {f}");
            }
            prev = Some(f);
        }
    }

    #[test]
    fn stick_slip_odd_and_zero_at_rest() {
        let p = StickSlipParams::new(2.0, 1.0, 0.5, 0.1).unwrap();
        assert_relative_eq!(stick_slip_force(0.0, &p), 0.0);
        for i in 1..500 {
            let v = i as f64 * 0.003;
            assert_relative_eq!(
                stick_slip_force(-v, &p),
                -stick_slip_force(v, &p),
                epsilon = 1e-12
            );
        }
    }

    /// The sqrt(2e) normalisation puts the Stribeck peak at v = v_St/sqrt(2)
    /// with value F_brk (for F_C = 0, f_v = 0). Verified by dense scan.
    #[test]
    fn stick_slip_peak_is_breakaway_force() {
        let p = StickSlipParams::new(3.0, 0.0, 0.0, 0.2).unwrap();
        let v_peak_expected = p.v_st() / std::f64::consts::SQRT_2;
        let mut best_v = 0.0;
        let mut best_f = f64::NEG_INFINITY;
        let n = 200_000;
        for i in 0..=n {
            let v = 4.0 * p.v_brk * i as f64 / n as f64;
            let f = stick_slip_force(v, &p);
            if f > best_f {
                best_f = f;
                best_v = v;
            }
        }
        assert_relative_eq!(best_f, p.f_brk, max_relative = 1e-3);
        assert_relative_eq!(best_v, v_peak_expected, max_relative = 1e-3);
    }

    #[test]
    fn contact_rows_shape_and_bounds() {
        let cp = ContactPoint {
            body: 3,
            other: None,
            point: Vector3::zeros(),
            normal: Vector3::z(),
            penetration: -0.002,
            rel_vel: Vector3::zeros(),
            feature: 0,
        };
        let rows = contact_rows(
            &cp,
            0.5,
            PyramidMode::NormalScaled { normal_force: 10.0 },
            0.2,
            0.0,
            0.001,
            Vector3::new(0.0, 0.0, 0.1),
            None,
        );
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].lambda_lo, 0.0);
        assert!(rows[0].lambda_hi.is_infinite());
        assert_relative_eq!(rows[0].rhs, 0.2 * 0.002 / 0.001, epsilon = 1e-12);
        for r in &rows[1..] {
            assert_relative_eq!(r.lambda_hi, 5.0);
            assert_relative_eq!(r.lambda_lo, -5.0);
            // Lever arm from the COM must appear in the angular jacobian.
            let lever = Vector3::new(0.0, 0.0, -0.1);
            assert_relative_eq!(r.j_ang_a, lever.cross(&r.j_lin_a), epsilon = 1e-12);
        }

        let rows = contact_rows(
            &cp,
            7.5,
            PyramidMode::ConstantLimit,
            0.2,
            0.0,
            0.001,
            Vector3::zeros(),
            None,
        );
        assert_relative_eq!(rows[1].lambda_hi, 7.5);
    }
}
