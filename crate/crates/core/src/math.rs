//! Small geometric helpers used throughout the crate.

use nalgebra::{UnitQuaternion, Vector3};

/// Wrap an angle to the half-open interval `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Signed twist of a rotation about a unit axis (swing–twist decomposition).
///
/// Returns the angle of the component of `rot` that rotates about `axis`,
/// wrapped to `(-pi, pi]`. Valid for rotations whose twist stays inside
/// `(-pi, pi)`; a hinge with limits well below pi never leaves that range.
pub fn twist_angle(rot: &UnitQuaternion<f64>, axis: &Vector3<f64>) -> f64 {
    let q = rot.into_inner();
    let proj = q.imag().dot(axis);
    wrap_angle(2.0 * proj.atan2(q.w))
}

/// Any two unit vectors orthogonal to `n`, forming a right-handed frame.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Signed angle from `a` to `b` in the plane (counter-clockwise positive).
pub fn signed_angle_2d(a: &nalgebra::Vector2<f64>, b: &nalgebra::Vector2<f64>) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    let dot = a.dot(b);
    cross.atan2(dot)
}
