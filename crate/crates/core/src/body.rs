//! Rigid bodies in maximal coordinates.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::error::PhysicsError;

/// Full 6-DOF state and mass properties of a single link.
#[derive(Debug, Clone)]
pub struct RigidBody {
    /// World position of the centre of mass (m).
    pub position: Vector3<f64>,
    /// World orientation (unit quaternion, renormalised every step).
    pub orientation: UnitQuaternion<f64>,
    /// Linear velocity of the centre of mass (m/s).
    pub lin_vel: Vector3<f64>,
    /// Angular velocity in the world frame (rad/s).
    pub ang_vel: Vector3<f64>,
    /// Mass (kg), strictly positive.
    pub mass: f64,
    /// Inertia tensor in the body frame (kg m^2), symmetric positive-definite.
    pub inertia_body: Matrix3<f64>,

    pub(crate) inv_mass: f64,
    pub(crate) force: Vector3<f64>,
    pub(crate) torque: Vector3<f64>,
}

impl RigidBody {
    pub fn new(mass: f64, inertia_body: Matrix3<f64>) -> Result<Self, PhysicsError> {
        if !(mass > 0.0) {
            return Err(PhysicsError::InvalidConfig(format!(
                "body mass must be positive, got {mass}"
            )));
        }
        let sym = (inertia_body - inertia_body.transpose()).norm();
        if sym > 1e-9 * inertia_body.norm().max(1.0) {
            return Err(PhysicsError::InvalidConfig(
                "inertia tensor must be symmetric".into(),
            ));
        }
        if inertia_body.cholesky().is_none() {
            return Err(PhysicsError::InvalidConfig(
                "inertia tensor must be positive-definite".into(),
            ));
        }
        Ok(Self {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
            lin_vel: Vector3::zeros(),
            ang_vel: Vector3::zeros(),
            mass,
            inertia_body,
            inv_mass: 1.0 / mass,
            force: Vector3::zeros(),
            torque: Vector3::zeros(),
        })
    }

    /// Uniform-density solid sphere.
    pub fn sphere(mass: f64, radius: f64) -> Result<Self, PhysicsError> {
        let i = 0.4 * mass * radius * radius;
        Self::new(mass, Matrix3::from_diagonal_element(i))
    }

    /// Solid cylinder with its symmetry axis along body x.
    pub fn cylinder_x(mass: f64, radius: f64, length: f64) -> Result<Self, PhysicsError> {
        let ixx = 0.5 * mass * radius * radius;
        let iyy = mass * (3.0 * radius * radius + length * length) / 12.0;
        Self::new(
            mass,
            Matrix3::from_diagonal(&Vector3::new(ixx, iyy, iyy)),
        )
    }

    /// Uniform-density cuboid with the given half extents.
    pub fn cuboid(mass: f64, half: Vector3<f64>) -> Result<Self, PhysicsError> {
        let f = mass / 3.0;
        let diag = Vector3::new(
            f * (half.y * half.y + half.z * half.z),
            f * (half.x * half.x + half.z * half.z),
            f * (half.x * half.x + half.y * half.y),
        );
        Self::new(mass, Matrix3::from_diagonal(&diag))
    }

    pub fn at(mut self, position: Vector3<f64>) -> Self {
        self.position = position;
        self
    }

    pub fn oriented(mut self, orientation: UnitQuaternion<f64>) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_velocity(mut self, lin: Vector3<f64>, ang: Vector3<f64>) -> Self {
        self.lin_vel = lin;
        self.ang_vel = ang;
        self
    }

    /// Pin the body: infinite effective mass and inertia. Pose is kept but
    /// the solver and integrator will never move it.
    pub fn make_static(&mut self) {
        self.inv_mass = 0.0;
        self.lin_vel = Vector3::zeros();
        self.ang_vel = Vector3::zeros();
    }

    pub fn is_static(&self) -> bool {
        self.inv_mass == 0.0
    }

    /// Inverse inertia tensor rotated into the world frame. Computed from
    /// `inertia_body` on demand so callers may adjust the tensor freely.
    pub fn inv_inertia_world(&self) -> Matrix3<f64> {
        if self.is_static() {
            return Matrix3::zeros();
        }
        let inv_body = self
            .inertia_body
            .cholesky()
            .map(|c| c.inverse())
            .unwrap_or_else(Matrix3::zeros);
        let r = self.orientation.to_rotation_matrix();
        r * inv_body * r.transpose()
    }

    /// Velocity of a world-space point rigidly attached to this body.
    pub fn velocity_at(&self, point: Vector3<f64>) -> Vector3<f64> {
        self.lin_vel + self.ang_vel.cross(&(point - self.position))
    }

    /// Accumulate a world-frame force acting at the centre of mass.
    pub fn apply_force(&mut self, f: Vector3<f64>) {
        self.force += f;
    }

    /// Accumulate a world-frame force acting at a world-space point.
    pub fn apply_force_at(&mut self, f: Vector3<f64>, point: Vector3<f64>) {
        self.force += f;
        self.torque += (point - self.position).cross(&f);
    }

    /// Accumulate a world-frame torque.
    pub fn apply_torque(&mut self, t: Vector3<f64>) {
        self.torque += t;
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.into_inner().coords.iter().all(|v| v.is_finite())
            && self.lin_vel.iter().all(|v| v.is_finite())
            && self.ang_vel.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_mass_and_inertia() {
        assert!(RigidBody::new(0.0, Matrix3::identity()).is_err());
        assert!(RigidBody::new(-1.0, Matrix3::identity()).is_err());
        assert!(RigidBody::new(1.0, Matrix3::from_diagonal_element(-1.0)).is_err());
    }

    #[test]
    fn point_velocity_includes_spin() {
        let mut b = RigidBody::sphere(1.0, 0.1).unwrap();
        b.ang_vel = Vector3::new(0.0, 0.0, 2.0);
        b.lin_vel = Vector3::new(1.0, 0.0, 0.0);
        let v = b.velocity_at(Vector3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(v, Vector3::new(1.0, 2.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn force_at_point_produces_torque() {
        let mut b = RigidBody::sphere(1.0, 0.1).unwrap();
        b.apply_force_at(Vector3::new(0.0, 1.0, 0.0), Vector3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(b.force, Vector3::new(0.0, 1.0, 0.0));
        assert_relative_eq!(b.torque, Vector3::new(0.0, 0.0, 1.0));
    }
}
