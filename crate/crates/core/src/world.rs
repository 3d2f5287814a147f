//! The simulation world: bodies, hinges, contacts, and the fixed-step
//! semi-implicit integrator.
//!
//! Step layout: external and penalty contact forces are integrated into the
//! velocities first, then constraint rows (hinges, limits, and optionally
//! contact rows) are solved by projected Gauss–Seidel, and finally positions
//! advance with the new velocities.

use nalgebra::{UnitQuaternion, Vector3};

use crate::body::RigidBody;
use crate::constraint::ConstraintRow;
use crate::contact::{contact_rows, ground_force_clamped, ContactPoint, GroundParams, PyramidMode};
use crate::error::PhysicsError;
use crate::joint::HingeJoint;
use crate::math::{tangent_basis, twist_angle};
use crate::solver::{solve_bilateral_direct, solve_constraints, BodyMass, SolverConfig, Velocity};

/// Collision shape attached to a body.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Sphere { radius: f64 },
    Cuboid { half: Vector3<f64> },
}

/// How ground and object contacts load the bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactMode {
    /// Compliant spring-damper normal plus Stribeck tangential friction,
    /// injected as external forces before the constraint solve.
    Penalty,
    /// Contact constraint rows; the tangential force limit is a constant,
    /// independent of the normal force.
    PyramidConstantLimit { tangent_limit: f64 },
    /// Contact constraint rows; normals are solved frictionless first, then
    /// tangential bounds are set to `mu * |F_N|` and the system is re-solved.
    PyramidNormalScaled { mu: f64 },
}

/// Record of one contact force applied during the last step (for audits).
#[derive(Debug, Clone)]
pub struct ContactForce {
    pub body: usize,
    pub normal: Vector3<f64>,
    pub normal_force: f64,
    pub tangent_force: Vector3<f64>,
    /// Per-axis tangential force bound in effect for this contact. In the
    /// normal-scaled pyramid this is `mu * |F_N|` with the frictionless
    /// normal force that defines the model's F_N.
    pub tangent_bound: f64,
}

/// Identity of a constraint row for warm-start bookkeeping.
#[derive(Debug, Clone, Copy)]
enum RowKey {
    Joint { joint: usize, row: usize },
    Limit { joint: usize },
}

pub struct World {
    pub bodies: Vec<RigidBody>,
    pub shapes: Vec<Option<Shape>>,
    pub joints: Vec<HingeJoint>,
    pub gravity: Vector3<f64>,
    /// Compliant ground model used by bodies without an override.
    pub ground: GroundParams,
    /// Per-body ground parameters (e.g. a pushed object with its own mu).
    pub ground_overrides: Vec<Option<GroundParams>>,
    pub contact_mode: ContactMode,
    /// ERP/CFM used by contact constraint rows (pyramid modes).
    pub contact_erp: f64,
    pub contact_cfm: f64,
    pub solver: SolverConfig,
    pub time: f64,

    /// Contact forces applied in the most recent step.
    pub last_contact_forces: Vec<ContactForce>,
    warm_joint: Vec<[f64; 5]>,
    warm_joint_prev: Vec<[f64; 5]>,
    warm_limit: Vec<f64>,
    warm_contact: std::collections::HashMap<(usize, Option<usize>, u32), [f64; 3]>,
    scratch_masses: Vec<BodyMass>,
    scratch_vel: Vec<Velocity>,
}

impl World {
    pub fn new() -> Self {
        Self {
            bodies: Vec::new(),
            shapes: Vec::new(),
            joints: Vec::new(),
            gravity: Vector3::new(0.0, 0.0, -9.81),
            ground: GroundParams::default(),
            ground_overrides: Vec::new(),
            contact_mode: ContactMode::Penalty,
            contact_erp: 0.2,
            contact_cfm: 1e-5,
            solver: SolverConfig::default(),
            time: 0.0,
            last_contact_forces: Vec::new(),
            warm_joint: Vec::new(),
            warm_joint_prev: Vec::new(),
            warm_limit: Vec::new(),
            warm_contact: std::collections::HashMap::new(),
            scratch_masses: Vec::new(),
            scratch_vel: Vec::new(),
        }
    }

    pub fn add_body(&mut self, body: RigidBody) -> usize {
        self.bodies.push(body);
        self.shapes.push(None);
        self.ground_overrides.push(None);
        self.bodies.len() - 1
    }

    pub fn add_body_with_shape(&mut self, body: RigidBody, shape: Shape) -> usize {
        let id = self.add_body(body);
        self.shapes[id] = Some(shape);
        id
    }

    pub fn add_joint(&mut self, mut joint: HingeJoint) -> Result<usize, PhysicsError> {
        if joint.body_a >= self.bodies.len() || joint.body_b >= self.bodies.len() {
            return Err(PhysicsError::InvalidConfig(
                "joint references a missing body".into(),
            ));
        }
        let qa = self.bodies[joint.body_a].orientation;
        let qb = self.bodies[joint.body_b].orientation;
        joint.rest_rel = qa.inverse() * qb;
        self.joints.push(joint);
        self.warm_joint.push([0.0; 5]);
        self.warm_joint_prev.push([0.0; 5]);
        self.warm_limit.push(0.0);
        Ok(self.joints.len() - 1)
    }

    /// Current hinge angle: twist of the deviation from the rest pose about
    /// the joint axis.
    pub fn joint_angle(&self, joint: usize) -> f64 {
        let j = &self.joints[joint];
        let qa = self.bodies[j.body_a].orientation;
        let qb = self.bodies[j.body_b].orientation;
        let delta = j.rest_rel.inverse() * (qa.inverse() * qb);
        twist_angle(&delta, &j.axis_a)
    }

    /// Hinge angle rate: relative angular velocity about the world axis.
    pub fn joint_rate(&self, joint: usize) -> f64 {
        let j = &self.joints[joint];
        let axis_w = self.bodies[j.body_a].orientation * j.axis_a;
        (self.bodies[j.body_b].ang_vel - self.bodies[j.body_a].ang_vel).dot(&axis_w)
    }

    /// Effective inertia of the hinge's rotational degree of freedom:
    /// `1 / (u^T (I_a^-1 + I_b^-1) u)` with `u` the world-frame axis.
    pub fn joint_axis_inertia(&self, joint: usize) -> f64 {
        let j = &self.joints[joint];
        let u = self.bodies[j.body_a].orientation * j.axis_a;
        let w = u.dot(&(self.bodies[j.body_a].inv_inertia_world() * u))
            + u.dot(&(self.bodies[j.body_b].inv_inertia_world() * u));
        if w > 1e-12 {
            1.0 / w
        } else {
            f64::INFINITY
        }
    }

    /// Apply equal-and-opposite torque `u` about the hinge axis (drives the
    /// joint angle positive for positive `u`).
    pub fn apply_joint_torque(&mut self, joint: usize, u: f64) {
        let j = &self.joints[joint];
        let axis_w = self.bodies[j.body_a].orientation * j.axis_a;
        let (a, b) = (j.body_a, j.body_b);
        self.bodies[b].apply_torque(axis_w * u);
        self.bodies[a].apply_torque(-axis_w * u);
    }

    /// Assemble the bilateral hinge rows plus any active limit rows.
    ///
    /// Each hinge contributes three translational rows (anchor coincidence)
    /// and two rotational rows (axis alignment); the positional error enters
    /// the rhs as `-(erp/h) * error`.
    pub fn assemble_constraints(&self, h: f64) -> Vec<ConstraintRow> {
        self.assemble_constraints_keyed(h).0
    }

    fn assemble_constraints_keyed(&self, h: f64) -> (Vec<ConstraintRow>, Vec<RowKey>) {
        let mut rows = Vec::with_capacity(self.joints.len() * 5);
        let mut keys = Vec::with_capacity(self.joints.len() * 5);
        for (ji, j) in self.joints.iter().enumerate() {
            let a = &self.bodies[j.body_a];
            let b = &self.bodies[j.body_b];
            let r_a = a.orientation * j.anchor_a;
            let r_b = b.orientation * j.anchor_b;
            let err = (a.position + r_a) - (b.position + r_b);

            // Translational rows along the world axes.
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = 1.0;
                rows.push(ConstraintRow::pair(
                    j.body_a,
                    j.body_b,
                    e,
                    r_a.cross(&e),
                    -e,
                    -(r_b.cross(&e)),
                    -(j.erp / h) * err[k],
                    j.cfm,
                ));
                keys.push(RowKey::Joint { joint: ji, row: k });
            }

            // Rotational rows: keep body b's axis orthogonal to the
            // complement of body a's axis.
            let u_a = a.orientation * j.axis_a;
            let u_b = b.orientation * j.axis_b;
            let (t1, t2) = tangent_basis(&u_a);
            for (k, t) in [t1, t2].into_iter().enumerate() {
                let jac = t.cross(&u_b);
                rows.push(ConstraintRow::pair(
                    j.body_a,
                    j.body_b,
                    Vector3::zeros(),
                    jac,
                    Vector3::zeros(),
                    -jac,
                    -(j.erp / h) * t.dot(&u_b),
                    j.cfm,
                ));
                keys.push(RowKey::Joint { joint: ji, row: 3 + k });
            }

            // Angle limits as unilateral rows. The jacobian measures the
            // joint rate, `J v = (w_b - w_a) . axis = theta_dot`; at most one
            // side can be active at a time.
            if j.limit_lo.is_some() || j.limit_hi.is_some() {
                let theta = self.joint_angle(ji);
                let axis_w = u_a;
                if let Some(hi) = j.limit_hi {
                    if theta > hi {
                        rows.push(
                            ConstraintRow::pair(
                                j.body_a,
                                j.body_b,
                                Vector3::zeros(),
                                -axis_w,
                                Vector3::zeros(),
                                axis_w,
                                -(j.erp / h) * (theta - hi),
                                j.cfm,
                            )
                            .with_bounds(f64::NEG_INFINITY, 0.0),
                        );
                        keys.push(RowKey::Limit { joint: ji });
                        continue;
                    }
                }
                if let Some(lo) = j.limit_lo {
                    if theta < lo {
                        rows.push(
                            ConstraintRow::pair(
                                j.body_a,
                                j.body_b,
                                Vector3::zeros(),
                                -axis_w,
                                Vector3::zeros(),
                                axis_w,
                                (j.erp / h) * (lo - theta),
                                j.cfm,
                            )
                            .with_bounds(0.0, f64::INFINITY),
                        );
                        keys.push(RowKey::Limit { joint: ji });
                    }
                }
            }
        }
        (rows, keys)
    }

    fn ground_params_for(&self, body: usize) -> &GroundParams {
        self.ground_overrides[body].as_ref().unwrap_or(&self.ground)
    }

    /// Detect contacts: sphere vs the z=0 plane, cuboid corners vs the plane,
    /// and sphere vs cuboid pairs. One contact per overlapping sphere pair.
    pub fn detect_contacts(&self) -> Vec<ContactPoint> {
        let mut contacts = Vec::new();
        for (i, shape) in self.shapes.iter().enumerate() {
            let Some(shape) = shape else { continue };
            let body = &self.bodies[i];
            match shape {
                Shape::Sphere { radius } => {
                    let pen = body.position.z - radius;
                    if pen <= 0.0 {
                        let point =
                            Vector3::new(body.position.x, body.position.y, body.position.z - radius);
                        contacts.push(ContactPoint {
                            body: i,
                            other: None,
                            point,
                            normal: Vector3::z(),
                            penetration: pen,
                            rel_vel: body.velocity_at(point),
                            feature: 0,
                        });
                    }
                }
                Shape::Cuboid { half } => {
                    let mut corner_id = 0;
                    for sx in [-1.0, 1.0] {
                        for sy in [-1.0, 1.0] {
                            for sz in [-1.0, 1.0] {
                                let local = Vector3::new(sx * half.x, sy * half.y, sz * half.z);
                                let corner = body.position + body.orientation * local;
                                if corner.z <= 0.0 {
                                    contacts.push(ContactPoint {
                                        body: i,
                                        other: None,
                                        point: corner,
                                        normal: Vector3::z(),
                                        penetration: corner.z,
                                        rel_vel: body.velocity_at(corner),
                                        feature: corner_id,
                                    });
                                }
                                corner_id += 1;
                            }
                        }
                    }
                }
            }
        }

        // Sphere vs cuboid pairs.
        for i in 0..self.shapes.len() {
            let Some(Shape::Sphere { radius }) = self.shapes[i] else {
                continue;
            };
            for k in 0..self.shapes.len() {
                let Some(Shape::Cuboid { half }) = self.shapes[k] else {
                    continue;
                };
                let sphere = &self.bodies[i];
                let cuboid = &self.bodies[k];
                let local = cuboid
                    .orientation
                    .inverse_transform_vector(&(sphere.position - cuboid.position));
                let clamped = Vector3::new(
                    local.x.clamp(-half.x, half.x),
                    local.y.clamp(-half.y, half.y),
                    local.z.clamp(-half.z, half.z),
                );
                let delta = local - clamped;
                let dist = delta.norm();
                if dist >= radius || dist < 1e-12 {
                    // Deep-centre case (centre inside the box) is not expected
                    // at this scale; skip rather than guess a normal.
                    continue;
                }
                let normal = cuboid.orientation * (delta / dist);
                let surface = cuboid.position + cuboid.orientation * clamped;
                contacts.push(ContactPoint {
                    body: i,
                    other: Some(k),
                    point: surface,
                    normal,
                    penetration: dist - radius,
                    rel_vel: sphere.velocity_at(surface) - cuboid.velocity_at(surface),
                    feature: 16,
                });
            }
        }
        contacts
    }

    /// Advance the world by one step of size `h`.
    pub fn step(&mut self, h: f64) -> Result<(), PhysicsError> {
        assert!(h > 0.0, "step size must be positive");
        let nb = self.bodies.len();
        self.last_contact_forces.clear();

        // Gravity.
        for body in &mut self.bodies {
            let f = self.gravity * body.mass;
            body.apply_force(f);
        }

        let contacts = self.detect_contacts();

        // Penalty-mode contacts contribute plain external forces.
        if self.contact_mode == ContactMode::Penalty {
            for cp in &contacts {
                let gp = *self.ground_params_for(cp.body);
                let f = ground_force_clamped(cp, &gp, h, self.contact_effective_mass(cp));
                let n_comp = f.dot(&cp.normal);
                self.last_contact_forces.push(ContactForce {
                    body: cp.body,
                    normal: cp.normal,
                    normal_force: n_comp,
                    tangent_force: f - cp.normal * n_comp,
                    tangent_bound: f64::INFINITY,
                });
                let point = cp.point;
                self.bodies[cp.body].apply_force_at(f, point);
                if let Some(other) = cp.other {
                    self.bodies[other].apply_force_at(-f, point);
                }
            }
        }

        // Integrate forces into velocities (semi-implicit Euler). The
        // gyroscopic term is integrated implicitly in the body frame (one
        // Newton step); the explicit form pumps energy into tumbling bodies.
        self.scratch_masses.clear();
        self.scratch_vel.clear();
        for body in &mut self.bodies {
            let inv_inertia_world = body.inv_inertia_world();
            if !body.is_static() {
                let r = body.orientation.to_rotation_matrix();
                let mut w_b = r.transpose() * body.ang_vel;
                let l_b = body.inertia_body * w_b;
                let f = w_b.cross(&l_b) * h;
                let jac = body.inertia_body
                    + (skew(&w_b) * body.inertia_body - skew(&l_b)) * h;
                if let Some(inv) = jac.try_inverse() {
                    w_b -= inv * f;
                }
                body.ang_vel = r * w_b;
            }
            body.lin_vel += body.force * (body.inv_mass * h);
            body.ang_vel += inv_inertia_world * (body.torque * h);
            self.scratch_masses.push(BodyMass {
                inv_mass: body.inv_mass,
                inv_inertia_world,
            });
            self.scratch_vel.push(Velocity {
                lin: body.lin_vel,
                ang: body.ang_vel,
            });
        }

        // Constraint rows: joints (+limits), then contacts in pyramid modes.
        let (joint_rows, keys) = self.assemble_constraints_keyed(h);
        let n_joint_rows = joint_rows.len();
        let mut rows = joint_rows;
        let mut warm: Vec<f64> = keys.iter().map(|k| self.warm_lookup(k)).collect();

        match self.contact_mode {
            ContactMode::Penalty => {
                // All-bilateral sets (no active limits) admit an exact direct
                // solve; bounded rows fall back to the projected sweep.
                if let Some(impulses) = solve_bilateral_direct(
                    &rows,
                    &self.scratch_masses,
                    &mut self.scratch_vel,
                    h,
                ) {
                    self.store_warm(&impulses, &keys);
                } else {
                    solve_constraints(
                        &rows,
                        &self.scratch_masses,
                        &mut self.scratch_vel,
                        h,
                        &self.solver,
                        &mut warm,
                    )
                    .map_err(|e| self.step_error(e))?;
                    self.store_warm(&warm, &keys);
                }
            }
            ContactMode::PyramidConstantLimit { tangent_limit } => {
                for cp in &contacts {
                    let com_a = self.bodies[cp.body].position;
                    let com_b = cp.other.map(|o| self.bodies[o].position);
                    rows.extend(contact_rows(
                        cp,
                        tangent_limit,
                        PyramidMode::ConstantLimit,
                        self.contact_erp,
                        self.contact_cfm,
                        h,
                        com_a,
                        com_b,
                    ));
                    warm.extend(self.contact_warm(cp));
                }
                let lambdas = solve_constraints(
                    &rows,
                    &self.scratch_masses,
                    &mut self.scratch_vel,
                    h,
                    &self.solver,
                    &mut warm,
                )
                .map_err(|e| self.step_error(e))?;
                self.store_warm(&warm, &keys);
                self.store_contact_warm(&contacts, &warm, n_joint_rows);
                let bounds = vec![tangent_limit; contacts.len()];
                self.record_contact_lambdas(&contacts, &lambdas, n_joint_rows, &bounds);
            }
            ContactMode::PyramidNormalScaled { mu } => {
                // First pass: normals only, frictionless.
                let mut normal_rows = rows.clone();
                let mut trial_warm = warm.clone();
                for cp in &contacts {
                    let com_a = self.bodies[cp.body].position;
                    let com_b = cp.other.map(|o| self.bodies[o].position);
                    let all = contact_rows(
                        cp,
                        0.0,
                        PyramidMode::ConstantLimit,
                        self.contact_erp,
                        self.contact_cfm,
                        h,
                        com_a,
                        com_b,
                    );
                    normal_rows.push(all[0].clone());
                    trial_warm.push(self.contact_warm(cp)[0]);
                }
                let mut trial_vel = self.scratch_vel.clone();
                let normal_lambdas = solve_constraints(
                    &normal_rows,
                    &self.scratch_masses,
                    &mut trial_vel,
                    h,
                    &self.solver,
                    &mut trial_warm,
                )
                .map_err(|e| self.step_error(e))?;

                // Second pass: full system with tangential bounds fixed to
                // mu * |F_N| from the frictionless normals.
                let mut bounds = Vec::with_capacity(contacts.len());
                for (ci, cp) in contacts.iter().enumerate() {
                    let f_n = normal_lambdas[n_joint_rows + ci];
                    let com_a = self.bodies[cp.body].position;
                    let com_b = cp.other.map(|o| self.bodies[o].position);
                    rows.extend(contact_rows(
                        cp,
                        mu,
                        PyramidMode::NormalScaled { normal_force: f_n },
                        self.contact_erp,
                        self.contact_cfm,
                        h,
                        com_a,
                        com_b,
                    ));
                    warm.extend(self.contact_warm(cp));
                    bounds.push(mu * f_n.abs());
                }
                let lambdas = solve_constraints(
                    &rows,
                    &self.scratch_masses,
                    &mut self.scratch_vel,
                    h,
                    &self.solver,
                    &mut warm,
                )
                .map_err(|e| self.step_error(e))?;
                self.store_warm(&warm, &keys);
                self.store_contact_warm(&contacts, &warm, n_joint_rows);
                self.record_contact_lambdas(&contacts, &lambdas, n_joint_rows, &bounds);
            }
        }

        // Write velocities back and integrate positions.
        for (i, body) in self.bodies.iter_mut().enumerate() {
            body.lin_vel = self.scratch_vel[i].lin;
            body.ang_vel = self.scratch_vel[i].ang;
            body.position += body.lin_vel * h;
            let delta = UnitQuaternion::from_scaled_axis(body.ang_vel * h);
            body.orientation =
                UnitQuaternion::new_normalize((delta * body.orientation).into_inner());
            body.force = Vector3::zeros();
            body.torque = Vector3::zeros();
        }

        self.time += h;
        for i in 0..nb {
            if !self.bodies[i].is_finite() {
                return Err(PhysicsError::NonFiniteState {
                    body: i,
                    time: self.time,
                });
            }
        }
        Ok(())
    }

    fn warm_lookup(&self, key: &RowKey) -> f64 {
        match key {
            // Linear extrapolation: hinge impulses vary smoothly under the
            // gait drive, and the first-order guess removes most of the
            // per-step innovation the sweep would otherwise grind through.
            RowKey::Joint { joint, row } => {
                2.0 * self.warm_joint[*joint][*row] - self.warm_joint_prev[*joint][*row]
            }
            RowKey::Limit { joint } => self.warm_limit[*joint],
        }
    }

    /// Effective mass felt at the contact point along the two tangent axes:
    /// `1 / (J M^-1 J^T)` for the point-velocity row of each axis.
    fn contact_effective_mass(&self, cp: &ContactPoint) -> (f64, f64) {
        let (t1, t2) = tangent_basis(&cp.normal);
        let mut out = [0.0; 2];
        for (k, t) in [t1, t2].into_iter().enumerate() {
            let mut w = 0.0;
            for (body, sign) in [(Some(cp.body), 1.0), (cp.other, -1.0)] {
                let Some(idx) = body else { continue };
                let b = &self.bodies[idx];
                let lever = (cp.point - b.position).cross(&(t * sign));
                w += b.inv_mass + lever.dot(&(b.inv_inertia_world() * lever));
            }
            out[k] = if w > 1e-12 { 1.0 / w } else { 0.0 };
        }
        (out[0], out[1])
    }

    fn contact_warm(&self, cp: &ContactPoint) -> [f64; 3] {
        self.warm_contact
            .get(&(cp.body, cp.other, cp.feature))
            .copied()
            .unwrap_or([0.0; 3])
    }

    fn store_contact_warm(&mut self, contacts: &[ContactPoint], warm: &[f64], n_joint_rows: usize) {
        self.warm_contact.clear();
        for (ci, cp) in contacts.iter().enumerate() {
            let base = n_joint_rows + 3 * ci;
            self.warm_contact.insert(
                (cp.body, cp.other, cp.feature),
                [warm[base], warm[base + 1], warm[base + 2]],
            );
        }
    }

    fn store_warm(&mut self, warm: &[f64], keys: &[RowKey]) {
        for (key, &p) in keys.iter().zip(warm) {
            match key {
                RowKey::Joint { joint, row } => {
                    self.warm_joint_prev[*joint][*row] = self.warm_joint[*joint][*row];
                    self.warm_joint[*joint][*row] = p;
                }
                RowKey::Limit { joint } => self.warm_limit[*joint] = p,
            }
        }
    }

    fn step_error(&self, e: PhysicsError) -> PhysicsError {
        PhysicsError::Episode {
            time: self.time,
            source: Box::new(e),
        }
    }

    fn record_contact_lambdas(
        &mut self,
        contacts: &[ContactPoint],
        lambdas: &[f64],
        n_joint_rows: usize,
        bounds: &[f64],
    ) {
        for (ci, cp) in contacts.iter().enumerate() {
            let base = n_joint_rows + 3 * ci;
            let f_n = lambdas[base];
            let (t1, t2) = tangent_basis(&cp.normal);
            let f_t = t1 * lambdas[base + 1] + t2 * lambdas[base + 2];
            self.last_contact_forces.push(ContactForce {
                body: cp.body,
                normal: cp.normal,
                normal_force: f_n,
                tangent_force: f_t,
                tangent_bound: bounds[ci],
            });
        }
    }
}

fn skew(v: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

impl Default for World {
    fn default() -> Self {
        Self::new()
    }
}
