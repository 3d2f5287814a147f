//! Episode execution and trajectory recording.
//!
//! Control runs at a coarse tick (default 100 Hz) that updates the joint
//! references; the physics integrates at fine substeps (default 10 x 1 ms)
//! with the servo torque recomputed every substep from the held reference.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CsvError, PhysicsError};
use crate::gait::{kuramoto_step, sine_reference, KuramotoParams, KuramotoState, SineGaitParams};
use crate::robot::{Robot, JOINT_COUNT, LINK_COUNT};
use crate::world::World;

/// One recorded control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub head_pos: Vector3<f64>,
    pub head_quat: UnitQuaternion<f64>,
    pub mid_pos: Vector3<f64>,
    pub tail_pos: Vector3<f64>,
    /// Measured joint angles.
    pub q: [f64; JOINT_COUNT],
    /// Commanded joint angles at this tick.
    pub q_ref: [f64; JOINT_COUNT],
}

/// Time-indexed poses of head / middle link / tail plus the joint angles and
/// their references, sampled at a uniform control rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

pub const CSV_HEADER: &str = "t,hx,hy,hz,qw,qx,qy,qz,mx,my,mz,tx,ty,tz,\
q1,q2,q3,q4,q5,q6,q7,q8,q9,q10,q11,r1,r2,r3,r4,r5,r6,r7,r8,r9,r10,r11";

const CSV_COLUMNS: usize = 14 + 2 * JOINT_COUNT;

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Head x-y position per sample.
    pub fn head_xy(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.head_pos.x, s.head_pos.y))
            .collect()
    }

    /// Joint-angle column (measured).
    pub fn joint_series(&self, joint: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.q[joint]).collect()
    }

    /// Joint-angle column (commanded).
    pub fn reference_series(&self, joint: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.q_ref[joint]).collect()
    }

    /// Write the canonical CSV layout. Floats use the shortest representation
    /// that round-trips, so `read_csv(write_csv(t)) == t` exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CsvError> {
        writeln!(w, "{CSV_HEADER}")?;
        for s in &self.samples {
            let q = s.head_quat.into_inner();
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t,
                s.head_pos.x,
                s.head_pos.y,
                s.head_pos.z,
                q.w,
                q.i,
                q.j,
                q.k,
                s.mid_pos.x,
                s.mid_pos.y,
                s.mid_pos.z,
                s.tail_pos.x,
                s.tail_pos.y,
                s.tail_pos.z
            )?;
            for v in &s.q {
                write!(w, ",{v}")?;
            }
            for v in &s.q_ref {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), CsvError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, CsvError> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines();
        let header = lines.next().ok_or(CsvError::Empty)??;
        if header.trim() != CSV_HEADER {
            return Err(CsvError::BadHeader(header));
        }
        let mut samples = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != CSV_COLUMNS {
                return Err(CsvError::FieldCount {
                    line: idx + 2,
                    expected: CSV_COLUMNS,
                    found: fields.len(),
                });
            }
            let parse = |col: usize| -> Result<f64, CsvError> {
                fields[col].trim().parse().map_err(|_| CsvError::BadFloat {
                    line: idx + 2,
                    column: col + 1,
                    value: fields[col].to_string(),
                })
            };
            let mut q = [0.0; JOINT_COUNT];
            let mut q_ref = [0.0; JOINT_COUNT];
            for j in 0..JOINT_COUNT {
                q[j] = parse(14 + j)?;
                q_ref[j] = parse(14 + JOINT_COUNT + j)?;
            }
            samples.push(Sample {
                t: parse(0)?,
                head_pos: Vector3::new(parse(1)?, parse(2)?, parse(3)?),
                head_quat: UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                    parse(4)?,
                    parse(5)?,
                    parse(6)?,
                    parse(7)?,
                )),
                mid_pos: Vector3::new(parse(8)?, parse(9)?, parse(10)?),
                tail_pos: Vector3::new(parse(11)?, parse(12)?, parse(13)?),
                q,
                q_ref,
            });
        }
        let dt = if samples.len() >= 2 {
            samples[1].t - samples[0].t
        } else {
            0.0
        };
        Ok(Self { dt, samples })
    }

    pub fn load_csv(path: &Path) -> Result<Self, CsvError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }
}

/// Joint-reference source driving an episode.
#[derive(Debug, Clone)]
pub enum Gait {
    Sine(SineGaitParams),
    Kuramoto {
        params: KuramotoParams,
        state: KuramotoState,
    },
}

impl Gait {
    pub fn sine(params: SineGaitParams) -> Self {
        Gait::Sine(params)
    }

    pub fn kuramoto_settled(params: KuramotoParams) -> Self {
        let state = KuramotoState::settled(&params);
        Gait::Kuramoto { params, state }
    }

    /// Reference angles for the tick starting at `t`; the oscillator variant
    /// integrates its internal state across the tick at the physics step.
    pub fn tick(&mut self, t: f64, control_dt: f64, physics_h: f64) -> [f64; JOINT_COUNT] {
        match self {
            Gait::Sine(p) => sine_reference(t, p),
            Gait::Kuramoto { params, state } => {
                let mut out = [0.0; JOINT_COUNT];
                let substeps = (control_dt / physics_h).round().max(1.0) as usize;
                let mut x = vec![0.0; params.n];
                for _ in 0..substeps {
                    let (next, xs) = kuramoto_step(state, params, physics_h);
                    *state = next;
                    x = xs;
                }
                for (o, v) in out.iter_mut().zip(x.iter()) {
                    *o = *v;
                }
                out
            }
        }
    }
}

/// Episode timing: control tick and physics substeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// Control tick length (s).
    pub control_dt: f64,
    /// Physics substeps per control tick.
    pub substeps: usize,
}

impl EpisodeConfig {
    pub fn physics_h(&self) -> f64 {
        self.control_dt / self.substeps as f64
    }
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            control_dt: 0.01,
            substeps: 10,
        }
    }
}

/// Step the world under a gait for `duration` seconds, recording one sample
/// per control tick (including t = 0).
///
/// Episodes are deterministic functions of their inputs; `seed` is recorded
/// for provenance and reserved for future noise models.
pub fn run_episode(
    world: &mut World,
    robot: &Robot,
    gait: &mut Gait,
    duration: f64,
    seed: u64,
    cfg: &EpisodeConfig,
) -> Result<Trajectory, PhysicsError> {
    assert!(duration > 0.0, "duration must be positive");
    let _ = seed;
    let h = cfg.physics_h();
    let ticks = (duration / cfg.control_dt).round() as usize;
    let mut samples = Vec::with_capacity(ticks + 1);

    let mut q_ref = gait.tick(0.0, cfg.control_dt, h);
    samples.push(record_sample(world, robot, 0.0, &q_ref));

    for k in 0..ticks {
        for _ in 0..cfg.substeps {
            robot.apply_actuation_stepped(world, &q_ref, h);
            world.step(h)?;
        }
        let t = (k + 1) as f64 * cfg.control_dt;
        q_ref = gait.tick(t, cfg.control_dt, h);
        samples.push(record_sample(world, robot, t, &q_ref));
    }

    Ok(Trajectory {
        dt: cfg.control_dt,
        samples,
    })
}

fn record_sample(world: &World, robot: &Robot, t: f64, q_ref: &[f64; JOINT_COUNT]) -> Sample {
    let (head, q) = robot.partition_state(world);
    let mid = world.bodies[robot.links[LINK_COUNT / 2]].position;
    let tail = world.bodies[robot.links[LINK_COUNT - 1]].position;
    Sample {
        t,
        head_pos: head.position,
        head_quat: head.orientation,
        mid_pos: mid,
        tail_pos: tail,
        q,
        q_ref: *q_ref,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_trajectory() -> Trajectory {
        let mut samples = Vec::new();
        for k in 0..3 {
            let t = k as f64 * 0.01;
            let mut q = [0.0; JOINT_COUNT];
            let mut q_ref = [0.0; JOINT_COUNT];
            for j in 0..JOINT_COUNT {
                q[j] = (t + j as f64).sin() * 0.123456789;
                q_ref[j] = (t + j as f64).cos() / 3.0;
            }
            samples.push(Sample {
                t,
                head_pos: Vector3::new(0.1 * k as f64, -0.2, 1.0 / 3.0),
                head_quat: UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3 * k as f64),
                mid_pos: Vector3::new(0.5, 0.6, 0.7),
                tail_pos: Vector3::new(-1.0, 2.0, f64::MIN_POSITIVE),
                q,
                q_ref,
            });
        }
        Trajectory { dt: 0.01, samples }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = tiny_trajectory();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn csv_rejects_bad_header_and_short_rows() {
        let err = Trajectory::read_csv("nope\n1,2,3\n".as_bytes());
        assert!(matches!(err, Err(CsvError::BadHeader(_))));

        let text = format!("{CSV_HEADER}\n1,2,3\n");
        let err = Trajectory::read_csv(text.as_bytes());
        assert!(matches!(err, Err(CsvError::FieldCount { .. })));
    }

    #[test]
    fn csv_header_has_expected_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), CSV_COLUMNS);
        assert!(CSV_HEADER.starts_with("t,hx,hy,hz,qw,qx,qy,qz,mx,my,mz,tx,ty,tz,q1"));
        assert!(CSV_HEADER.ends_with("r11"));
    }
}
