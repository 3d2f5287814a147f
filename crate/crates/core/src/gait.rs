//! Reference-trajectory generation: the sine sidewinding gait and the
//! modified coupled-oscillator network.

use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;
use crate::math::wrap_angle;
use crate::robot::JOINT_COUNT;

/// Sine-wave sidewinding gait. Pitch joints get `a_pitch`, yaw joints get
/// `a_yaw`, all at a common angular frequency with per-joint phase offsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SineGaitParams {
    /// Pitch amplitude (rad).
    pub a_pitch: f64,
    /// Yaw amplitude (rad).
    pub a_yaw: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Per-joint phase offsets (rad), head-most joint first.
    pub phase: [f64; JOINT_COUNT],
    /// Joints receiving the pitch amplitude; the rest get the yaw amplitude.
    pub pitch_joints: Vec<usize>,
}

impl SineGaitParams {
    /// The default sidewinding pattern: 14 deg pitch, 60 deg yaw, and the
    /// quarter-wave phase ladder `(pi/2) * [0,0,1,1,2,2,3,3,0,0,1]`.
    pub fn sidewinding(frequency_hz: f64) -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let steps = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 0.0, 0.0, 1.0];
        let mut phase = [0.0; JOINT_COUNT];
        for (p, s) in phase.iter_mut().zip(steps) {
            *p = half_pi * s;
        }
        Self {
            a_pitch: 14.0_f64.to_radians(),
            a_yaw: 60.0_f64.to_radians(),
            omega: std::f64::consts::TAU * frequency_hz,
            phase,
            pitch_joints: (0..JOINT_COUNT).step_by(2).collect(),
        }
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / std::f64::consts::TAU
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    fn amplitude(&self, joint: usize) -> f64 {
        if self.pitch_joints.contains(&joint) {
            self.a_pitch
        } else {
            self.a_yaw
        }
    }
}

/// Per-joint reference angles `q_ref[j] = A_j sin(omega t + phase[j])`.
pub fn sine_reference(t: f64, p: &SineGaitParams) -> [f64; JOINT_COUNT] {
    let mut q = [0.0; JOINT_COUNT];
    for (j, q_j) in q.iter_mut().enumerate() {
        *q_j = p.amplitude(j) * (p.omega * t + p.phase[j]).sin();
    }
    q
}

/// Inputs of the modified coupled-oscillator network.
///
/// Phase dynamics couple neighbouring channels diffusively through the
/// tridiagonal matrix built from `mu`; the bidiagonal difference of `theta`
/// imposes steady phase shifts. Amplitudes follow a critically damped
/// second-order law towards `big_r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KuramotoParams {
    /// Channel count.
    pub n: usize,
    /// Amplitude convergence rate (1/s).
    pub a: f64,
    /// Coupling gains, one per channel.
    pub mu: Vec<f64>,
    /// Desired amplitudes.
    pub big_r: Vec<f64>,
    /// Intrinsic frequencies (rad/s).
    pub omega: Vec<f64>,
    /// Phase-shift inputs, length `n - 1`.
    pub theta: Vec<f64>,
    /// Output offsets (rad).
    pub delta: Vec<f64>,
}

impl KuramotoParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if self.n == 0 {
            return Err(PhysicsError::InvalidConfig("need at least one channel".into()));
        }
        if !(self.a > 0.0) {
            return Err(PhysicsError::InvalidConfig("convergence rate must be positive".into()));
        }
        if self.mu.len() != self.n
            || self.big_r.len() != self.n
            || self.omega.len() != self.n
            || self.delta.len() != self.n
            || self.theta.len() != self.n.saturating_sub(1)
        {
            return Err(PhysicsError::InvalidConfig("channel count mismatch".into()));
        }
        if self.mu.iter().any(|&m| m < 0.0) || self.big_r.iter().any(|&r| r < 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "coupling gains and amplitudes must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// `A * phi`: tridiagonal diffusive coupling with rows
    /// `(-mu_1, mu_1) / (mu_i, -2 mu_i, mu_i) / (mu_n, -mu_n)`.
    fn coupling(&self, phi: &[f64], out: &mut [f64]) {
        let n = self.n;
        if n == 1 {
            out[0] = 0.0;
            return;
        }
        out[0] = self.mu[0] * (phi[1] - phi[0]);
        for i in 1..n - 1 {
            out[i] = self.mu[i] * (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]);
        }
        out[n - 1] = self.mu[n - 1] * (phi[n - 2] - phi[n - 1]);
    }

    /// `B * theta`: bidiagonal difference, `(B theta)_i = theta_i - theta_{i-1}`
    /// with virtual zero boundary entries.
    fn phase_input(&self, i: usize) -> f64 {
        let above = if i < self.n - 1 { self.theta[i] } else { 0.0 };
        let below = if i > 0 { self.theta[i - 1] } else { 0.0 };
        above - below
    }
}

/// Internal oscillator state: phases, amplitudes, amplitude rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KuramotoState {
    pub phi: Vec<f64>,
    pub r: Vec<f64>,
    pub r_dot: Vec<f64>,
}

impl KuramotoState {
    /// All-zero state.
    pub fn rest(n: usize) -> Self {
        Self {
            phi: vec![0.0; n],
            r: vec![0.0; n],
            r_dot: vec![0.0; n],
        }
    }

    /// State already on the limit cycle implied by `params`: amplitudes at
    /// their targets and phases at the equilibrium offsets of the coupling.
    pub fn settled(params: &KuramotoParams) -> Self {
        let n = params.n;
        let mut phi = vec![0.0; n];
        if n > 1 {
            // Equilibrium phase differences d_k = phi[k+1] - phi[k]: the first
            // coupling row gives d_0 = -theta_0 / mu_0 and the interior rows
            // telescope as d_k = d_{k-1} - (theta_k - theta_{k-1}) / mu_k.
            let mut d = vec![0.0; n - 1];
            d[0] = -params.theta[0] / params.mu[0].max(1e-12);
            for k in 1..n - 1 {
                d[k] = d[k - 1] - (params.theta[k] - params.theta[k - 1]) / params.mu[k].max(1e-12);
            }
            for k in 0..n - 1 {
                phi[k + 1] = phi[k] + d[k];
            }
        }
        Self {
            phi,
            r: params.big_r.clone(),
            r_dot: vec![0.0; n],
        }
    }
}

fn derivatives(s: &KuramotoState, p: &KuramotoParams, d_phi: &mut [f64], d_r: &mut [f64], d_rd: &mut [f64]) {
    p.coupling(&s.phi, d_phi);
    for i in 0..p.n {
        d_phi[i] += p.omega[i] + p.phase_input(i);
        d_r[i] = s.r_dot[i];
        d_rd[i] = p.a * (p.a / 4.0 * (p.big_r[i] - s.r[i]) - s.r_dot[i]);
    }
}

#[derive(Clone)]
struct Deriv {
    phi: Vec<f64>,
    r: Vec<f64>,
    r_dot: Vec<f64>,
}

fn eval_deriv(s: &KuramotoState, p: &KuramotoParams) -> Deriv {
    let n = p.n;
    let mut d = Deriv {
        phi: vec![0.0; n],
        r: vec![0.0; n],
        r_dot: vec![0.0; n],
    };
    derivatives(s, p, &mut d.phi, &mut d.r, &mut d.r_dot);
    d
}

fn offset(base: &KuramotoState, d: &Deriv, f: f64) -> KuramotoState {
    let n = base.phi.len();
    let mut out = base.clone();
    for i in 0..n {
        out.phi[i] += f * d.phi[i];
        out.r[i] += f * d.r[i];
        out.r_dot[i] += f * d.r_dot[i];
    }
    out
}

/// Advance the oscillator network one step of size `h` (classic RK4) and
/// return the new state together with the output `x = r .* sin(phi) + delta`.
pub fn kuramoto_step(s: &KuramotoState, p: &KuramotoParams, h: f64) -> (KuramotoState, Vec<f64>) {
    assert!(h > 0.0, "step size must be positive");
    let n = p.n;
    let k1 = eval_deriv(s, p);
    let k2 = eval_deriv(&offset(s, &k1, h / 2.0), p);
    let k3 = eval_deriv(&offset(s, &k2, h / 2.0), p);
    let k4 = eval_deriv(&offset(s, &k3, h), p);

    let mut next = s.clone();
    for i in 0..n {
        next.phi[i] += h / 6.0 * (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]);
        next.r[i] += h / 6.0 * (k1.r[i] + 2.0 * k2.r[i] + 2.0 * k3.r[i] + k4.r[i]);
        next.r_dot[i] += h / 6.0 * (k1.r_dot[i] + 2.0 * k2.r_dot[i] + 2.0 * k3.r_dot[i] + k4.r_dot[i]);
    }

    let x = (0..n)
        .map(|i| next.r[i] * next.phi[i].sin() + p.delta[i])
        .collect();
    (next, x)
}

/// Which channels a steering bias may touch and how strongly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SteerConfig {
    /// Channels the steering touches (the yaw channels), head-most first.
    pub channels: Vec<usize>,
    /// Offset per radian of heading error (rad/rad).
    pub offset_gain: f64,
    /// Offset saturation (rad).
    pub max_offset: f64,
    /// Amplitude-gradient gain per radian of heading error. A linear ramp of
    /// amplitude scales along the body turns the translation direction of the
    /// sidewinding gait monotonically, which a uniform offset alone does not.
    pub gradient_gain: f64,
    /// Cap on the per-channel amplitude scale deviation.
    pub max_gradient: f64,
}

impl Default for SteerConfig {
    fn default() -> Self {
        Self {
            channels: (1..JOINT_COUNT).step_by(2).collect(),
            offset_gain: 0.05,
            max_offset: 0.1,
            gradient_gain: 1.6,
            max_gradient: 0.45,
        }
    }
}

/// Steer the gait towards the heading error: the yaw-channel offsets are
/// biased proportionally to the error, and the yaw amplitudes get a
/// zero-mean linear gradient along the body that rotates the translation
/// direction. Pure in `params` (call with the nominal gait each tick; the
/// bias does not compound). Zero error returns the parameters unchanged;
/// opposite errors produce mirror-image offsets.
pub fn steer(params: &KuramotoParams, heading_error: f64, cfg: &SteerConfig) -> KuramotoParams {
    let bias = (cfg.offset_gain * heading_error).clamp(-cfg.max_offset, cfg.max_offset);
    let mut out = params.clone();
    let n = cfg.channels.len();
    for (rank, &c) in cfg.channels.iter().enumerate() {
        if c >= out.delta.len() {
            continue;
        }
        out.delta[c] = bias;
        if n > 1 {
            let w = rank as f64 / (n - 1) as f64 - 0.5;
            let scale = (1.0 + cfg.gradient_gain * heading_error * w)
                .clamp(1.0 - cfg.max_gradient, 1.0 + cfg.max_gradient);
            out.big_r[c] = params.big_r[c] * scale;
        }
    }
    out
}

/// Kuramoto parameters reproducing the sine sidewinding gait: per-channel
/// amplitudes from the pitch/yaw assignment, a common frequency, and theta
/// chosen so the equilibrium phase offsets equal the gait's phase ladder.
pub fn sidewinding_kuramoto(sine: &SineGaitParams, coupling: f64, rate: f64) -> KuramotoParams {
    let n = JOINT_COUNT;
    let mut big_r = Vec::with_capacity(n);
    for j in 0..n {
        big_r.push(sine.amplitude(j));
    }
    // Desired equilibrium differences d_i = phase[i+1] - phase[i], wrapped.
    // With equal coupling the first equilibrium row gives theta_1 = -mu d_1
    // and interior rows telescope: theta_i = theta_{i-1} - mu (d_i - d_{i-1}).
    let mut theta = vec![0.0; n - 1];
    let d: Vec<f64> = (0..n - 1)
        .map(|i| wrap_angle(sine.phase[i + 1] - sine.phase[i]))
        .collect();
    theta[0] = -coupling * d[0];
    for i in 1..n - 1 {
        theta[i] = theta[i - 1] - coupling * (d[i] - d[i - 1]);
    }
    KuramotoParams {
        n,
        a: rate,
        mu: vec![coupling; n],
        big_r,
        omega: vec![sine.omega; n],
        theta,
        delta: vec![0.0; n],
    }
}
