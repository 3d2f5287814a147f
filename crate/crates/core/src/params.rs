//! The tunable simulation parameter vector and its normalised view.
//!
//! Eleven scalars describe everything the identification loop may touch: the
//! six compliant-ground terms, the three shared actuator terms, and the
//! joint softness pair. Bounds with `lo == hi` freeze a dimension; frozen
//! dimensions are excluded from the normalised vector the tuner walks.

use serde::{Deserialize, Serialize};

use crate::contact::GroundParams;
use crate::error::PhysicsError;

pub const PARAM_COUNT: usize = 11;

pub const PARAM_NAMES: [&str; PARAM_COUNT] = [
    "mu_c", "mu_s", "mu_v", "v_s", "k1", "k2", "j_m", "b_m", "k_t", "erp", "cfm",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    /// Coulomb friction coefficient.
    pub mu_c: f64,
    /// Static friction coefficient.
    pub mu_s: f64,
    /// Viscous friction coefficient (N s/m).
    pub mu_v: f64,
    /// Stribeck velocity (m/s).
    pub v_s: f64,
    /// Ground normal stiffness (N/m).
    pub k1: f64,
    /// Ground normal damping (N s/m).
    pub k2: f64,
    /// Transmission inertia (kg m^2).
    pub j_m: f64,
    /// Actuator internal damping (N m s/rad).
    pub b_m: f64,
    /// Motor constant.
    pub k_t: f64,
    /// Joint error reduction parameter.
    pub erp: f64,
    /// Joint constraint force mixing.
    pub cfm: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            mu_c: 0.35,
            mu_s: 0.5,
            mu_v: 0.3,
            v_s: 0.08,
            k1: 2500.0,
            k2: 40.0,
            j_m: 1e-3,
            b_m: 0.02,
            k_t: 1.0,
            erp: 0.2,
            cfm: 1e-5,
        }
    }
}

impl SimParams {
    pub fn as_array(&self) -> [f64; PARAM_COUNT] {
        [
            self.mu_c, self.mu_s, self.mu_v, self.v_s, self.k1, self.k2, self.j_m, self.b_m,
            self.k_t, self.erp, self.cfm,
        ]
    }

    pub fn from_array(a: [f64; PARAM_COUNT]) -> Self {
        Self {
            mu_c: a[0],
            mu_s: a[1],
            mu_v: a[2],
            v_s: a[3],
            k1: a[4],
            k2: a[5],
            j_m: a[6],
            b_m: a[7],
            k_t: a[8],
            erp: a[9],
            cfm: a[10],
        }
    }

    pub fn ground(&self) -> GroundParams {
        GroundParams {
            k1: self.k1,
            k2: self.k2,
            mu_c: self.mu_c,
            mu_s: self.mu_s,
            mu_v: self.mu_v,
            v_s: self.v_s,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        self.ground().validate()?;
        if !(self.j_m > 0.0) || self.b_m < 0.0 || !(self.k_t > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "actuator params require j_m > 0, b_m >= 0, k_t > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.erp) || self.cfm < 0.0 {
            return Err(PhysicsError::InvalidConfig(
                "softness requires erp in [0,1] and cfm >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Componentwise bounds on [`SimParams`]. Dimensions with `lo == hi` are
/// frozen and invisible to the tuner.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamBounds {
    pub lo: SimParams,
    pub hi: SimParams,
}

impl Default for ParamBounds {
    fn default() -> Self {
        let d = SimParams::default();
        let mut lo = SimParams::from_array([
            0.05, 0.05, 0.0, 0.01, 500.0, 5.0, 1e-4, 0.0, 0.25, d.erp, d.cfm,
        ]);
        let hi = SimParams::from_array([
            1.2, 1.5, 3.0, 0.5, 10_000.0, 200.0, 1e-2, 0.2, 3.0, d.erp, d.cfm,
        ]);
        // erp/cfm frozen by default: the identification vector of record is
        // the six ground terms plus the three actuator terms.
        lo.erp = d.erp;
        lo.cfm = d.cfm;
        Self { lo, hi }
    }
}

impl ParamBounds {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        for i in 0..PARAM_COUNT {
            if lo[i] > hi[i] || !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(PhysicsError::InvalidConfig(format!(
                    "bad bounds for {}: [{}, {}]",
                    PARAM_NAMES[i], lo[i], hi[i]
                )));
            }
        }
        Ok(())
    }

    /// Indices of tunable (non-frozen) dimensions.
    pub fn active(&self) -> Vec<usize> {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        (0..PARAM_COUNT).filter(|&i| hi[i] > lo[i]).collect()
    }

    /// Map in-bound params to the unit cube over the active dimensions.
    pub fn normalize(&self, p: &SimParams) -> Vec<f64> {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        let v = p.as_array();
        self.active()
            .into_iter()
            .map(|i| (v[i] - lo[i]) / (hi[i] - lo[i]))
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize); frozen dimensions take
    /// their pinned value.
    pub fn denormalize(&self, unit: &[f64]) -> SimParams {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        let mut out = lo;
        for (k, i) in self.active().into_iter().enumerate() {
            out[i] = lo[i] + unit[k].clamp(0.0, 1.0) * (hi[i] - lo[i]);
        }
        SimParams::from_array(out)
    }

    pub fn clamp(&self, p: &SimParams) -> SimParams {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        let mut v = p.as_array();
        for i in 0..PARAM_COUNT {
            v[i] = v[i].clamp(lo[i], hi[i]);
        }
        SimParams::from_array(v)
    }

    pub fn contains(&self, p: &SimParams) -> bool {
        let lo = self.lo.as_array();
        let hi = self.hi.as_array();
        let v = p.as_array();
        (0..PARAM_COUNT).all(|i| v[i] >= lo[i] - 1e-12 && v[i] <= hi[i] + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_in_default_bounds() {
        let b = ParamBounds::default();
        b.validate().unwrap();
        assert!(b.contains(&SimParams::default()));
        assert_eq!(b.active().len(), 9);
    }

    #[test]
    fn normalize_round_trip() {
        let b = ParamBounds::default();
        let p = SimParams {
            mu_c: 0.7,
            mu_s: 1.1,
            mu_v: 2.0,
            v_s: 0.3,
            k1: 4321.0,
            k2: 77.0,
            j_m: 5e-3,
            b_m: 0.11,
            k_t: 2.5,
            ..SimParams::default()
        };
        let u = b.normalize(&p);
        assert_eq!(u.len(), 9);
        let back = b.denormalize(&u);
        for (a, c) in p.as_array().iter().zip(back.as_array()) {
            assert!((a - c).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {c}");
        }
    }

    #[test]
    fn denormalize_clamps_unit_inputs() {
        let b = ParamBounds::default();
        let p = b.denormalize(&vec![2.0; 9]);
        assert!(b.contains(&p));
        let q = b.denormalize(&vec![-1.0; 9]);
        assert!(b.contains(&q));
    }
}
