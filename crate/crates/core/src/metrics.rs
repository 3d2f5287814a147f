//! Trajectory comparison metrics: planar head-position error and the
//! sliding-window correlation of desired vs actual joint angles.

use crate::error::MetricError;
use crate::robot::JOINT_COUNT;
use crate::runtime::Trajectory;

/// Per-sample planar head error plus the correlation summary.
#[derive(Debug, Clone)]
pub struct MetricReport {
    /// Per-sample head-position distance in the plane (m).
    pub euclidean_error_series: Vec<f64>,
    /// Error at the final sample (m).
    pub final_error: f64,
    /// Mean of the joint-averaged window correlations, in [-1, 1].
    pub mean_corr: f64,
    /// Per-window minimum across joints.
    pub corr_min: Vec<f64>,
    /// Per-window maximum across joints.
    pub corr_max: Vec<f64>,
}

/// Per-sample planar distance between the two head trajectories.
///
/// Both trajectories must share dt and length; only x and y enter the error.
pub fn euclidean_error(reference: &Trajectory, sim: &Trajectory) -> Result<Vec<f64>, MetricError> {
    if reference.len() != sim.len() {
        return Err(MetricError::LengthMismatch {
            left: reference.len(),
            right: sim.len(),
        });
    }
    if (reference.dt - sim.dt).abs() > 1e-12 {
        return Err(MetricError::DtMismatch {
            left: reference.dt,
            right: sim.dt,
        });
    }
    Ok(reference
        .samples
        .iter()
        .zip(&sim.samples)
        .map(|(a, b)| {
            let dx = a.head_pos.x - b.head_pos.x;
            let dy = a.head_pos.y - b.head_pos.y;
            (dx * dx + dy * dy).sqrt()
        })
        .collect())
}

/// Result of one sliding-window correlation pass.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    /// Joint-averaged correlation per window position.
    pub per_window: Vec<f64>,
    /// Per-window minimum across joints.
    pub min: Vec<f64>,
    /// Per-window maximum across joints.
    pub max: Vec<f64>,
    /// Mean of `per_window`.
    pub mean: f64,
    /// Count of windows where at least one joint had zero variance.
    pub degenerate_windows: usize,
}

/// Pearson correlation of two equal-length slices; zero-variance series
/// correlate at 0 by convention (flagged by the caller).
fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let denom = (sxx * syy).sqrt();
    if denom <= 1e-300 {
        None
    } else {
        Some((sxy / denom).clamp(-1.0, 1.0))
    }
}

/// Sliding-window Pearson correlation between two series (stride 1).
pub fn sliding_window_correlation(
    desired: &[f64],
    actual: &[f64],
    window: usize,
) -> Result<(Vec<f64>, f64), MetricError> {
    if window < 3 {
        return Err(MetricError::WindowTooSmall(window));
    }
    if desired.len() != actual.len() {
        return Err(MetricError::LengthMismatch {
            left: desired.len(),
            right: actual.len(),
        });
    }
    if desired.len() < window {
        return Err(MetricError::SeriesTooShort {
            len: desired.len(),
            window,
        });
    }
    let mut out = Vec::with_capacity(desired.len() - window + 1);
    for start in 0..=desired.len() - window {
        let c = pearson(&desired[start..start + window], &actual[start..start + window])
            .unwrap_or(0.0);
        out.push(c);
    }
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    Ok((out, mean))
}

/// Window correlation of every joint's desired vs actual series, averaged
/// across the joints per window.
pub fn joint_correlation(
    reference: &Trajectory,
    sim: &Trajectory,
    window: usize,
) -> Result<CorrelationReport, MetricError> {
    if reference.len() != sim.len() {
        return Err(MetricError::LengthMismatch {
            left: reference.len(),
            right: sim.len(),
        });
    }
    if window < 3 {
        return Err(MetricError::WindowTooSmall(window));
    }
    if reference.len() < window {
        return Err(MetricError::SeriesTooShort {
            len: reference.len(),
            window,
        });
    }
    let n_windows = reference.len() - window + 1;
    let mut per_window = vec![0.0; n_windows];
    let mut min = vec![f64::INFINITY; n_windows];
    let mut max = vec![f64::NEG_INFINITY; n_windows];
    let mut degenerate = vec![false; n_windows];

    for j in 0..JOINT_COUNT {
        let desired = reference.reference_series(j);
        let actual = sim.joint_series(j);
        for w in 0..n_windows {
            let c = match pearson(&desired[w..w + window], &actual[w..w + window]) {
                Some(c) => c,
                None => {
                    degenerate[w] = true;
                    0.0
                }
            };
            per_window[w] += c;
            min[w] = min[w].min(c);
            max[w] = max[w].max(c);
        }
    }
    for v in &mut per_window {
        *v /= JOINT_COUNT as f64;
    }
    let mean = per_window.iter().sum::<f64>() / n_windows as f64;
    Ok(CorrelationReport {
        per_window,
        min,
        max,
        mean,
        degenerate_windows: degenerate.iter().filter(|&&d| d).count(),
    })
}

/// Full comparison: planar error series plus joint correlations.
pub fn compute_metrics(
    reference: &Trajectory,
    sim: &Trajectory,
    window: usize,
) -> Result<MetricReport, MetricError> {
    let series = euclidean_error(reference, sim)?;
    let corr = joint_correlation(reference, sim, window)?;
    Ok(MetricReport {
        final_error: *series.last().unwrap_or(&0.0),
        euclidean_error_series: series,
        mean_corr: corr.mean,
        corr_min: corr.min,
        corr_max: corr.max,
    })
}

/// Default correlation window: one gait period of samples.
pub fn window_for_frequency(frequency_hz: f64, dt: f64) -> usize {
    (1.0 / (frequency_hz * dt)).round().max(3.0) as usize
}
