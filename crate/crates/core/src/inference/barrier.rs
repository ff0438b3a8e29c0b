use serde::{Deserialize, Serialize};

use super::fields::accumulate;
use crate::error::{invalid, Result};
use crate::model::{
    check_compatible, intensity_record_unchecked, IntensityRecord, KernelParams, ModelParams, Trajectory,
};

/// Penalty shape `l_b` applied to intensities below the floor `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierKind {
    /// `-b ln(x / b)`, extended linearly below `x = 1e-6 b`.
    Log,
    /// `(x - b)^2 / (0.2 b)`.
    Quadratic,
}

const LOG_CAP: f64 = 1e-6;

/// `l_b(x)`.
pub fn barrier_loss(x: f64, b: f64, kind: BarrierKind) -> f64 {
    match kind {
        BarrierKind::Quadratic => (x - b) * (x - b) / (0.2 * b),
        BarrierKind::Log => {
            let cap = b * LOG_CAP;
            if x >= cap {
                -b * (x / b).ln()
            } else {
                -b * LOG_CAP.ln() + (-b / cap) * (x - cap)
            }
        }
    }
}

/// `l_b'(x)`.
pub fn barrier_slope(x: f64, b: f64, kind: BarrierKind) -> f64 {
    match kind {
        BarrierKind::Quadratic => (x - b) / (0.1 * b),
        BarrierKind::Log => -b / x.max(b * LOG_CAP),
    }
}

fn check_floor(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("intensity floor must be positive, got {b}")));
    }
    Ok(())
}

pub(crate) fn barrier_weights(rec: &IntensityRecord, b: f64, kind: BarrierKind) -> Vec<f64> {
    rec.matrix().iter().map(|&x| if x < b { barrier_slope(x, b, kind) } else { 0.0 }).collect()
}

/// `B(theta) = sum_t sum_u 1{Lambda_t(u) < b} l_b(Lambda_t(u))`.
pub fn barrier_value(params: &ModelParams, traj: &Trajectory, b: f64, kind: BarrierKind) -> Result<f64> {
    check_floor(b)?;
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    Ok(rec.matrix().iter().filter(|&&x| x < b).map(|&x| barrier_loss(x, b, kind)).sum())
}

/// Gradient of the barrier in the kernel coordinates.
pub fn barrier_gradient(params: &ModelParams, traj: &Trajectory, b: f64, kind: BarrierKind) -> Result<KernelParams> {
    check_floor(b)?;
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    let w = barrier_weights(&rec, b, kind);
    let mut g = params.kernel().zeros_like();
    accumulate(params.kernel(), traj, &w, 1.0, g.values_mut());
    Ok(g)
}
