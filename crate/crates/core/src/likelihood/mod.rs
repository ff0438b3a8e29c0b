//! Link functions and discrete-time log-likelihoods.

mod windowed;

pub use windowed::{loglik_windowed, WindowedEvents};

use crate::error::{invalid, Error, Result};
use crate::model::{check_compatible, intensity_record_unchecked, IntensityRecord, ModelParams, Trajectory};

/// `phi(x) = 1 - exp(-x)`.
pub fn link_phi(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `ln phi(x)`, accurate for small `x > 0`.
pub fn log_link_phi(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// `Phi(x)_u = phi(s) * x_u / s` with `s = sum x`.
pub fn link_phi_vector(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(invalid("link needs at least one node"));
    }
    if let Some((u, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain(format!("link argument must be positive, x[{u}] = {v}")));
    }
    let s: f64 = x.iter().sum();
    let p = link_phi(s);
    Ok(x.iter().map(|v| p * (v / s)).collect())
}

fn require_single_node(params: &ModelParams, traj: &Trajectory) -> Result<()> {
    check_compatible(params.kernel(), traj)?;
    if traj.nodes() != 1 {
        return Err(invalid(format!("time-only likelihood needs one node, got {}", traj.nodes())));
    }
    Ok(())
}

/// Log-likelihood of a single-node trajectory over steps `1..=N`.
pub fn loglik_unit(params: &ModelParams, traj: &Trajectory) -> Result<f64> {
    require_single_node(params, traj)?;
    let rec = intensity_record_unchecked(params, traj);
    loglik_unit_record(&rec, traj, traj.grid().h())
}

pub(crate) fn loglik_unit_record(rec: &IntensityRecord, traj: &Trajectory, h: f64) -> Result<f64> {
    let mut ll = 0.0;
    for t in 1..=traj.grid().last_index() {
        let lambda = rec.lambda(t, 0);
        if traj.any_event(t) == 1 {
            if !(lambda > 0.0) {
                return Err(Error::Infeasible { t, node: 0, intensity: lambda });
            }
            ll += log_link_phi(h * lambda);
        } else {
            ll -= h * lambda;
        }
    }
    Ok(ll)
}

/// Log-likelihood of a node-valued trajectory over steps `1..=N`.
pub fn loglik_network(params: &ModelParams, traj: &Trajectory) -> Result<f64> {
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    loglik_network_record(&rec, traj, traj.grid().h())
}

pub(crate) fn loglik_network_record(rec: &IntensityRecord, traj: &Trajectory, h: f64) -> Result<f64> {
    let mut ll = 0.0;
    for t in 1..=traj.grid().last_index() {
        let bar = rec.bar(t);
        match traj.event_at(t) {
            Some(u) => {
                let lambda = rec.lambda(t, u);
                if !(lambda > 0.0) {
                    return Err(Error::Infeasible { t, node: u, intensity: lambda });
                }
                if !(bar > 0.0) {
                    let node = (0..rec.nodes()).find(|&v| rec.lambda(t, v) <= 0.0).unwrap_or(u);
                    return Err(Error::Infeasible { t, node, intensity: rec.lambda(t, node) });
                }
                ll += log_link_phi(h * bar) + (lambda.ln() - bar.ln());
            }
            None => ll -= h * bar,
        }
    }
    Ok(ll)
}

/// Dispatches to the single-node or network likelihood on a precomputed record.
pub(crate) fn loglik_record(rec: &IntensityRecord, traj: &Trajectory, h: f64) -> Result<f64> {
    if rec.nodes() == 1 {
        loglik_unit_record(rec, traj, h)
    } else {
        loglik_network_record(rec, traj, h)
    }
}
