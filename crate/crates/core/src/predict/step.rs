use crate::error::{Error, Result};
use crate::likelihood::link_phi;
use crate::model::{check_compatible, intensity_record_unchecked, IntensityRecord, ModelParams, Trajectory};

fn link_row(row: &[f64], h: f64, out: &mut [f64]) {
    if row.len() == 1 {
        out[0] = link_phi(h * row[0]);
        return;
    }
    let s: f64 = row.iter().map(|l| h * l).sum();
    if s == 0.0 {
        // limit of phi(s) / s at 0
        for (o, l) in out.iter_mut().zip(row) {
            *o = h * l;
        }
    } else {
        let p = link_phi(s);
        for (o, l) in out.iter_mut().zip(row) {
            *o = p * (h * l / s);
        }
    }
}

fn probabilities(rec: &IntensityRecord, h: f64) -> Vec<f64> {
    let v = rec.nodes();
    let mut out = vec![0.0; rec.matrix().len()];
    for (t, o) in out.chunks_mut(v).enumerate() {
        link_row(rec.row(t as i64 + 1), h, o);
    }
    out
}

/// `p_t(u) = Phi(h Lambda_t)_u` for `t = 1..=N`, row-major `N x V`.
///
/// Every intensity must be positive.
pub fn step_probabilities(params: &ModelParams, traj: &Trajectory) -> Result<Vec<f64>> {
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    let v = rec.nodes();
    if let Some(k) = rec.matrix().iter().position(|l| !(*l > 0.0)) {
        return Err(Error::Infeasible { t: (k / v) as i64 + 1, node: k % v, intensity: rec.matrix()[k] });
    }
    Ok(probabilities(&rec, traj.grid().h()))
}

/// Same formula as [`step_probabilities`] without the positivity check; used to
/// score estimates that are infeasible on a few held-out steps.
///
/// Also returns how many `(t, u)` entries had a nonpositive intensity.
pub fn step_probabilities_lenient(params: &ModelParams, traj: &Trajectory) -> Result<(Vec<f64>, usize)> {
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    let bad = rec.matrix().iter().filter(|l| !(**l > 0.0)).count();
    Ok((probabilities(&rec, traj.grid().h()), bad))
}
