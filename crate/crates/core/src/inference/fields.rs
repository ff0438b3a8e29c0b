use super::config::Method;
use crate::error::{invalid, Error, Result};
use crate::likelihood::link_phi;
use crate::model::{
    check_compatible, for_each_target, intensity_record_unchecked, IntensityRecord, KernelParams, ModelParams,
    Trajectory,
};

/// `phi(s) / s`, with its limit 1 at `s = 0`.
fn phi_over(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        link_phi(s) / s
    }
}

/// Per-step weights `w_t(u)` (row-major `N x V`) such that the field is `sum_t sum_u w_t(u) eta_{t,u}`.
pub(crate) fn field_weights(method: Method, rec: &IntensityRecord, traj: &Trajectory, h: f64) -> Result<Vec<f64>> {
    let v = rec.nodes();
    let n = rec.steps();
    let mut w = vec![0.0; n * v];
    for t in 1..=n as i64 {
        let row = rec.row(t);
        let out = &mut w[(t as usize - 1) * v..t as usize * v];
        let event = traj.event_at(t);
        if v == 1 {
            let lambda = row[0];
            let y = if event.is_some() { 1.0 } else { 0.0 };
            let p = link_phi(h * lambda);
            out[0] = match method {
                Method::Vi => p - y,
                Method::Gd => {
                    if !(lambda > 0.0) {
                        return Err(Error::Infeasible { t, node: 0, intensity: lambda });
                    }
                    h * (p - y) / p
                }
            };
            continue;
        }
        let bar = rec.bar(t);
        let ybar = if event.is_some() { 1.0 } else { 0.0 };
        match method {
            Method::Vi => {
                let s = h * bar;
                let p = link_phi(s);
                for (u, o) in out.iter_mut().enumerate() {
                    let phi_u = if s == 0.0 { h * row[u] * phi_over(s) } else { p * (h * row[u] / s) };
                    *o = phi_u - if event == Some(u) { 1.0 } else { 0.0 };
                }
            }
            Method::Gd => {
                if let Some((u, &lambda)) = row.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
                    return Err(Error::Infeasible { t, node: u, intensity: lambda });
                }
                let p = link_phi(h * bar);
                let common = h * (p - ybar) / p;
                for (u, o) in out.iter_mut().enumerate() {
                    let own = if event == Some(u) { 1.0 / row[u] } else { 0.0 };
                    *o = common + (ybar / bar - own);
                }
            }
        }
    }
    Ok(w)
}

/// `out[coord(i, t, from, to)] += scale * w_t(to)` for every history event `(i, from)`.
pub(crate) fn accumulate(kernel: &KernelParams, traj: &Trajectory, weights: &[f64], scale: f64, out: &mut [f64]) {
    let v = kernel.nodes();
    for e in traj.events() {
        for_each_target(kernel, e.time, e.node, 1, |t, _, off| {
            let w = &weights[(t as usize - 1) * v..t as usize * v];
            for (o, wu) in out[off..off + v].iter_mut().zip(w) {
                *o += scale * wu;
            }
        });
    }
}

fn field_with(method: Method, params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    check_compatible(params.kernel(), traj)?;
    let rec = intensity_record_unchecked(params, traj);
    let w = field_weights(method, &rec, traj, traj.grid().h())?;
    let mut g = params.kernel().zeros_like();
    accumulate(params.kernel(), traj, &w, 1.0, g.values_mut());
    Ok(g)
}

fn require_nodes(params: &ModelParams, one: bool) -> Result<()> {
    if one && params.nodes() != 1 {
        return Err(invalid(format!("time-only field needs one node, got {}", params.nodes())));
    }
    Ok(())
}

/// Per-trajectory VI field `sum_t (phi(h Lambda_t) - y_t) eta_t` (single node).
pub fn vi_field(params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    require_nodes(params, true)?;
    field_with(Method::Vi, params, traj)
}

/// Negative gradient of the single-node log-likelihood in the kernel.
pub fn gd_field(params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    require_nodes(params, true)?;
    field_with(Method::Gd, params, traj)
}

/// Per-trajectory VI field `sum_t sum_u (Phi(h Lambda_t) - y_t)_u eta_{t,u}`.
pub fn vi_field_network(params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    field_with(Method::Vi, params, traj)
}

/// Negative gradient of the network log-likelihood in the kernel.
pub fn gd_field_network(params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    field_with(Method::Gd, params, traj)
}

/// Field of either method for a time-invariant kernel, laid out over `psi`.
pub fn stationary_fields(method: Method, params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    if !params.kernel().is_time_invariant() {
        return Err(invalid("stationary field needs a time-invariant kernel"));
    }
    field_with(method, params, traj)
}

/// Field of `method`, using the single-node formulas when `V = 1`.
pub fn field(method: Method, params: &ModelParams, traj: &Trajectory) -> Result<KernelParams> {
    field_with(method, params, traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::loglik_unit;
    use crate::model::{Event, KernelTensor, LagKernel, TimeGrid};

    fn grid() -> TimeGrid {
        TimeGrid::new(0.5, 6, 3).unwrap()
    }

    #[test]
    fn empty_trajectory_gives_zero_vi_field() {
        let p = ModelParams::zero_kernel(grid(), 1, 0.2, false).unwrap();
        let g = vi_field(&p, &Trajectory::empty(grid(), 1)).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        let p = ModelParams::zero_kernel(grid(), 2, 0.2, false).unwrap();
        let g = vi_field_network(&p, &Trajectory::empty(grid(), 2)).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_event_vi_coordinate() {
        // N = 4 so the only event at t=3 influences just t=4
        let g4 = TimeGrid::new(0.5, 4, 3).unwrap();
        let mut k = KernelTensor::zeros(g4, 1);
        k.set(3, 4, 0, 0, 0.3).unwrap();
        let p = ModelParams::new(vec![0.2], KernelParams::TimeVarying(k)).unwrap();
        let traj = Trajectory::from_events(g4, 1, vec![Event { time: 3, node: 0 }]).unwrap();
        let g = vi_field(&p, &traj).unwrap();
        let nz: Vec<f64> = g.values().iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nz.len(), 1);
        assert!((nz[0] - link_phi(0.5 * 0.5)).abs() < 1e-15);
        let KernelParams::TimeVarying(gk) = g else { unreachable!() };
        assert_eq!(gk.k(3, 4, 0, 0), nz[0]);
    }

    #[test]
    fn gd_zero_kernel_no_events_is_h() {
        let p = ModelParams::zero_kernel(grid(), 1, 0.2, false).unwrap();
        // pre-horizon event at -1 feeds t = 1 and t = 2
        let traj = Trajectory::from_events(grid(), 1, vec![Event { time: -1, node: 0 }]).unwrap();
        let KernelParams::TimeVarying(g) = gd_field(&p, &traj).unwrap() else { unreachable!() };
        assert!((g.k(-1, 1, 0, 0) - 0.5).abs() < 1e-15);
        assert!((g.k(-1, 2, 0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(g.k(-1, 0, 0, 0), 0.0);
        let p2 = ModelParams::zero_kernel(grid(), 2, 0.2, false).unwrap();
        let traj2 = Trajectory::from_events(grid(), 2, vec![Event { time: -1, node: 1 }]).unwrap();
        let KernelParams::TimeVarying(g2) = gd_field_network(&p2, &traj2).unwrap() else { unreachable!() };
        for to in 0..2 {
            assert!((g2.k(-1, 1, 1, to) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn gd_matches_finite_difference_small() {
        let g = grid();
        let k = KernelTensor::from_fn(g, 1, |i, t, _, _| 0.05 + 0.02 * ((i * 3 + t) % 4) as f64);
        let p = ModelParams::new(vec![0.3], KernelParams::TimeVarying(k)).unwrap();
        let traj = Trajectory::from_binary(g, &[1, 0, 1, 1, 0, 0, 1, 0, 1]).unwrap();
        let field = gd_field(&p, &traj).unwrap();
        let KernelParams::TimeVarying(kt) = p.kernel() else { unreachable!() };
        for off in kt.stored_offsets() {
            let eps = 1e-5;
            let mut plus = p.clone();
            plus.kernel_mut().values_mut()[off] += eps;
            let mut minus = p.clone();
            minus.kernel_mut().values_mut()[off] -= eps;
            let fd = -(loglik_unit(&plus, &traj).unwrap() - loglik_unit(&minus, &traj).unwrap()) / (2.0 * eps);
            assert!((field.values()[off] - fd).abs() / (1.0 + fd.abs()) < 1e-6);
        }
    }

    #[test]
    fn network_reduces_to_time_only() {
        let g = grid();
        let k = KernelTensor::from_fn(g, 1, |i, t, _, _| 0.01 * (i + t) as f64);
        let p = ModelParams::new(vec![0.3], KernelParams::TimeVarying(k)).unwrap();
        let traj = Trajectory::from_binary(g, &[0, 1, 1, 0, 1, 0, 0, 1, 1]).unwrap();
        assert_eq!(vi_field(&p, &traj).unwrap(), vi_field_network(&p, &traj).unwrap());
        assert_eq!(gd_field(&p, &traj).unwrap(), gd_field_network(&p, &traj).unwrap());
    }

    #[test]
    fn gd_rejects_nonpositive_intensity() {
        let g = grid();
        let mut k = KernelTensor::zeros(g, 1);
        k.set(1, 2, 0, 0, -1.0).unwrap();
        let p = ModelParams::new(vec![0.2], KernelParams::TimeVarying(k)).unwrap();
        let traj = Trajectory::from_events(g, 1, vec![Event { time: 1, node: 0 }]).unwrap();
        assert!(matches!(gd_field(&p, &traj), Err(Error::Infeasible { t: 2, .. })));
        assert!(vi_field(&p, &traj).is_ok());
    }

    #[test]
    fn stationary_single_event_pattern() {
        let g = grid();
        let psi = LagKernel::from_values(g, 1, vec![0.3, 0.1, 0.05]).unwrap();
        let p = ModelParams::new(vec![0.2], KernelParams::TimeInvariant(psi)).unwrap();
        // an event at N-1 reaches only t = N
        let traj = Trajectory::from_events(g, 1, vec![Event { time: 5, node: 0 }]).unwrap();
        let f = stationary_fields(Method::Vi, &p, &traj).unwrap();
        assert!((f.values()[0] - link_phi(0.5 * (0.2 + 0.3))).abs() < 1e-15);
        assert_eq!(&f.values()[1..], &[0.0, 0.0]);
        assert!(stationary_fields(Method::Vi, &ModelParams::zero_kernel(g, 1, 0.2, false).unwrap(), &traj).is_err());
    }
}
