use crate::error::{invalid, Error, Result};
use crate::likelihood::link_phi;
use crate::model::{check_compatible, excitation_unchecked, ModelParams, Trajectory};

/// Lowest admissible baseline.
pub const MU_FLOOR: f64 = 1e-8;
/// Largest upper bracket tried before giving up.
pub const MU_CAP: f64 = 1e4;
/// Absolute width at which bisection stops.
pub const MU_TOL: f64 = 1e-10;

/// Root of a strictly decreasing `f` on `(lo, MU_CAP]`, starting the upper bracket at `start`.
fn bisect(f: impl Fn(f64) -> f64, lo: f64, start: f64) -> Result<f64> {
    let f_lo = f(lo);
    if f_lo.is_nan() {
        return Err(Error::Numeric(format!("baseline equation is NaN at {lo}")));
    }
    if f_lo <= 0.0 {
        return Err(Error::NoRoot(format!("baseline equation is nonpositive at the lower bracket {lo:e}")));
    }
    let mut lo = lo;
    let mut hi = start.max(2.0 * lo).min(MU_CAP);
    loop {
        let v = f(hi);
        if v.is_nan() {
            return Err(Error::Numeric(format!("baseline equation is NaN at {hi}")));
        }
        if v <= 0.0 {
            break;
        }
        if hi >= MU_CAP {
            return Err(Error::Unbounded(format!("baseline equation stays positive up to {MU_CAP}")));
        }
        lo = hi;
        hi = (2.0 * hi).min(MU_CAP);
    }
    while hi - lo > MU_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lower bracket keeping every `mu + e` positive.
fn lower_bound(excitations: &[f64]) -> f64 {
    let worst = excitations.iter().map(|e| -e).fold(f64::NEG_INFINITY, f64::max);
    if worst.is_finite() && worst >= MU_FLOOR {
        worst + 1e-12 * worst.abs().max(1.0)
    } else {
        MU_FLOOR
    }
}

fn check_batch(params: &ModelParams, batch: &[&Trajectory]) -> Result<()> {
    if batch.is_empty() {
        return Err(invalid("baseline solve needs at least one trajectory"));
    }
    for traj in batch {
        check_compatible(params.kernel(), traj)?;
    }
    Ok(())
}

/// Baseline root of the batch first-order condition for each node, kernel fixed.
///
/// Single node: `sum_{m,t} h (y_t / phi(h (mu + e_t)) - 1) = 0`. On networks each node
/// solves its own equation with the node-coupled terms frozen at the current baseline.
/// Failures are reported per node.
pub fn solve_mu_per_node(params: &ModelParams, batch: &[Trajectory]) -> Result<Vec<Result<f64>>> {
    let refs: Vec<&Trajectory> = batch.iter().collect();
    solve_nodes(params, &refs)
}

pub(crate) fn solve_nodes(params: &ModelParams, batch: &[&Trajectory]) -> Result<Vec<Result<f64>>> {
    check_batch(params, batch)?;
    let grid = params.grid();
    let h = grid.h();
    let n = grid.n();
    let v = params.nodes();
    let steps = (batch.len() * n) as f64;

    if v == 1 {
        let mut e = Vec::new();
        for traj in batch {
            let exc = excitation_unchecked(params.kernel(), traj);
            e.extend(traj.events_between(1, n as i64).iter().map(|ev| exc[ev.time as usize - 1]));
        }
        if e.is_empty() {
            return Ok(vec![Err(Error::NoRoot("batch has no events".into()))]);
        }
        if e.len() as f64 == steps {
            return Ok(vec![Err(Error::Unbounded("every step of the batch has an event".into()))]);
        }
        let f = |mu: f64| e.iter().map(|x| h / link_phi(h * (mu + x))).sum::<f64>() - h * steps;
        let start = e.len() as f64 / (steps * h);
        return Ok(vec![bisect(f, lower_bound(&e), start)]);
    }

    let mu = params.mu();
    let mut c = 0.0;
    let mut per_node: Vec<Vec<f64>> = vec![Vec::new(); v];
    for traj in batch {
        let exc = excitation_unchecked(params.kernel(), traj);
        for t in 1..=n {
            let row = &exc[(t - 1) * v..t * v];
            let bar: f64 = row.iter().zip(mu).map(|(e, m)| e + m).sum();
            match traj.event_at(t as i64) {
                Some(u) => {
                    c += h * (1.0 / link_phi(h * bar) - 1.0) - 1.0 / bar;
                    per_node[u].push(row[u]);
                }
                None => c -= h,
            }
        }
    }
    Ok(per_node
        .iter()
        .enumerate()
        .map(|(u, e)| {
            if e.is_empty() {
                return Err(Error::NoRoot(format!("batch has no events at node {u}")));
            }
            if !c.is_finite() {
                return Err(Error::Numeric(format!("coupling term is {c} for node {u}")));
            }
            if c >= 0.0 {
                return Err(Error::Unbounded(format!("coupling term {c} is nonnegative for node {u}")));
            }
            let f = |m: f64| c + e.iter().map(|x| 1.0 / (m + x)).sum::<f64>();
            bisect(f, lower_bound(e), e.len() as f64 / (steps * h))
        })
        .collect())
}

/// Like [`solve_mu_per_node`] but fails if any node fails.
pub fn solve_mu_bisection(params: &ModelParams, batch: &[Trajectory]) -> Result<Vec<f64>> {
    solve_mu_per_node(params, batch)?.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Event, KernelParams, KernelTensor, TimeGrid};

    #[test]
    fn single_event_closed_form() {
        let g = TimeGrid::new(1.0, 10, 2).unwrap();
        let p = ModelParams::zero_kernel(g, 1, 0.5, false).unwrap();
        let traj = Trajectory::from_events(g, 1, vec![Event { time: 4, node: 0 }]).unwrap();
        let mu = solve_mu_bisection(&p, &[traj]).unwrap()[0];
        assert!((mu + 0.9f64.ln()).abs() < 1e-9);
        assert!((mu - 0.105_361).abs() < 1e-6);
    }

    #[test]
    fn no_events_and_all_events() {
        let g = TimeGrid::new(0.5, 4, 2).unwrap();
        let p = ModelParams::zero_kernel(g, 1, 0.2, false).unwrap();
        // pre-horizon events are not scored
        let pre = Trajectory::from_events(g, 1, vec![Event { time: 0, node: 0 }]).unwrap();
        assert!(matches!(solve_mu_bisection(&p, &[pre]), Err(Error::NoRoot(_))));
        let full = Trajectory::from_binary(g, &[0, 0, 1, 1, 1, 1]).unwrap();
        assert!(matches!(solve_mu_bisection(&p, &[full]), Err(Error::Unbounded(_))));
    }

    #[test]
    fn negative_excitation_raises_lower_bracket() {
        let g = TimeGrid::new(0.5, 4, 2).unwrap();
        let mut k = KernelTensor::zeros(g, 1);
        k.set(1, 2, 0, 0, -0.3).unwrap();
        let p = ModelParams::new(vec![0.5], KernelParams::TimeVarying(k)).unwrap();
        let traj = Trajectory::from_binary(g, &[0, 0, 1, 1, 0, 0]).unwrap();
        let mu = solve_mu_bisection(&p, &[traj]).unwrap()[0];
        assert!(mu > 0.3);
    }

    #[test]
    fn network_zero_kernel_fixed_point() {
        let g = TimeGrid::new(0.5, 6, 2).unwrap();
        let batch = vec![
            Trajectory::from_events(g, 2, vec![Event { time: 1, node: 0 }, Event { time: 3, node: 1 }]).unwrap(),
            Trajectory::from_events(g, 2, vec![Event { time: 2, node: 0 }, Event { time: 6, node: 0 }]).unwrap(),
        ];
        let (n0, n1, total) = (3.0, 1.0, 4.0);
        let s = -(1.0f64 - total / 12.0).ln() / 0.5;
        let fixed = vec![n0 / total * s, n1 / total * s];
        let p = ModelParams::new(fixed.clone(), KernelParams::zeros_time_varying(g, 2)).unwrap();
        let mu = solve_mu_bisection(&p, &batch).unwrap();
        for u in 0..2 {
            assert!((mu[u] - fixed[u]).abs() < 1e-9, "{mu:?} vs {fixed:?}");
        }
    }

    #[test]
    fn network_node_without_events_fails_alone() {
        let g = TimeGrid::new(0.5, 4, 2).unwrap();
        let p = ModelParams::zero_kernel(g, 2, 0.2, false).unwrap();
        let traj = Trajectory::from_events(g, 2, vec![Event { time: 2, node: 1 }]).unwrap();
        let out = solve_mu_per_node(&p, &[traj]).unwrap();
        assert!(matches!(out[0], Err(Error::NoRoot(_))));
        assert!(out[1].is_ok());
    }
}
