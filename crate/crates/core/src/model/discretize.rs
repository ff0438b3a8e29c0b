use super::grid::TimeGrid;
use super::kernel::{KernelParams, KernelTensor, LagKernel};
use crate::error::{Error, Result};

/// Gauss-Legendre order per axis of each `I_i x I_t` cell.
pub const QUADRATURE_ORDER: usize = 8;

const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Nodes on `[0, 1]` and weights summing to 1.
fn unit_rule() -> [(f64, f64); QUADRATURE_ORDER] {
    let mut out = [(0.0, 0.0); QUADRATURE_ORDER];
    for k in 0..4 {
        out[2 * k] = (0.5 - 0.5 * GL_NODES[k], 0.5 * GL_WEIGHTS[k]);
        out[2 * k + 1] = (0.5 + 0.5 * GL_NODES[k], 0.5 * GL_WEIGHTS[k]);
    }
    out
}

fn cell_average(grid: &TimeGrid, i: i64, t: i64, f: &mut impl FnMut(f64, f64) -> f64) -> std::result::Result<f64, f64> {
    let rule = unit_rule();
    let (a, b) = (grid.interval_start(i), grid.interval_start(t));
    let h = grid.h();
    let mut acc = 0.0;
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            let v = f(a + x * h, b + y * h);
            if !v.is_finite() {
                return Err(v);
            }
            acc += wx * wy * v;
        }
    }
    Ok(acc)
}

/// Cell averages `K_{i,t}(from,to) = h^-2 * integral of k over I_i x I_t`.
///
/// `kfun(t', t, from, to)` is evaluated on stored and warm-up cells only.
pub fn discretize_kernel(
    mut kfun: impl FnMut(f64, f64, usize, usize) -> f64,
    grid: TimeGrid,
    nodes: usize,
) -> Result<KernelParams> {
    let mut failure = None;
    let k = KernelTensor::from_fn(grid, nodes, |i, t, from, to| {
        if failure.is_some() {
            return 0.0;
        }
        match cell_average(&grid, i, t, &mut |x, y| kfun(x, y, from, to)) {
            Ok(v) => v,
            Err(bad) => {
                failure = Some(Error::Numeric(format!(
                    "kernel evaluated to {bad} in cell (i={i}, t={t}, from={from}, to={to})"
                )));
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(KernelParams::TimeVarying(k)),
    }
}

/// Lag averages `psi_l(from,to)` of a kernel that depends only on `t - t'`.
pub fn discretize_lag_kernel(
    mut gfun: impl FnMut(f64, usize, usize) -> f64,
    grid: TimeGrid,
    nodes: usize,
) -> Result<KernelParams> {
    let mut psi = Vec::with_capacity(grid.memory() * nodes * nodes);
    for l in 1..=grid.memory() as i64 {
        for from in 0..nodes {
            for to in 0..nodes {
                let v = cell_average(&grid, 0, l, &mut |x, y| gfun(y - x, from, to)).map_err(|bad| {
                    Error::Numeric(format!("kernel evaluated to {bad} at lag {l} (from={from}, to={to})"))
                })?;
                psi.push(v);
            }
        }
    }
    Ok(KernelParams::TimeInvariant(LagKernel::from_values(grid, nodes, psi)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = unit_rule();
        for p in 0..16 {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(p)).sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn constant_kernel_is_exact() {
        let grid = TimeGrid::new(0.5, 6, 3).unwrap();
        let KernelParams::TimeVarying(k) = discretize_kernel(|_, _, _, _| 0.37, grid, 2).unwrap() else {
            unreachable!()
        };
        for off in k.stored_offsets() {
            assert!((k.data()[off] - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_kernel_gives_midpoint_product() {
        let grid = TimeGrid::new(0.25, 5, 2).unwrap();
        let k = discretize_kernel(|a, b, _, _| a * b, grid, 1).unwrap();
        for i in -1..=4 {
            for t in (i + 1).max(1)..=(i + 2).min(5) {
                let mid = |j: i64| (j as f64 - 0.5) * 0.25;
                assert!((k.weight(i, t, 0, 0) - mid(i) * mid(t)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn non_finite_reports_cell() {
        let grid = TimeGrid::new(1.0, 3, 2).unwrap();
        let err = discretize_kernel(|a, _, _, _| if a > 1.0 { f64::NAN } else { 0.0 }, grid, 1).unwrap_err();
        assert!(matches!(err, Error::Numeric(msg) if msg.contains("i=2")));
    }

    #[test]
    fn lag_kernel_matches_lifted_cell_average() {
        let grid = TimeGrid::new(0.5, 6, 3).unwrap();
        let g = |tau: f64| (-tau).exp() * (1.0 + 0.5 * tau).cos();
        let lag = discretize_lag_kernel(|tau, _, _| g(tau), grid, 1).unwrap();
        let tv = discretize_kernel(|a, b, _, _| g(b - a), grid, 1).unwrap();
        for i in 0..3 {
            for l in 1..=3 {
                assert!((lag.weight(i, i + l, 0, 0) - tv.weight(i, i + l, 0, 0)).abs() < 1e-14);
            }
        }
    }
}
