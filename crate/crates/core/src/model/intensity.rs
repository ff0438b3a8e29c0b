use super::kernel::{CellKind, KernelCoord, KernelParams};
use super::params::ModelParams;
use super::trajectory::Trajectory;
use crate::error::{invalid, Result};

/// Conditional intensities `Lambda_t(u)` for `t = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRecord {
    nodes: usize,
    lambda: Vec<f64>,
    bar_lambda: Vec<f64>,
}

impl IntensityRecord {
    /// Builds from a row-major `N x V` matrix; row sums become `bar_lambda`.
    pub fn from_matrix(nodes: usize, lambda: Vec<f64>) -> Self {
        debug_assert_eq!(lambda.len() % nodes, 0);
        let bar_lambda = lambda.chunks(nodes).map(|row| row.iter().sum()).collect();
        Self { nodes, lambda, bar_lambda }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn steps(&self) -> usize {
        self.bar_lambda.len()
    }

    /// `Lambda_t(u)`, `t` in `1..=N`.
    pub fn lambda(&self, t: i64, u: usize) -> f64 {
        self.lambda[(t as usize - 1) * self.nodes + u]
    }

    /// All nodes at step `t`.
    pub fn row(&self, t: i64) -> &[f64] {
        let s = (t as usize - 1) * self.nodes;
        &self.lambda[s..s + self.nodes]
    }

    pub fn bar(&self, t: i64) -> f64 {
        self.bar_lambda[t as usize - 1]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.lambda
    }

    pub fn bar_lambda(&self) -> &[f64] {
        &self.bar_lambda
    }

    /// Smallest node intensity over all steps.
    pub fn min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn check_compatible(kernel: &KernelParams, traj: &Trajectory) -> Result<()> {
    if kernel.grid() != traj.grid() {
        return Err(invalid(format!(
            "kernel grid {:?} does not match trajectory grid {:?}",
            kernel.grid(),
            traj.grid()
        )));
    }
    if kernel.nodes() != traj.nodes() {
        return Err(invalid(format!("kernel has {} nodes, trajectory has {}", kernel.nodes(), traj.nodes())));
    }
    Ok(())
}

fn check_step(traj: &Trajectory, t: i64) -> Result<()> {
    if !traj.grid().is_observed(t) {
        return Err(invalid(format!("step {t} outside 1..={}", traj.grid().n())));
    }
    Ok(())
}

/// Kernel coordinates whose sum is the excitation term of `Lambda_t(u)`.
pub fn history_vector(traj: &Trajectory, t: i64, u: usize) -> Result<Vec<KernelCoord>> {
    check_step(traj, t)?;
    if u >= traj.nodes() {
        return Err(invalid(format!("node {u} >= node count {}", traj.nodes())));
    }
    Ok(traj.history_window(t).iter().map(|e| KernelCoord { i: e.time, t, from: e.node, to: u }).collect())
}

/// `Lambda_t(u)` for every node at a single step `t` in `1..=N`.
pub fn intensity(params: &ModelParams, traj: &Trajectory, t: i64) -> Result<Vec<f64>> {
    check_compatible(params.kernel(), traj)?;
    check_step(traj, t)?;
    let kernel = params.kernel();
    let mut out = params.mu().to_vec();
    for e in traj.history_window(t) {
        for (u, o) in out.iter_mut().enumerate() {
            *o += kernel.weight(e.time, t, e.node, u);
        }
    }
    Ok(out)
}

/// Calls `f(t, l, offset)` for each target `t = i+l` in `lo..=N` fed by an event at `(i, from)`.
pub(crate) fn for_each_target(
    kernel: &KernelParams,
    i: i64,
    from: usize,
    lo: i64,
    mut f: impl FnMut(i64, usize, usize),
) {
    let grid = kernel.grid();
    let first_l = (lo - i).max(1) as usize;
    let last_l = ((grid.last_index() - i).min(grid.memory() as i64)).max(0) as usize;
    for l in first_l..=last_l {
        if let KernelParams::TimeVarying(k) = kernel {
            if k.cell_kind(i, l) == CellKind::Absent {
                continue;
            }
        }
        f(i + l as i64, l, kernel.slice_offset(i, l, from));
    }
}

/// Excitation `Lambda_t(u) - mu(u)` for `t = 1..=N`, row-major `N x V`.
pub fn excitation(kernel: &KernelParams, traj: &Trajectory) -> Result<Vec<f64>> {
    check_compatible(kernel, traj)?;
    Ok(excitation_unchecked(kernel, traj))
}

pub(crate) fn excitation_unchecked(kernel: &KernelParams, traj: &Trajectory) -> Vec<f64> {
    let v = kernel.nodes();
    let mut out = vec![0.0; traj.grid().n() * v];
    let values = kernel.values();
    for e in traj.events() {
        for_each_target(kernel, e.time, e.node, 1, |t, _, off| {
            let row = &mut out[(t as usize - 1) * v..t as usize * v];
            for (o, k) in row.iter_mut().zip(&values[off..off + v]) {
                *o += k;
            }
        });
    }
    out
}

/// Intensities at every observed step.
pub fn intensity_record(params: &ModelParams, traj: &Trajectory) -> Result<IntensityRecord> {
    check_compatible(params.kernel(), traj)?;
    Ok(intensity_record_unchecked(params, traj))
}

pub(crate) fn intensity_record_unchecked(params: &ModelParams, traj: &Trajectory) -> IntensityRecord {
    let mut lambda = excitation_unchecked(params.kernel(), traj);
    let mu = params.mu();
    for row in lambda.chunks_mut(mu.len()) {
        for (l, m) in row.iter_mut().zip(mu) {
            *l += m;
        }
    }
    IntensityRecord::from_matrix(mu.len(), lambda)
}
