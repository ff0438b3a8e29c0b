//! Sequential simulation from the exact conditional laws, and benchmark presets.

mod kernels;
mod presets;

pub use kernels::{benchmark_kernel_network, benchmark_kernel_time_only, edge_kernel, stationary_kernel, EdgeSpec};
pub use presets::{Preset, PresetTruth, PRESET_EDGES};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::likelihood::link_phi;
use crate::model::{for_each_target, Event, ModelParams, Trajectory};

/// Independent stream for trajectory `index` under `master` seed.
pub fn trajectory_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

fn simulate_inner<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R, network: bool) -> Result<Trajectory> {
    let grid = *params.grid();
    let v = params.nodes();
    let h = grid.h();
    let kernel = params.kernel();
    let values = kernel.values();
    let mu = params.mu();
    // excitation per extended slot
    let mut exc = vec![0.0; grid.extended_len() * v];
    let mut events = Vec::new();
    let mut lambda = vec![0.0; v];
    for t in grid.first_index()..=grid.last_index() {
        let slot = grid.slot(t);
        for (u, l) in lambda.iter_mut().enumerate() {
            *l = mu[u] + exc[slot * v + u];
        }
        if let Some((node, &intensity)) = lambda.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
            return Err(Error::Generation { t, node, intensity, events_so_far: events.len() });
        }
        let bar: f64 = lambda.iter().sum();
        let u0: f64 = rng.gen();
        if u0 >= link_phi(h * bar) {
            continue;
        }
        let node = if network && v > 1 {
            let target = rng.gen::<f64>() * bar;
            let mut acc = 0.0;
            let mut pick = v - 1;
            for (u, l) in lambda.iter().enumerate() {
                acc += l;
                if target < acc {
                    pick = u;
                    break;
                }
            }
            pick
        } else {
            0
        };
        events.push(Event { time: t, node });
        for_each_target(kernel, t, node, grid.first_index(), |target, _, off| {
            let s = grid.slot(target) * v;
            for (e, k) in exc[s..s + v].iter_mut().zip(&values[off..off + v]) {
                *e += k;
            }
        });
    }
    Ok(Trajectory::from_sorted_unchecked(grid, v, events))
}

/// Draws `y_t ~ Bernoulli(phi(h Lambda_t))` for `t = -N'+1..=N` (single node).
pub fn simulate_time_only<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Trajectory> {
    if params.nodes() != 1 {
        return Err(invalid(format!("time-only simulation needs one node, got {}", params.nodes())));
    }
    simulate_inner(params, rng, false)
}

/// Draws an event with probability `phi(h barLambda_t)`, then its node with
/// probability `Lambda_t(u) / barLambda_t`. With one node no second draw is made,
/// so the random stream matches [`simulate_time_only`].
pub fn simulate_network<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Trajectory> {
    simulate_inner(params, rng, true)
}

/// `count` trajectories, trajectory `m` drawn from [`trajectory_rng`]`(seed, m)`.
pub fn simulate_dataset(params: &ModelParams, count: usize, seed: u64) -> Result<Vec<Trajectory>> {
    (0..count).into_par_iter().map(|m| simulate_network(params, &mut trajectory_rng(seed, m as u64))).collect()
}

/// Like [`simulate_dataset`], but a trajectory that hits a nonpositive intensity
/// is redrawn from stream `(attempt << 32) | m`, up to `max_redraws` times.
/// Returns the dataset and the total number of redraws.
pub fn simulate_dataset_redrawn(
    params: &ModelParams,
    count: usize,
    seed: u64,
    max_redraws: u32,
) -> Result<(Vec<Trajectory>, usize)> {
    if count as u64 > u32::MAX as u64 {
        return Err(invalid(format!("at most {} trajectories per dataset", u32::MAX)));
    }
    let drawn: Vec<(Trajectory, usize)> = (0..count)
        .into_par_iter()
        .map(|m| {
            let mut attempt: u64 = 0;
            loop {
                match simulate_network(params, &mut trajectory_rng(seed, (attempt << 32) | m as u64)) {
                    Ok(traj) => return Ok((traj, attempt as usize)),
                    Err(Error::Generation { .. }) if attempt < max_redraws as u64 => attempt += 1,
                    Err(e) => return Err(e),
                }
            }
        })
        .collect::<Result<_>>()?;
    let redraws = drawn.iter().map(|(_, a)| a).sum();
    Ok((drawn.into_iter().map(|(t, _)| t).collect(), redraws))
}
