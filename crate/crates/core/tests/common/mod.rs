//! Random models and data shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tulik_core::model::{Event, KernelParams, KernelTensor, LagKernel, ModelParams, TimeGrid, Trajectory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(rng: &mut impl Rng, max_n: usize, max_memory: usize) -> TimeGrid {
    TimeGrid::new(rng.gen_range(0.1..1.0), rng.gen_range(1..=max_n), rng.gen_range(1..=max_memory)).unwrap()
}

/// Each extended step carries an event with probability `p`, at a uniform node.
pub fn trajectory(rng: &mut impl Rng, g: TimeGrid, nodes: usize, p: f64) -> Trajectory {
    let mut events = Vec::new();
    for time in g.first_index()..=g.last_index() {
        if rng.gen_bool(p) {
            events.push(Event { time, node: rng.gen_range(0..nodes) });
        }
    }
    Trajectory::from_events(g, nodes, events).unwrap()
}

pub fn tensor(rng: &mut impl Rng, g: TimeGrid, nodes: usize, lo: f64, hi: f64) -> KernelTensor {
    let mut k = KernelTensor::from_fn(g, nodes, |_, _, _, _| rng.gen_range(lo..hi));
    k.retain_stored();
    k
}

pub fn lag_kernel(rng: &mut impl Rng, g: TimeGrid, nodes: usize, lo: f64, hi: f64) -> LagKernel {
    let psi = (0..g.memory() * nodes * nodes).map(|_| rng.gen_range(lo..hi)).collect();
    LagKernel::from_values(g, nodes, psi).unwrap()
}

/// Parameters with positive intensity along every history: negative cells are
/// small enough that `N' * V` of them cannot cancel the baseline.
pub fn feasible_params(rng: &mut impl Rng, g: TimeGrid, nodes: usize, time_invariant: bool) -> ModelParams {
    let mu: Vec<f64> = (0..nodes).map(|_| rng.gen_range(0.2..1.0)).collect();
    let floor = mu.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = -0.9 * floor / (g.memory() * nodes) as f64;
    let kernel = if time_invariant {
        KernelParams::TimeInvariant(lag_kernel(rng, g, nodes, lo, 0.4))
    } else {
        KernelParams::TimeVarying(tensor(rng, g, nodes, lo, 0.4))
    };
    ModelParams::new(mu, kernel).unwrap()
}

/// Every assignment of at most one event per step to `steps` steps: `(V + 1)^steps` entries,
/// each listing the node per step (`None` for no event).
pub fn all_realizations(steps: usize, nodes: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![Vec::new()];
    for _ in 0..steps {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=nodes).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.checked_sub(1));
                    p
                })
            })
            .collect();
    }
    out
}

/// `history` up to step 0 followed by `observed` on steps `1..=N`.
pub fn with_observed(history: &Trajectory, observed: &[Option<usize>]) -> Trajectory {
    let g = *history.grid();
    let mut events: Vec<Event> = history.events_between(g.first_index(), 0).to_vec();
    events.extend(observed.iter().enumerate().filter_map(|(k, n)| n.map(|node| Event { time: k as i64 + 1, node })));
    Trajectory::from_events(g, history.nodes(), events).unwrap()
}

pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
