use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::barrier::barrier_weights;
use super::baseline::{solve_nodes, MU_CAP, MU_FLOOR, MU_TOL};
use super::config::{KernelForm, KernelInit, Method, Reduction, SmoothnessStep, TrainConfig};
use super::fields::{accumulate, field_weights};
use super::lowrank::low_rank_truncate;
use super::smoothness::{smoothness_gradient, smoothness_prox};
use crate::error::{invalid, Error, Result};
use crate::likelihood::loglik_record;
use crate::model::{intensity_record_unchecked, KernelParams, KernelTensor, ModelParams, Trajectory, QUADRATURE_ORDER};

/// Trajectories summed sequentially per chunk in deterministic mode.
const CHUNK: usize = 32;

/// Numeric settings that the results depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub method: Method,
    pub quadrature_order: usize,
    pub mu_bracket: (f64, f64),
    pub mu_tolerance: f64,
    pub batches_per_epoch: usize,
    pub trajectories: usize,
    pub reduction: Reduction,
}

/// Traces and result of [`train`]; every series has one entry per completed epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Mean over the epoch's batches of the per-trajectory negative log-likelihood,
    /// taken over feasible trajectories before each update.
    pub nll_per_epoch: Vec<f64>,
    /// Standard error of that mean across batches.
    pub nll_stderr_per_epoch: Vec<f64>,
    pub mu_trace: Vec<Vec<f64>>,
    /// Trajectories routed to the barrier, summed over the epoch.
    pub violation_counts: Vec<usize>,
    /// Node baselines left unchanged because the batch equation had no usable root.
    pub mu_skips: Vec<usize>,
    pub final_params: ModelParams,
    pub truncation_rank: Option<usize>,
    pub metadata: FitMetadata,
}

#[derive(Clone)]
struct Partial {
    field: Vec<f64>,
    barrier: Vec<f64>,
    nll: f64,
    feasible: usize,
    violations: usize,
}

impl Partial {
    fn new(len: usize) -> Self {
        Self { field: vec![0.0; len], barrier: vec![0.0; len], nll: 0.0, feasible: 0, violations: 0 }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.field.iter_mut().zip(&other.field) {
            *a += b;
        }
        for (a, b) in self.barrier.iter_mut().zip(&other.barrier) {
            *a += b;
        }
        self.nll += other.nll;
        self.feasible += other.feasible;
        self.violations += other.violations;
        self
    }
}

fn contribute(acc: &mut Partial, params: &ModelParams, cfg: &TrainConfig, traj: &Trajectory) -> Result<()> {
    let h = traj.grid().h();
    let rec = intensity_record_unchecked(params, traj);
    if rec.min() < cfg.intensity_floor {
        acc.violations += 1;
        let w = barrier_weights(&rec, cfg.intensity_floor, cfg.barrier_kind);
        accumulate(params.kernel(), traj, &w, 1.0, &mut acc.barrier);
    } else {
        let w = field_weights(cfg.method, &rec, traj, h)?;
        accumulate(params.kernel(), traj, &w, 1.0, &mut acc.field);
        acc.nll -= loglik_record(&rec, traj, h)?;
        acc.feasible += 1;
    }
    Ok(())
}

fn batch_partial(params: &ModelParams, cfg: &TrainConfig, batch: &[&Trajectory]) -> Result<Partial> {
    let len = params.kernel().values().len();
    match cfg.reduction {
        Reduction::Deterministic => {
            let parts: Vec<Result<Partial>> = batch
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = Partial::new(len);
                    for traj in chunk {
                        contribute(&mut acc, params, cfg, traj)?;
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = Partial::new(len);
            for p in parts {
                total = total.merge(p?);
            }
            Ok(total)
        }
        Reduction::Unordered => batch
            .par_iter()
            .try_fold(
                || Partial::new(len),
                |mut acc, traj| {
                    contribute(&mut acc, params, cfg, traj)?;
                    Ok(acc)
                },
            )
            .try_reduce(|| Partial::new(len), |a, b| Ok(a.merge(b))),
    }
}

fn initial_kernel(cfg: &TrainConfig, first: &Trajectory) -> Result<KernelParams> {
    let grid = *first.grid();
    let v = first.nodes();
    let mut kernel = match cfg.kernel_form {
        KernelForm::TimeVarying => KernelParams::zeros_time_varying(grid, v),
        KernelForm::TimeInvariant => KernelParams::zeros_time_invariant(grid, v),
    };
    if let KernelInit::Constant { value, zero_sources } = &cfg.init {
        if let Some(bad) = zero_sources.iter().find(|&&s| s >= v) {
            return Err(invalid(format!("init source node {bad} >= node count {v}")));
        }
        let fill = |from: usize| if zero_sources.contains(&from) { 0.0 } else { *value };
        kernel = match kernel {
            KernelParams::TimeVarying(_) => {
                let mut k = KernelTensor::from_fn(grid, v, |_, _, from, _| fill(from));
                k.retain_stored();
                KernelParams::TimeVarying(k)
            }
            KernelParams::TimeInvariant(mut k) => {
                for l in 1..=grid.memory() {
                    for from in 0..v {
                        let off = k.offset(l, from);
                        k.values_mut()[off..off + v].fill(fill(from));
                    }
                }
                KernelParams::TimeInvariant(k)
            }
        };
    }
    Ok(kernel)
}

/// `mu_0(u) = sum_m n_m(u) / (M N h)`, floored at the bracket minimum.
pub fn empirical_baseline(dataset: &[Trajectory]) -> Result<Vec<f64>> {
    let first = dataset.first().ok_or_else(|| invalid("dataset is empty"))?;
    let grid = first.grid();
    let mut counts = vec![0usize; first.nodes()];
    for traj in dataset {
        for (c, n) in counts.iter_mut().zip(traj.observed_counts()) {
            *c += n;
        }
    }
    let denom = dataset.len() as f64 * grid.n() as f64 * grid.h();
    Ok(counts.iter().map(|&c| (c as f64 / denom).max(MU_FLOOR)).collect())
}

/// Batch stochastic training of baseline and kernel.
pub fn train(config: &TrainConfig, dataset: &[Trajectory], mu0: Option<Vec<f64>>) -> Result<FitReport> {
    config.validate()?;
    let first = dataset.first().ok_or_else(|| invalid("dataset is empty"))?;
    if let Some(bad) = dataset.iter().position(|t| t.grid() != first.grid() || t.nodes() != first.nodes()) {
        return Err(invalid(format!("trajectory {bad} has a different grid or node count")));
    }
    let mu = match mu0 {
        Some(m) => m,
        None => empirical_baseline(dataset)?,
    };
    let mut params = ModelParams::new(mu, initial_kernel(config, first)?)?;
    let v = params.nodes();
    let h = first.grid().h();
    let batches_per_epoch = dataset.len().div_ceil(config.batch_size);

    let mut report = FitReport {
        nll_per_epoch: Vec::new(),
        nll_stderr_per_epoch: Vec::new(),
        mu_trace: Vec::new(),
        violation_counts: Vec::new(),
        mu_skips: Vec::new(),
        final_params: params.clone(),
        truncation_rank: None,
        metadata: FitMetadata {
            method: config.method,
            quadrature_order: QUADRATURE_ORDER,
            mu_bracket: (MU_FLOOR, MU_CAP),
            mu_tolerance: MU_TOL,
            batches_per_epoch,
            trajectories: dataset.len(),
            reduction: config.reduction,
        },
    };

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 1..=config.max_epochs {
        let rate =
            config.lr_schedule.rate(epoch).ok_or_else(|| invalid(format!("no learning rate for epoch {epoch}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut batch_nll = Vec::with_capacity(batches_per_epoch);
        let mut violations = 0;
        let mut skips = 0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&Trajectory> = idx.iter().map(|&i| &dataset[i]).collect();
            let part = batch_partial(&params, config, &batch)?;
            violations += part.violations;
            if part.feasible > 0 {
                batch_nll.push(part.nll / part.feasible as f64);
            }
            let scale = 1.0 / batch.len() as f64;
            let values = params.kernel_mut().values_mut();
            for ((x, f), bar) in values.iter_mut().zip(&part.field).zip(&part.barrier) {
                let g = scale * f + config.barrier_weight * bar;
                if !g.is_finite() {
                    return Err(Error::Numeric(format!("non-finite update direction in epoch {epoch}, batch {b}")));
                }
                *x -= rate * g;
            }

            let solved = solve_nodes(&params, &batch)?;
            let mut mu = params.mu().to_vec();
            for (m, s) in mu.iter_mut().zip(solved) {
                match s {
                    Ok(target) => *m = (1.0 - config.mu_mix) * *m + config.mu_mix * target,
                    Err(_) => skips += 1,
                }
            }
            params.set_mu(mu)?;
        }

        if config.smoothness_weight > 0.0 {
            let w = rate * config.smoothness_weight;
            match config.smoothness_step {
                SmoothnessStep::Explicit => {
                    let g = smoothness_gradient(params.kernel(), h);
                    params.kernel_mut().axpy(-w, &g);
                }
                SmoothnessStep::Implicit => *params.kernel_mut() = smoothness_prox(params.kernel(), h, w),
            }
        }
        if !params.kernel().is_finite() {
            return Err(Error::Numeric(format!("kernel became non-finite in epoch {epoch}")));
        }

        let (mean, stderr) = mean_stderr(&batch_nll);
        report.nll_per_epoch.push(mean);
        report.nll_stderr_per_epoch.push(stderr);
        report.mu_trace.push(params.mu().to_vec());
        report.violation_counts.push(violations);
        report.mu_skips.push(skips);
    }
    debug_assert_eq!(params.mu().len(), v);

    if let Some(tau) = config.svd_threshold {
        let (kernel, rank) = low_rank_truncate(params.kernel(), tau)?;
        *params.kernel_mut() = kernel;
        report.truncation_rank = Some(rank);
    }
    report.final_params = params;
    Ok(report)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Clamps every trainable coordinate into `[lo, hi]`.
///
/// Together with a unit batch this gives the projected scheme used in analysis.
pub fn project_box(kernel: &mut KernelParams, lo: f64, hi: f64) {
    for v in kernel.values_mut() {
        *v = v.clamp(lo, hi);
    }
    if let KernelParams::TimeVarying(k) = kernel {
        k.retain_stored();
    }
}
