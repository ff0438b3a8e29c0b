use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::step::{step_probabilities, step_probabilities_lenient};
use crate::error::{invalid, Error, Result};
use crate::inference::low_rank_truncate;
use crate::model::{KernelParams, ModelParams, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn of(&self, x: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => x.map(f64::abs).sum(),
            Norm::L2 => x.map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Linf => x.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            _ => Err(invalid(format!("unknown norm {s:?}"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        })
    }
}

/// `||est - truth|| / ||truth||`.
pub fn relative_error(est: &[f64], truth: &[f64], norm: Norm) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(invalid(format!("shape mismatch: {} vs {} entries", est.len(), truth.len())));
    }
    let denom = norm.of(truth.iter().copied());
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("truth has zero {norm} norm")));
    }
    Ok(norm.of(est.iter().zip(truth).map(|(a, b)| a - b)) / denom)
}

/// Relative errors in all three norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrors {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl RelativeErrors {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }
}

pub fn relative_errors(est: &[f64], truth: &[f64]) -> Result<RelativeErrors> {
    Ok(RelativeErrors {
        l1: relative_error(est, truth, Norm::L1)?,
        l2: relative_error(est, truth, Norm::L2)?,
        linf: relative_error(est, truth, Norm::Linf)?,
    })
}

pub fn mu_relative_errors(est: &ModelParams, truth: &ModelParams) -> Result<RelativeErrors> {
    relative_errors(est.mu(), truth.mu())
}

/// Kernel errors over the trainable entries. Two time-invariant kernels compare lag
/// values; otherwise both are viewed as time-varying.
pub fn kernel_relative_errors(est: &KernelParams, truth: &KernelParams) -> Result<RelativeErrors> {
    if est.grid() != truth.grid() || est.nodes() != truth.nodes() {
        return Err(invalid("kernels live on different grids or node sets"));
    }
    if est.is_time_invariant() && truth.is_time_invariant() {
        return relative_errors(est.values(), truth.values());
    }
    let view = |k: &KernelParams| KernelParams::TimeVarying(k.to_time_varying()).stored_values();
    relative_errors(&view(est), &view(truth))
}

/// Prediction errors with their count of estimate steps that had nonpositive intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionErrors {
    pub errors: RelativeErrors,
    pub infeasible_steps: usize,
}

/// Step probabilities of `est` against `truth`, pooled over every `(trajectory, t, u)`.
pub fn prediction_relative_errors(
    est: &ModelParams,
    truth: &ModelParams,
    data: &[Trajectory],
) -> Result<PredictionErrors> {
    let parts: Vec<(Vec<f64>, Vec<f64>, usize)> = data
        .par_iter()
        .map(|traj| {
            let want = step_probabilities(truth, traj)?;
            let (got, bad) = step_probabilities_lenient(est, traj)?;
            Ok((got, want, bad))
        })
        .collect::<Result<_>>()?;
    let mut got = Vec::new();
    let mut want = Vec::new();
    let mut infeasible_steps = 0;
    for (g, w, b) in parts {
        got.extend(g);
        want.extend(w);
        infeasible_steps += b;
    }
    Ok(PredictionErrors { errors: relative_errors(&got, &want)?, infeasible_steps })
}

/// Outcome of a truncation threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationChoice {
    pub tau: f64,
    pub rank: usize,
    pub params: ModelParams,
    /// `(tau, rank, validation l1 prediction RE)` for every candidate.
    pub scores: Vec<(f64, usize, f64)>,
}

/// Truncates `fit` at each candidate threshold and keeps the one with the smallest
/// l1 prediction RE on `validation`; ties keep the earlier candidate.
pub fn select_truncation(
    fit: &ModelParams,
    truth: &ModelParams,
    validation: &[Trajectory],
    candidates: &[f64],
) -> Result<TruncationChoice> {
    let mut best: Option<TruncationChoice> = None;
    let mut scores = Vec::with_capacity(candidates.len());
    for &tau in candidates {
        let (kernel, rank) = low_rank_truncate(fit.kernel(), tau)?;
        let params = ModelParams::new(fit.mu().to_vec(), kernel)?;
        let score = prediction_relative_errors(&params, truth, validation)?.errors.l1;
        scores.push((tau, rank, score));
        if best.as_ref().is_none_or(|b| score < b.scores[0].2) {
            best = Some(TruncationChoice { tau, rank, params, scores: vec![(tau, rank, score)] });
        }
    }
    let mut choice = best.ok_or_else(|| invalid("no truncation candidates"))?;
    choice.scores = scores;
    Ok(choice)
}
