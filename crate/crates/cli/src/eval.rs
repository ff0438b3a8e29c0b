//! JSON evaluation report.
//!
//! With a truth (from `--truth` or embedded in the dataset): baseline, kernel and
//! step-prediction relative errors in l1, l2 and linf. Always: the mean negative
//! log-likelihood of the parameters on the data. With `--target-node`: TPR, TNR and
//! balanced accuracy of the per-step event probabilities at that node.

use serde::Serialize;
use tulik_core::io::DatasetFile;
use tulik_core::likelihood::{loglik_network, loglik_unit};
use tulik_core::predict::{
    classification_metrics, kernel_relative_errors, mu_relative_errors, prediction_relative_errors,
    step_probabilities_lenient, Classification, RelativeErrors,
};
use tulik_core::{Error, ModelParams};

use crate::error::{CliError, CliResult};
use crate::files::{check_matches, read_dataset, read_params, write_text};
use crate::EvalArgs;

#[derive(Debug, Serialize)]
struct Fit {
    /// Over trajectories where the likelihood is defined.
    mean_nll: Option<f64>,
    infeasible_trajectories: usize,
}

#[derive(Debug, Serialize)]
struct TruthMetrics {
    mu: RelativeErrors,
    kernel: RelativeErrors,
    prediction: RelativeErrors,
    /// Steps where the evaluated parameters had a nonpositive intensity.
    prediction_infeasible_steps: usize,
}

#[derive(Debug, Serialize)]
struct Targeted {
    node: usize,
    #[serde(flatten)]
    metrics: Classification,
}

#[derive(Debug, Serialize)]
struct Report {
    trajectories: usize,
    fit: Fit,
    truth: Option<TruthMetrics>,
    classification: Option<Targeted>,
}

fn fit(params: &ModelParams, data: &DatasetFile) -> CliResult<Fit> {
    let (mut sum, mut ok, mut bad) = (0.0, 0usize, 0usize);
    for traj in &data.trajectories {
        let ll = if params.nodes() == 1 { loglik_unit(params, traj) } else { loglik_network(params, traj) };
        match ll {
            Ok(v) => {
                sum -= v;
                ok += 1;
            }
            Err(Error::Infeasible { .. }) => bad += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Fit { mean_nll: (ok > 0).then(|| sum / ok as f64), infeasible_trajectories: bad })
}

/// Scores and labels of every observed step at `node`.
fn scored_steps(params: &ModelParams, data: &DatasetFile, node: usize) -> CliResult<(Vec<f64>, Vec<bool>)> {
    let v = data.nodes;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for traj in &data.trajectories {
        let (p, _) = step_probabilities_lenient(params, traj)?;
        for t in 1..=data.grid.n() as i64 {
            scores.push(p[(t as usize - 1) * v + node].clamp(0.0, 1.0));
            labels.push(traj.y(t, node) == 1);
        }
    }
    Ok((scores, labels))
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let params = read_params(&args.params)?;
    let data = read_dataset(&args.data)?;
    check_matches(&params, &data, "parameters")?;
    let truth = match &args.truth {
        Some(path) => Some(read_params(path)?),
        None => data.truth.clone(),
    };
    let truth_metrics = match &truth {
        Some(t) => {
            check_matches(t, &data, "truth")?;
            let pred = prediction_relative_errors(&params, t, &data.trajectories)?;
            Some(TruthMetrics {
                mu: mu_relative_errors(&params, t)?,
                kernel: kernel_relative_errors(params.kernel(), t.kernel())?,
                prediction: pred.errors,
                prediction_infeasible_steps: pred.infeasible_steps,
            })
        }
        None => None,
    };
    let classification = match args.target_node {
        Some(node) => {
            if node >= data.nodes {
                return Err(CliError::usage(format!("--target-node {node} out of range for {} nodes", data.nodes)));
            }
            let (scores, labels) = scored_steps(&params, &data, node)?;
            let metrics = match &args.validation {
                Some(path) => {
                    let val = read_dataset(path)?;
                    check_matches(&params, &val, "parameters")?;
                    let (vs, vl) = scored_steps(&params, &val, node)?;
                    classification_metrics(&vs, &vl, &scores, &labels)?
                }
                None => classification_metrics(&scores, &labels, &scores, &labels)?,
            };
            Some(Targeted { node, metrics })
        }
        None => None,
    };
    let report = Report {
        trajectories: data.trajectories.len(),
        fit: fit(&params, &data)?,
        truth: truth_metrics,
        classification,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::data(e.to_string()))?;
    write_text(&args.out, &(text + "\n"))
}
