use crate::error::{invalid, Error, Result};
use crate::likelihood::link_phi;
use crate::model::{check_compatible, intensity_record_unchecked, IntensityRecord, ModelParams, Trajectory};

/// Intensities on the history cut after `last`, with every later step event-free.
fn continuation(params: &ModelParams, history: &Trajectory, last: i64, to: i64) -> Result<IntensityRecord> {
    check_compatible(params.kernel(), history)?;
    let n = history.grid().last_index();
    if last < 0 || to > n {
        return Err(invalid(format!(
            "prediction indices must satisfy 0 <= last event ({last}) and window end ({to}) <= N = {n}"
        )));
    }
    let rec = intensity_record_unchecked(params, &history.truncated_after(last));
    for t in last + 1..=to {
        for (u, &l) in rec.row(t).iter().enumerate() {
            if !(l > 0.0) {
                return Err(Error::Infeasible { t, node: u, intensity: l });
            }
        }
    }
    Ok(rec)
}

fn check_window(last: i64, j_l: i64, j_r: i64) -> Result<()> {
    if !(j_r > j_l && j_l >= last) {
        return Err(invalid(format!("window needs j_r > j_l >= last event, got last={last}, j_l={j_l}, j_r={j_r}")));
    }
    Ok(())
}

fn bar_sum(rec: &IntensityRecord, lo: i64, hi: i64) -> f64 {
    (lo..=hi).map(|t| rec.bar(t)).sum()
}

/// `Pr[no event in steps last+1..=j]` given the last event at step `last`.
pub fn no_event_probability(params: &ModelParams, history: &Trajectory, last: i64, j: i64) -> Result<f64> {
    if j < last {
        return Err(invalid(format!("horizon {j} precedes last event {last}")));
    }
    let rec = continuation(params, history, last, j)?;
    Ok((-history.grid().h() * bar_sum(&rec, last + 1, j)).exp())
}

/// `Pr[next event falls in steps j_l+1..=j_r]` given the last event at step `last`
/// (single node). Events of `history` after `last` are ignored.
pub fn predict_interval_time_only(
    params: &ModelParams,
    history: &Trajectory,
    last: i64,
    j_l: i64,
    j_r: i64,
) -> Result<f64> {
    if history.nodes() != 1 {
        return Err(invalid(format!("time-only prediction needs one node, got {}", history.nodes())));
    }
    check_window(last, j_l, j_r)?;
    let rec = continuation(params, history, last, j_r)?;
    let h = history.grid().h();
    let survive = (-h * bar_sum(&rec, last + 1, j_l)).exp();
    Ok(survive * link_phi(h * bar_sum(&rec, j_l + 1, j_r)))
}

/// Per-node probabilities that the next event falls in steps `j_l+1..=j_r` at that node.
pub fn predict_interval_nodes(
    params: &ModelParams,
    history: &Trajectory,
    last: i64,
    j_l: i64,
    j_r: i64,
) -> Result<Vec<f64>> {
    check_window(last, j_l, j_r)?;
    let rec = continuation(params, history, last, j_r)?;
    let h = history.grid().h();
    let mut cum = bar_sum(&rec, last + 1, j_l);
    let mut out = vec![0.0; history.nodes()];
    for j in j_l + 1..=j_r {
        let bar = rec.bar(j);
        let first = link_phi(h * bar) * (-h * cum).exp();
        for (o, l) in out.iter_mut().zip(rec.row(j)) {
            *o += l / bar * first;
        }
        cum += bar;
    }
    Ok(out)
}

/// `Pr[next event falls in steps j_l+1..=j_r and occurs at node u]`.
pub fn predict_interval_network(
    params: &ModelParams,
    history: &Trajectory,
    last: i64,
    j_l: i64,
    j_r: i64,
    u: usize,
) -> Result<f64> {
    if u >= history.nodes() {
        return Err(invalid(format!("node {u} out of range for {} nodes", history.nodes())));
    }
    Ok(predict_interval_nodes(params, history, last, j_l, j_r)?[u])
}
