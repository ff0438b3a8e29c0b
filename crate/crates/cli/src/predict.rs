//! CSV output. Step mode: `trajectory,t,node,probability,error`. Interval mode:
//! `trajectory,node,probability,error`, with one row per node plus a `none` row
//! for no event in the window; those rows sum to 1 per trajectory.
//!
//! A trajectory on which the parameters are infeasible gets a single row with
//! empty value columns and the error message.

use std::fs::File;

use tulik_core::model::Trajectory;
use tulik_core::predict::{
    no_event_probability, predict_interval_nodes, predict_interval_time_only, step_probabilities,
};
use tulik_core::{Error, ModelParams};

use crate::error::{CliError, CliResult};
use crate::files::{check_matches, read_dataset, read_params};
use crate::{Mode, PredictArgs};

type Row = Vec<String>;

fn error_row(m: usize, blanks: usize, e: &Error) -> Row {
    let mut row = vec![m.to_string()];
    row.extend(std::iter::repeat_n(String::new(), blanks));
    row.push(e.to_string());
    row
}

fn step_rows(params: &ModelParams, m: usize, traj: &Trajectory) -> CliResult<Vec<Row>> {
    let v = traj.nodes();
    match step_probabilities(params, traj) {
        Ok(p) => Ok(p
            .iter()
            .enumerate()
            .map(|(k, q)| {
                vec![m.to_string(), (k / v + 1).to_string(), (k % v).to_string(), q.to_string(), String::new()]
            })
            .collect()),
        Err(e @ Error::Infeasible { .. }) => Ok(vec![error_row(m, 3, &e)]),
        Err(e) => Err(e.into()),
    }
}

fn interval_probs(params: &ModelParams, traj: &Trajectory, from: i64, to: i64) -> tulik_core::Result<(Vec<f64>, f64)> {
    let nodes = if traj.nodes() == 1 {
        vec![predict_interval_time_only(params, traj, from, from, to)?]
    } else {
        predict_interval_nodes(params, traj, from, from, to)?
    };
    Ok((nodes, no_event_probability(params, traj, from, to)?))
}

fn interval_rows(params: &ModelParams, m: usize, traj: &Trajectory, args: &PredictArgs) -> CliResult<Vec<Row>> {
    let (from, to) = (args.from.expect("clap requires --from"), args.to.expect("clap requires --to"));
    match interval_probs(params, traj, from, to) {
        Ok((nodes, none)) => {
            let row = |node: String, p: f64| vec![m.to_string(), node, p.to_string(), String::new()];
            Ok(match args.node {
                Some(u) => vec![row(u.to_string(), nodes[u])],
                None => {
                    let mut rows: Vec<Row> = nodes.iter().enumerate().map(|(u, p)| row(u.to_string(), *p)).collect();
                    rows.push(row("none".into(), none));
                    rows
                }
            })
        }
        Err(e @ Error::Infeasible { .. }) => Ok(vec![error_row(m, 2, &e)]),
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &PredictArgs) -> CliResult<()> {
    let params = read_params(&args.params)?;
    let data = read_dataset(&args.data)?;
    check_matches(&params, &data, "parameters")?;
    if let Some(u) = args.node {
        if u >= data.nodes {
            return Err(CliError::usage(format!("--node {u} out of range for {} nodes", data.nodes)));
        }
    }
    if args.mode == Mode::Interval {
        let (from, to) = (args.from.unwrap_or(0), args.to.unwrap_or(0));
        if !(0 <= from && from < to && to <= data.grid.n() as i64) {
            return Err(CliError::usage(format!(
                "interval needs 0 <= --from < --to <= N = {}, got {from} and {to}",
                data.grid.n()
            )));
        }
    }
    let ctx = args.out.display().to_string();
    let file = File::create(&args.out).map_err(|e| CliError::from(e).context(&ctx))?;
    let mut w = csv::Writer::from_writer(file);
    let header: &[&str] = match args.mode {
        Mode::Step => &["trajectory", "t", "node", "probability", "error"],
        Mode::Interval => &["trajectory", "node", "probability", "error"],
    };
    let io = |e: csv::Error| CliError::usage(e.to_string()).context(&ctx);
    w.write_record(header).map_err(io)?;
    for (m, traj) in data.trajectories.iter().enumerate() {
        let rows = match args.mode {
            Mode::Step => step_rows(&params, m, traj)?,
            Mode::Interval => interval_rows(&params, m, traj, args)?,
        };
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::from(e).context(&ctx))
}
