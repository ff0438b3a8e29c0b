//! Line-delimited JSON training reports: one `epoch` record per epoch, then one `summary`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{FitMetadata, FitReport, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ReportLine {
    Epoch { epoch: usize, nll: f64, nll_stderr: f64, mu: Vec<f64>, violations: usize, mu_skips: usize },
    Summary { epochs: usize, truncation_rank: Option<usize>, metadata: FitMetadata, config: TrainConfig },
}

pub fn report_lines(report: &FitReport, config: &TrainConfig) -> Vec<ReportLine> {
    let mut lines: Vec<ReportLine> = (0..report.nll_per_epoch.len())
        .map(|k| ReportLine::Epoch {
            epoch: k + 1,
            nll: report.nll_per_epoch[k],
            nll_stderr: report.nll_stderr_per_epoch[k],
            mu: report.mu_trace[k].clone(),
            violations: report.violation_counts[k],
            mu_skips: report.mu_skips[k],
        })
        .collect();
    lines.push(ReportLine::Summary {
        epochs: report.nll_per_epoch.len(),
        truncation_rank: report.truncation_rank,
        metadata: report.metadata.clone(),
        config: config.clone(),
    });
    lines
}

pub fn write_report<W: Write>(w: &mut W, report: &FitReport, config: &TrainConfig) -> Result<()> {
    for line in report_lines(report, config) {
        serde_json::to_writer(&mut *w, &line).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_report<R: BufRead>(r: R) -> Result<Vec<ReportLine>> {
    r.lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(k, l)| serde_json::from_str(&l?).map_err(|e| Error::Format(format!("report line {}: {e}", k + 1))))
        .collect()
}
