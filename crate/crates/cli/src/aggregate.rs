//! Mean and sample standard deviation of each numeric field across eval outputs.
//!
//! Output: `{"runs": n, "metrics": {"truth.kernel.l2": {"mean": .., "std": ..}, ..}}`,
//! keyed by the dotted path of the field. Every input must carry the same numeric fields.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::files::write_text;
use crate::AggregateArgs;

#[derive(Debug, Serialize)]
struct Summary {
    mean: f64,
    std: f64,
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, f64>) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                out.insert(prefix.to_string(), x);
            }
        }
        Value::Object(map) => {
            for (k, child) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&path, child, out);
            }
        }
        _ => {}
    }
}

pub fn run(args: &AggregateArgs) -> CliResult<()> {
    let mut runs: Vec<BTreeMap<String, f64>> = Vec::new();
    for path in &args.inputs {
        let ctx = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).context(&ctx))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::data(e.to_string()).context(&ctx))?;
        let mut fields = BTreeMap::new();
        flatten("", &v, &mut fields);
        if let Some(first) = runs.first() {
            if !first.keys().eq(fields.keys()) {
                return Err(CliError::data("numeric fields differ from the first input").context(&ctx));
            }
        }
        runs.push(fields);
    }
    let n = runs.len() as f64;
    let metrics: BTreeMap<&String, Summary> = runs[0]
        .keys()
        .map(|k| {
            let xs: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (k, Summary { mean, std: var.sqrt() })
        })
        .collect();
    let out = serde_json::json!({ "runs": runs.len(), "metrics": metrics });
    let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::data(e.to_string()))?;
    write_text(&args.out, &(text + "\n"))
}
