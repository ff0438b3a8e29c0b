use std::fs::File;
use std::io::BufWriter;

use tulik_core::inference::{train, Method, TrainConfig};
use tulik_core::io::{load_config, write_report};
use tulik_core::Error;

use crate::error::{CliError, CliResult};
use crate::files::{read_dataset, write_params};
use crate::TrainArgs;

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let data = read_dataset(&args.data)?;
    let method = args.method.map(Method::from);
    let config = match &args.config {
        Some(path) => load_config(path, method).map_err(|e| CliError::from(e).context(&path.display().to_string()))?,
        None => TrainConfig::time_only_small(method.unwrap_or(Method::Vi)),
    };
    let fit = train(&config, &data.trajectories, None).map_err(|e| match e {
        // the configuration cannot be applied to this dataset
        Error::InvalidArgument(m) => CliError::data(format!("configuration does not fit the dataset: {m}")),
        other => other.into(),
    })?;
    write_params(&args.out, &fit.final_params)?;
    if let Some(path) = &args.report {
        let ctx = path.display().to_string();
        let file = File::create(path).map_err(|e| CliError::from(e).context(&ctx))?;
        let mut w = BufWriter::new(file);
        write_report(&mut w, &fit, &config).map_err(|e| CliError::from(e).context(&ctx))?;
        std::io::Write::flush(&mut w).map_err(|e| CliError::from(e).context(&ctx))?;
    }
    Ok(())
}
