use std::path::Path;

use tulik_core::io::{load_params, save_params, DatasetFile};
use tulik_core::ModelParams;

use crate::error::{CliError, CliResult};

fn at(path: &Path) -> String {
    path.display().to_string()
}

pub fn read_dataset(path: &Path) -> CliResult<DatasetFile> {
    DatasetFile::load(path).map_err(|e| CliError::from(e).context(&at(path)))
}

pub fn write_dataset(path: &Path, data: &DatasetFile) -> CliResult<()> {
    data.save(path).map_err(|e| CliError::from(e).context(&at(path)))
}

pub fn read_params(path: &Path) -> CliResult<ModelParams> {
    load_params(path).map_err(|e| CliError::from(e).context(&at(path)))
}

pub fn write_params(path: &Path, params: &ModelParams) -> CliResult<()> {
    save_params(path, params).map_err(|e| CliError::from(e).context(&at(path)))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::from(e).context(&at(path)))
}

/// Parameters and data must share the grid and node count.
pub fn check_matches(params: &ModelParams, data: &DatasetFile, what: &str) -> CliResult<()> {
    if *params.grid() != data.grid || params.nodes() != data.nodes {
        return Err(CliError::data(format!(
            "{what} (grid {:?}, {} nodes) does not match the dataset (grid {:?}, {} nodes)",
            params.grid(),
            params.nodes(),
            data.grid,
            data.nodes
        )));
    }
    Ok(())
}
