//! Dataset, parameter, configuration and report files.

mod config;
mod dataset;
mod params;
mod report;

pub use config::{config_from_str, config_to_string, load_config, preset_config};
pub use dataset::{pack_into, unpack, DatasetFile, DATASET_MAGIC};
pub use params::{load_params, params_from_str, params_to_string, save_params};
pub use report::{read_report, report_lines, write_report, ReportLine};
