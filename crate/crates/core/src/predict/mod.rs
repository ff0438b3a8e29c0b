//! Interval and per-step event probabilities, relative errors and classification rates.

mod classify;
mod interval;
mod metrics;
mod step;

pub use classify::{classification_metrics, confusion_at, select_threshold, Classification};
pub use interval::{
    no_event_probability, predict_interval_network, predict_interval_nodes, predict_interval_time_only,
};
pub use metrics::{
    kernel_relative_errors, mu_relative_errors, prediction_relative_errors, relative_error, relative_errors,
    select_truncation, Norm, PredictionErrors, RelativeErrors, TruncationChoice,
};
pub use step::{step_probabilities, step_probabilities_lenient};
