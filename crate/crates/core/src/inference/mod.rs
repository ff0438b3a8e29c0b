//! Stochastic fields, penalties, baseline solve, low-rank truncation and the training loop.

mod barrier;
mod baseline;
mod config;
mod fields;
mod lowrank;
mod smoothness;
mod train;

pub use barrier::{barrier_gradient, barrier_loss, barrier_slope, barrier_value, BarrierKind};
pub use baseline::{solve_mu_bisection, solve_mu_per_node, MU_CAP, MU_FLOOR, MU_TOL};
pub use config::{KernelForm, KernelInit, LrSchedule, Method, Reduction, SmoothnessStep, TrainConfig};
pub use fields::{field, gd_field, gd_field_network, stationary_fields, vi_field, vi_field_network};
pub use lowrank::{low_rank_truncate, middle_chunk};
pub use smoothness::{smoothness_gradient, smoothness_penalty, smoothness_prox};
pub use train::{empirical_baseline, project_box, train, FitMetadata, FitReport};
