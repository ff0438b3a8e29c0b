//! Discrete-time point processes with event-time uncertainty.
//!
//! Events live on an evenly spaced grid with at most one event per interval.
//! The crate simulates such data, recovers the influence kernel and baseline
//! by stochastic variational-inequality or gradient updates, and predicts
//! event probabilities over future intervals.

// `!(x > 0.0)` is deliberate throughout: NaN must fail positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inference;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod predict;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{
    discretize_kernel, discretize_lag_kernel, history_vector, intensity, intensity_record, Event, IntensityRecord,
    KernelCoord, KernelParams, KernelTensor, LagKernel, ModelParams, TimeGrid, Trajectory,
};
