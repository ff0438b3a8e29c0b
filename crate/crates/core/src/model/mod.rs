//! Grids, trajectories, kernels, parameters and conditional intensities.

mod discretize;
mod grid;
mod intensity;
mod kernel;
mod params;
mod trajectory;

pub use discretize::{discretize_kernel, discretize_lag_kernel, QUADRATURE_ORDER};
pub use grid::TimeGrid;
pub use intensity::{excitation, history_vector, intensity, intensity_record, IntensityRecord};
pub use kernel::{CellKind, KernelCoord, KernelParams, KernelTensor, LagKernel};
pub use params::ModelParams;
pub use trajectory::{Event, Trajectory};

pub(crate) use intensity::{check_compatible, excitation_unchecked, for_each_target, intensity_record_unchecked};
