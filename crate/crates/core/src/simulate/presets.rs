use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::kernels::{benchmark_kernel_network, benchmark_kernel_time_only, stationary_kernel, EdgeSpec};
use super::trajectory_rng;
use crate::error::{Error, Result};
use crate::model::{discretize_kernel, discretize_lag_kernel, ModelParams, TimeGrid};

/// Directed edges `(from, to)` of the five-node benchmark graph.
pub const PRESET_EDGES: [(usize, usize); 8] = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (2, 4), (3, 1)];

/// Stream reserved for sampling per-dataset truth, distinct from trajectory streams.
const TRUTH_STREAM: u64 = u64::MAX;

/// Benchmark settings with fixed grid and ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `N = 32`, `N' = 8`, `h = 0.5`, `mu = 0.2`.
    TimeOnlySmall,
    /// `N = 320`, `N' = 80`, `h = 0.05`, `mu = 0.2`.
    TimeOnlyLarge,
    /// Time-invariant kernel, `N = 32`, `N' = 16`, `h = 0.25`, `mu = 0.2`.
    Stationary,
    /// Five nodes, eight edges, `N = 32`, `N' = 8`, `h = 0.1`.
    Network,
}

/// Ground truth of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetTruth {
    pub params: ModelParams,
    /// Edge parameters; empty for single-node presets.
    pub edges: Vec<EdgeSpec>,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Self::TimeOnlySmall, Self::TimeOnlyLarge, Self::Stationary, Self::Network];

    pub fn name(&self) -> &'static str {
        match self {
            Self::TimeOnlySmall => "paper-timeonly-small",
            Self::TimeOnlyLarge => "paper-timeonly-large",
            Self::Stationary => "paper-stationary",
            Self::Network => "paper-network",
        }
    }

    pub fn grid(&self) -> TimeGrid {
        let (h, n, m) = match self {
            Self::TimeOnlySmall => (0.5, 32, 8),
            Self::TimeOnlyLarge => (0.05, 320, 80),
            Self::Stationary => (0.25, 32, 16),
            Self::Network => (0.1, 32, 8),
        };
        TimeGrid::new(h, n, m).expect("preset grids are valid")
    }

    pub fn nodes(&self) -> usize {
        match self {
            Self::Network => 5,
            _ => 1,
        }
    }

    /// Ground truth. Only the network preset depends on `seed`, which draws its
    /// edge frequencies, shifts and baselines.
    pub fn truth(&self, seed: u64) -> Result<PresetTruth> {
        let grid = self.grid();
        match self {
            Self::TimeOnlySmall | Self::TimeOnlyLarge => {
                let kernel = discretize_kernel(|a, b, _, _| benchmark_kernel_time_only(a, b), grid, 1)?;
                Ok(PresetTruth { params: ModelParams::new(vec![0.2], kernel)?, edges: Vec::new() })
            }
            Self::Stationary => {
                let kernel = discretize_lag_kernel(|tau, _, _| stationary_kernel(tau), grid, 1)?;
                Ok(PresetTruth { params: ModelParams::new(vec![0.2], kernel)?, edges: Vec::new() })
            }
            Self::Network => {
                let mut rng = trajectory_rng(seed, TRUTH_STREAM);
                let edges: Vec<EdgeSpec> = PRESET_EDGES
                    .iter()
                    .map(|&(from, to)| EdgeSpec {
                        from,
                        to,
                        omega: rng.gen_range(2.0..6.0),
                        shift: rng.gen_range(0.0..0.2),
                    })
                    .collect();
                let mu: Vec<f64> = (0..5).map(|_| rng.gen_range(0.25..0.35)).collect();
                let kernel =
                    discretize_kernel(|a, b, from, to| benchmark_kernel_network(a, b, from, to, &edges), grid, 5)?;
                Ok(PresetTruth { params: ModelParams::new(mu, kernel)?, edges })
            }
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {s:?}")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
