use super::grid::TimeGrid;
use super::kernel::KernelParams;
use crate::error::{invalid, Result};

/// Baseline intensity per node bundled with the influence kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    mu: Vec<f64>,
    kernel: KernelParams,
}

impl ModelParams {
    pub fn new(mu: Vec<f64>, kernel: KernelParams) -> Result<Self> {
        check_mu(&mu, kernel.nodes())?;
        Ok(Self { mu, kernel })
    }

    /// Zero kernel of the requested form with constant baseline.
    pub fn zero_kernel(grid: TimeGrid, nodes: usize, mu: f64, time_invariant: bool) -> Result<Self> {
        let kernel = if time_invariant {
            KernelParams::zeros_time_invariant(grid, nodes)
        } else {
            KernelParams::zeros_time_varying(grid, nodes)
        };
        Self::new(vec![mu; nodes], kernel)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn kernel_mut(&mut self) -> &mut KernelParams {
        &mut self.kernel
    }

    pub fn set_mu(&mut self, mu: Vec<f64>) -> Result<()> {
        check_mu(&mu, self.kernel.nodes())?;
        self.mu = mu;
        Ok(())
    }

    pub fn grid(&self) -> &TimeGrid {
        self.kernel.grid()
    }

    pub fn nodes(&self) -> usize {
        self.kernel.nodes()
    }

    pub fn into_parts(self) -> (Vec<f64>, KernelParams) {
        (self.mu, self.kernel)
    }
}

fn check_mu(mu: &[f64], nodes: usize) -> Result<()> {
    if mu.len() != nodes {
        return Err(invalid(format!("baseline has {} entries for {nodes} nodes", mu.len())));
    }
    if let Some((u, m)) = mu.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
        return Err(invalid(format!("baseline must be positive and finite, mu[{u}] = {m}")));
    }
    Ok(())
}
