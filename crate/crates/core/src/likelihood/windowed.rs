use super::log_link_phi;
use crate::error::{invalid, Error, Result};
use crate::model::{KernelParams, ModelParams, TimeGrid};

/// Non-overlapping uncertainty windows `t_l..=t_r` inside `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedEvents {
    grid: TimeGrid,
    windows: Vec<(i64, i64)>,
}

impl WindowedEvents {
    pub fn new(grid: TimeGrid, windows: Vec<(i64, i64)>) -> Result<Self> {
        for &(l, r) in &windows {
            if l < 1 || r < l || r > grid.last_index() {
                return Err(invalid(format!("window ({l}, {r}) outside 1..={}", grid.n())));
            }
        }
        if let Some(w) = windows.windows(2).find(|w| w[0].1 >= w[1].0) {
            return Err(invalid(format!(
                "windows ({}, {}) and ({}, {}) overlap or are out of order",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(Self { grid, windows })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn windows(&self) -> &[(i64, i64)] {
        &self.windows
    }
}

/// Log-likelihood with each event's time known only up to its window.
///
/// An event influences step `j` once its whole window precedes `j`, spreading
/// its weight evenly over the window's intervals.
pub fn loglik_windowed(params: &ModelParams, events: &WindowedEvents) -> Result<f64> {
    let KernelParams::TimeVarying(k) = params.kernel() else {
        return Err(invalid("windowed likelihood needs a time-varying kernel"));
    };
    if params.nodes() != 1 {
        return Err(invalid("windowed likelihood is defined for a single node"));
    }
    if k.grid() != events.grid() {
        return Err(invalid("kernel grid does not match window grid"));
    }
    let grid = events.grid();
    let h = grid.h();
    let n = grid.n();
    let mut lambda = vec![params.mu()[0]; n];
    for (j, lam) in (1..=n as i64).zip(lambda.iter_mut()) {
        for &(l, r) in events.windows().iter().take_while(|w| w.1 < j) {
            let width = (r - l + 1) as f64;
            let s: f64 = (l..=r).map(|i| k.k(i, j, 0, 0)).sum();
            *lam += s / width;
        }
    }
    let mut ll = -h * lambda.iter().sum::<f64>();
    for &(l, r) in events.windows() {
        let x = h * lambda[(l - 1) as usize..r as usize].iter().sum::<f64>();
        if !(x > 0.0) {
            return Err(Error::Infeasible { t: l, node: 0, intensity: x / h });
        }
        // ln(e^x - 1) = x + ln(1 - e^-x)
        ll += x + log_link_phi(x);
    }
    Ok(ll)
}
