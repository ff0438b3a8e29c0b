use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Evenly spaced time grid with a pre-horizon memory window.
///
/// Interval `I_j = ((j-1)h, jh]`. Observation intervals are `1..=n`; the
/// extended range `-memory+1..=n` also holds pre-horizon history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    h: f64,
    n: usize,
    memory: usize,
}

impl TimeGrid {
    pub fn new(h: f64, n: usize, memory: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("interval length must be positive, got {h}")));
        }
        if n == 0 || memory == 0 {
            return Err(invalid(format!("grid needs n >= 1 and memory >= 1, got n={n}, memory={memory}")));
        }
        Ok(Self { h, n, memory })
    }

    /// Interval length.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of observation intervals `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Memory length `N'` in intervals.
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn horizon(&self) -> f64 {
        self.h * self.n as f64
    }

    pub fn max_lag(&self) -> f64 {
        self.h * self.memory as f64
    }

    /// Earliest stored index, `-N'+1`.
    pub fn first_index(&self) -> i64 {
        1 - self.memory as i64
    }

    pub fn last_index(&self) -> i64 {
        self.n as i64
    }

    /// Number of stored steps, `N + N'`.
    pub fn extended_len(&self) -> usize {
        self.n + self.memory
    }

    /// Zero-based storage slot of an extended index.
    pub fn slot(&self, t: i64) -> usize {
        debug_assert!(self.contains(t));
        (t - self.first_index()) as usize
    }

    pub fn index_of_slot(&self, slot: usize) -> i64 {
        slot as i64 + self.first_index()
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.first_index() && t <= self.last_index()
    }

    pub fn is_observed(&self, t: i64) -> bool {
        t >= 1 && t <= self.last_index()
    }

    /// Left endpoint of interval `I_t`.
    pub fn interval_start(&self, t: i64) -> f64 {
        (t - 1) as f64 * self.h
    }
}
