use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::error::{invalid, Result};

/// A single kernel coordinate `K_{i,t}(from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KernelCoord {
    pub i: i64,
    pub t: i64,
    pub from: usize,
    pub to: usize,
}

impl KernelCoord {
    pub fn lag(&self) -> i64 {
        self.t - self.i
    }
}

/// Role of a `(source row, lag)` cell of the re-arranged kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// Target inside `1..=N`: a trainable parameter.
    Stored,
    /// Target at or before index 0: only used to generate pre-horizon history.
    WarmUp,
    /// Target after `N`: structurally zero.
    Absent,
}

/// Time-varying kernel in the re-arranged layout `Psi[i][l][from][to] = K_{i,i+l}(from,to)`.
///
/// Source rows are `i = -N'+1 ..= N-1` and lags `l = 1..=N'`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTensor {
    grid: TimeGrid,
    nodes: usize,
    data: Vec<f64>,
}

impl KernelTensor {
    pub fn zeros(grid: TimeGrid, nodes: usize) -> Self {
        let rows = grid.n() + grid.memory() - 1;
        Self { grid, nodes, data: vec![0.0; rows * grid.memory() * nodes * nodes] }
    }

    /// Builds a kernel from `f(i, t, from, to)` evaluated on stored and warm-up cells.
    pub fn from_fn(grid: TimeGrid, nodes: usize, mut f: impl FnMut(i64, i64, usize, usize) -> f64) -> Self {
        let mut k = Self::zeros(grid, nodes);
        for i in k.first_row()..=k.last_row() {
            for l in 1..=grid.memory() {
                if k.cell_kind(i, l) == CellKind::Absent {
                    continue;
                }
                for from in 0..nodes {
                    for to in 0..nodes {
                        let off = k.offset(i, l, from) + to;
                        k.data[off] = f(i, i + l as i64, from, to);
                    }
                }
            }
        }
        k
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn first_row(&self) -> i64 {
        self.grid.first_index()
    }

    pub fn last_row(&self) -> i64 {
        self.grid.last_index() - 1
    }

    pub fn rows(&self) -> usize {
        self.grid.n() + self.grid.memory() - 1
    }

    pub fn cell_kind(&self, i: i64, l: usize) -> CellKind {
        let t = i + l as i64;
        if t > self.grid.last_index() {
            CellKind::Absent
        } else if t >= 1 {
            CellKind::Stored
        } else {
            CellKind::WarmUp
        }
    }

    /// Start of the `to`-contiguous slice for `(i, l, from)`.
    pub fn offset(&self, i: i64, l: usize, from: usize) -> usize {
        debug_assert!(i >= self.first_row() && i <= self.last_row());
        debug_assert!(l >= 1 && l <= self.grid.memory());
        let row = (i - self.first_row()) as usize;
        ((row * self.grid.memory() + (l - 1)) * self.nodes + from) * self.nodes
    }

    /// `Psi_{i,l}(from, to)`; zero outside the index set.
    pub fn psi(&self, i: i64, l: usize, from: usize, to: usize) -> f64 {
        if l == 0 || l > self.grid.memory() || i < self.first_row() || i > self.last_row() {
            return 0.0;
        }
        if self.cell_kind(i, l) == CellKind::Absent {
            return 0.0;
        }
        self.data[self.offset(i, l, from) + to]
    }

    /// `K_{i,t}(from, to)`; zero outside the index set.
    pub fn k(&self, i: i64, t: i64, from: usize, to: usize) -> f64 {
        let lag = t - i;
        if lag < 1 {
            return 0.0;
        }
        self.psi(i, lag as usize, from, to)
    }

    /// Writes `K_{i,t}(from,to)`; rejects absent coordinates.
    pub fn set(&mut self, i: i64, t: i64, from: usize, to: usize, value: f64) -> Result<()> {
        let lag = t - i;
        if lag < 1
            || lag as usize > self.grid.memory()
            || i < self.first_row()
            || t > self.grid.last_index()
            || from >= self.nodes
            || to >= self.nodes
        {
            return Err(invalid(format!(
                "kernel coordinate (i={i}, t={t}, from={from}, to={to}) is outside the index set"
            )));
        }
        let off = self.offset(i, lag as usize, from) + to;
        self.data[off] = value;
        Ok(())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Offsets of all trainable entries in canonical `(i, l, from, to)` order.
    pub fn stored_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.grid.n() * self.grid.memory() * self.nodes * self.nodes);
        for i in self.first_row()..=self.last_row() {
            for l in 1..=self.grid.memory() {
                if self.cell_kind(i, l) != CellKind::Stored {
                    continue;
                }
                let base = self.offset(i, l, 0);
                out.extend(base..base + self.nodes * self.nodes);
            }
        }
        out
    }

    /// Zeroes every entry that is not trainable (warm-up cells included).
    pub fn retain_stored(&mut self) {
        let mut keep = vec![false; self.data.len()];
        for off in self.stored_offsets() {
            keep[off] = true;
        }
        for (v, k) in self.data.iter_mut().zip(keep) {
            if !k {
                *v = 0.0;
            }
        }
    }
}

/// Time-invariant kernel `psi_l(from, to)`, `l = 1..=N'`, with `K_{i,t} = psi_{t-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagKernel {
    grid: TimeGrid,
    nodes: usize,
    psi: Vec<f64>,
}

impl LagKernel {
    pub fn zeros(grid: TimeGrid, nodes: usize) -> Self {
        Self { grid, nodes, psi: vec![0.0; grid.memory() * nodes * nodes] }
    }

    /// Builds from lag-major values `psi[(l-1)][from][to]`.
    pub fn from_values(grid: TimeGrid, nodes: usize, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != grid.memory() * nodes * nodes {
            return Err(invalid(format!(
                "lag kernel needs {} values, got {}",
                grid.memory() * nodes * nodes,
                psi.len()
            )));
        }
        Ok(Self { grid, nodes, psi })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn offset(&self, l: usize, from: usize) -> usize {
        debug_assert!(l >= 1 && l <= self.grid.memory());
        ((l - 1) * self.nodes + from) * self.nodes
    }

    pub fn psi(&self, l: usize, from: usize, to: usize) -> f64 {
        if l == 0 || l > self.grid.memory() {
            return 0.0;
        }
        self.psi[self.offset(l, from) + to]
    }

    pub fn values(&self) -> &[f64] {
        &self.psi
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.psi
    }

    /// Copies `psi` along every diagonal, warm-up cells included.
    pub fn lift(&self) -> KernelTensor {
        KernelTensor::from_fn(self.grid, self.nodes, |i, t, from, to| self.psi((t - i) as usize, from, to))
    }
}

/// Trainable influence kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelParams {
    TimeVarying(KernelTensor),
    TimeInvariant(LagKernel),
}

impl KernelParams {
    pub fn zeros_time_varying(grid: TimeGrid, nodes: usize) -> Self {
        Self::TimeVarying(KernelTensor::zeros(grid, nodes))
    }

    pub fn zeros_time_invariant(grid: TimeGrid, nodes: usize) -> Self {
        Self::TimeInvariant(LagKernel::zeros(grid, nodes))
    }

    pub fn grid(&self) -> &TimeGrid {
        match self {
            Self::TimeVarying(k) => k.grid(),
            Self::TimeInvariant(k) => k.grid(),
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            Self::TimeVarying(k) => k.nodes(),
            Self::TimeInvariant(k) => k.nodes(),
        }
    }

    pub fn is_time_invariant(&self) -> bool {
        matches!(self, Self::TimeInvariant(_))
    }

    /// `K_{i,t}(from, to)`.
    pub fn weight(&self, i: i64, t: i64, from: usize, to: usize) -> f64 {
        match self {
            Self::TimeVarying(k) => k.k(i, t, from, to),
            Self::TimeInvariant(k) => {
                let lag = t - i;
                if lag < 1 || i < k.grid().first_index() || t > k.grid().last_index() {
                    0.0
                } else {
                    k.psi(lag as usize, from, to)
                }
            }
        }
    }

    /// Offset of the `to`-contiguous slice that an event at `(i, from)` feeds into lag `l`.
    ///
    /// Callers guarantee the cell is not absent.
    pub fn slice_offset(&self, i: i64, l: usize, from: usize) -> usize {
        match self {
            Self::TimeVarying(k) => k.offset(i, l, from),
            Self::TimeInvariant(k) => k.offset(l, from),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Self::TimeVarying(k) => k.data(),
            Self::TimeInvariant(k) => k.values(),
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match self {
            Self::TimeVarying(k) => k.data_mut(),
            Self::TimeInvariant(k) => k.values_mut(),
        }
    }

    /// Same variant and shape, all zeros.
    pub fn zeros_like(&self) -> Self {
        match self {
            Self::TimeVarying(k) => Self::zeros_time_varying(*k.grid(), k.nodes()),
            Self::TimeInvariant(k) => Self::zeros_time_invariant(*k.grid(), k.nodes()),
        }
    }

    /// Trainable values in canonical order: `(i, l, from, to)` or `(l, from, to)`.
    pub fn stored_values(&self) -> Vec<f64> {
        match self {
            Self::TimeVarying(k) => k.stored_offsets().into_iter().map(|o| k.data()[o]).collect(),
            Self::TimeInvariant(k) => k.values().to_vec(),
        }
    }

    /// Time-varying view; time-invariant kernels are copied along diagonals.
    pub fn to_time_varying(&self) -> KernelTensor {
        match self {
            Self::TimeVarying(k) => k.clone(),
            Self::TimeInvariant(k) => k.lift(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.is_time_invariant() == other.is_time_invariant()
            && self.grid() == other.grid()
            && self.nodes() == other.nodes()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.values_mut().iter_mut().zip(other.values()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in self.values_mut() {
            *v *= alpha;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.values().iter().zip(other.values()).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}
