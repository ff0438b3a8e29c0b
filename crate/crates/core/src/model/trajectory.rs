use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::error::{invalid, Result};

/// One event: the interval index it falls in and the node it occurred at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub time: i64,
    pub node: usize,
}

/// Binary event record `y(t, u)` over the extended grid.
///
/// Stored sparsely as the time-sorted list of events. At most one event
/// per interval is allowed, across all nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    nodes: usize,
    events: Vec<Event>,
}

impl Trajectory {
    /// Builds a trajectory from events in any order.
    pub fn from_events(grid: TimeGrid, nodes: usize, mut events: Vec<Event>) -> Result<Self> {
        if nodes == 0 {
            return Err(invalid("node count must be positive"));
        }
        events.sort();
        for e in &events {
            if !grid.contains(e.time) {
                return Err(invalid(format!(
                    "event time {} outside {}..={}",
                    e.time,
                    grid.first_index(),
                    grid.last_index()
                )));
            }
            if e.node >= nodes {
                return Err(invalid(format!("event node {} >= node count {nodes}", e.node)));
            }
        }
        if let Some(w) = events.windows(2).find(|w| w[0].time == w[1].time) {
            return Err(invalid(format!("more than one event in interval {}", w[0].time)));
        }
        Ok(Self { grid, nodes, events })
    }

    /// Builds a time-only (single node) trajectory from `N + N'` binary values
    /// ordered from index `-N'+1` to `N`.
    pub fn from_binary(grid: TimeGrid, y: &[u8]) -> Result<Self> {
        Self::from_dense(grid, 1, y)
    }

    /// Builds from a dense row-major `(N+N') x V` 0/1 matrix.
    pub fn from_dense(grid: TimeGrid, nodes: usize, y: &[u8]) -> Result<Self> {
        if nodes == 0 {
            return Err(invalid("node count must be positive"));
        }
        if y.len() != grid.extended_len() * nodes {
            return Err(invalid(format!(
                "dense trajectory has {} entries, expected {}",
                y.len(),
                grid.extended_len() * nodes
            )));
        }
        let mut events = Vec::new();
        for (k, &v) in y.iter().enumerate() {
            match v {
                0 => {}
                1 => events.push(Event { time: grid.index_of_slot(k / nodes), node: k % nodes }),
                other => return Err(invalid(format!("non-binary entry {other}"))),
            }
        }
        Self::from_events(grid, nodes, events)
    }

    /// Empty trajectory.
    pub fn empty(grid: TimeGrid, nodes: usize) -> Self {
        Self { grid, nodes, events: Vec::new() }
    }

    pub(crate) fn from_sorted_unchecked(grid: TimeGrid, nodes: usize, events: Vec<Event>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].time < w[1].time));
        Self { grid, nodes, events }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Events with time in `lo..=hi`.
    pub fn events_between(&self, lo: i64, hi: i64) -> &[Event] {
        let start = self.events.partition_point(|e| e.time < lo);
        let end = self.events.partition_point(|e| e.time <= hi);
        &self.events[start..end.max(start)]
    }

    /// Events inside the memory window of step `t`: times `t-N'..=t-1`.
    pub fn history_window(&self, t: i64) -> &[Event] {
        self.events_between(t - self.grid.memory() as i64, t - 1)
    }

    /// Node that fired at `t`, if any.
    pub fn event_at(&self, t: i64) -> Option<usize> {
        self.events.binary_search_by_key(&t, |e| e.time).ok().map(|k| self.events[k].node)
    }

    /// `y(t, u)`.
    pub fn y(&self, t: i64, node: usize) -> u8 {
        u8::from(self.event_at(t) == Some(node))
    }

    /// `ybar(t) = sum_u y(t, u)`.
    pub fn any_event(&self, t: i64) -> u8 {
        u8::from(self.event_at(t).is_some())
    }

    /// Number of events in the observation range `1..=N` at each node.
    pub fn observed_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nodes];
        for e in self.events_between(1, self.grid.last_index()) {
            counts[e.node] += 1;
        }
        counts
    }

    /// Dense row-major `(N+N') x V` matrix of 0/1 values.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut y = vec![0u8; self.grid.extended_len() * self.nodes];
        for e in &self.events {
            y[self.grid.slot(e.time) * self.nodes + e.node] = 1;
        }
        y
    }

    /// Copy keeping only events at or before `t`.
    pub fn truncated_after(&self, t: i64) -> Trajectory {
        let end = self.events.partition_point(|e| e.time <= t);
        Self { grid: self.grid, nodes: self.nodes, events: self.events[..end].to_vec() }
    }

    /// Copy with an event added (replacing nothing; fails if `t` is occupied).
    pub fn with_event(&self, time: i64, node: usize) -> Result<Trajectory> {
        let mut events = self.events.clone();
        events.push(Event { time, node });
        Self::from_events(self.grid, self.nodes, events)
    }
}
