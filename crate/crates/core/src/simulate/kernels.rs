use serde::{Deserialize, Serialize};

/// Non-stationary single-node benchmark kernel, valid for `t > t'`.
pub fn benchmark_kernel_time_only(t_prev: f64, t: f64) -> f64 {
    let lag = t - t_prev;
    let phase = 1.3 * std::f64::consts::PI * (t_prev - 9.0) / 15.0;
    (1..=13)
        .map(|j| {
            let jf = j as f64;
            0.3 * 0.5f64.powi(j) * ((2.0 + phase * (jf + 1.0)).cos() + 0.6) * (-8.0 * (lag * jf).powi(2) / 25.0).exp()
        })
        .sum()
}

/// Directed edge of the network benchmark with its temporal pattern parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub omega: f64,
    pub shift: f64,
}

/// Edge pattern `0.35 (cos(omega (t + 2)) + 0.75) exp(-20 (t - t' - shift)^2)`.
pub fn edge_kernel(t_prev: f64, t: f64, omega: f64, shift: f64) -> f64 {
    0.35 * ((omega * (t + 2.0)).cos() + 0.75) * (-20.0 * (t - t_prev - shift).powi(2)).exp()
}

/// Network benchmark kernel; zero for pairs that are not declared edges.
pub fn benchmark_kernel_network(t_prev: f64, t: f64, from: usize, to: usize, edges: &[EdgeSpec]) -> f64 {
    edges.iter().find(|e| e.from == from && e.to == to).map_or(0.0, |e| edge_kernel(t_prev, t, e.omega, e.shift))
}

/// Lag profile of the time-invariant benchmark: `0.4 e^-tau (cos(pi tau / 2) + 0.5)`.
pub fn stationary_kernel(tau: f64) -> f64 {
    0.4 * (-tau).exp() * ((std::f64::consts::FRAC_PI_2 * tau).cos() + 0.5)
}
