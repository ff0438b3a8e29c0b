use crate::model::{CellKind, KernelParams};

/// Calls `f(a, b)` for every neighbouring pair of trainable offsets.
///
/// Time-varying kernels pair `(i, l)` with `(i+1, l)` and `(i, l+1)` per node
/// pair; a time-invariant kernel pairs consecutive lags only.
fn for_each_edge(kernel: &KernelParams, mut f: impl FnMut(usize, usize)) {
    let v = kernel.nodes();
    let memory = kernel.grid().memory();
    match kernel {
        KernelParams::TimeVarying(k) => {
            let stored = |i: i64, l: usize| {
                i >= k.first_row()
                    && i <= k.last_row()
                    && l >= 1
                    && l <= memory
                    && k.cell_kind(i, l) == CellKind::Stored
            };
            for i in k.first_row()..=k.last_row() {
                for l in 1..=memory {
                    if !stored(i, l) {
                        continue;
                    }
                    let here = k.offset(i, l, 0);
                    let down = stored(i + 1, l).then(|| k.offset(i + 1, l, 0));
                    let right = stored(i, l + 1).then(|| k.offset(i, l + 1, 0));
                    for other in [down, right].into_iter().flatten() {
                        for p in 0..v * v {
                            f(here + p, other + p);
                        }
                    }
                }
            }
        }
        KernelParams::TimeInvariant(k) => {
            for l in 1..memory {
                let (a, b) = (k.offset(l, 0), k.offset(l + 1, 0));
                for p in 0..v * v {
                    f(a + p, b + p);
                }
            }
        }
    }
}

/// `S = (1 / 2h^2) * sum over neighbouring pairs of squared differences`.
pub fn smoothness_penalty(kernel: &KernelParams, h: f64) -> f64 {
    let x = kernel.values();
    let mut s = 0.0;
    for_each_edge(kernel, |a, b| s += (x[a] - x[b]).powi(2));
    s / (2.0 * h * h)
}

/// Exact gradient of [`smoothness_penalty`].
pub fn smoothness_gradient(kernel: &KernelParams, h: f64) -> KernelParams {
    let x = kernel.values();
    let mut g = kernel.zeros_like();
    let out = g.values_mut();
    let c = 1.0 / (h * h);
    for_each_edge(kernel, |a, b| {
        let d = c * (x[a] - x[b]);
        out[a] += d;
        out[b] -= d;
    });
    g
}

/// Proximal step `argmin_x |x - theta|^2 / 2 + weight * S(x)`, i.e. the solution of
/// `(I + weight * H) x = theta` with `H` the Hessian of [`smoothness_penalty`].
///
/// Stable for any `weight >= 0`, unlike `theta - weight * grad S(theta)`, which
/// diverges once `weight * lambda_max(H) > 2`. Solved by conjugate gradients.
pub fn smoothness_prox(kernel: &KernelParams, h: f64, weight: f64) -> KernelParams {
    let apply = |x: &KernelParams| {
        let mut y = smoothness_gradient(x, h);
        y.scale(weight);
        y.axpy(1.0, x);
        y
    };
    let b = kernel.clone();
    let mut x = kernel.clone();
    let mut r = b.clone();
    r.axpy(-1.0, &apply(&x));
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let stop = 1e-28 * b.dot(&b).max(f64::MIN_POSITIVE);
    for _ in 0..10 * b.values().len().max(1) {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        let next = r.dot(&r);
        p.scale(next / rr);
        p.axpy(1.0, &r);
        rr = next;
    }
    x
}
