use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::model::{CellKind, KernelParams, KernelTensor};

/// Tall matrix of the full rows `i = 0..=N-N'` of `Psi`, stacked over node pairs.
///
/// Row `p * R + i` holds `Psi_{i, 1..=N'}(from, to)` with `p = from * V + to`.
pub fn middle_chunk(kernel: &KernelTensor) -> Result<DMatrix<f64>> {
    let grid = kernel.grid();
    if grid.memory() > grid.n() {
        return Err(invalid(format!("no full rows: memory {} exceeds horizon {}", grid.memory(), grid.n())));
    }
    let rows = grid.n() - grid.memory() + 1;
    let v = kernel.nodes();
    let memory = grid.memory();
    let mut m = DMatrix::zeros(rows * v * v, memory);
    for from in 0..v {
        for to in 0..v {
            let p = from * v + to;
            for r in 0..rows {
                for l in 1..=memory {
                    m[(p * rows + r, l - 1)] = kernel.psi(r as i64, l, from, to);
                }
            }
        }
    }
    Ok(m)
}

/// Keeps the right singular directions of the middle chunk with singular value above `tau`.
///
/// Every row of `Psi` is replaced by its least-squares fit in the retained span,
/// using only its trainable lags; rows with all lags trainable become `row V V^T`.
/// Returns the truncated kernel and the retained rank.
pub fn low_rank_truncate(kernel: &KernelParams, tau: f64) -> Result<(KernelParams, usize)> {
    let KernelParams::TimeVarying(k) = kernel else {
        return Err(invalid("low-rank truncation needs a time-varying kernel"));
    };
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid(format!("singular value threshold must be positive, got {tau}")));
    }
    let chunk = middle_chunk(k)?;
    if !chunk.iter().all(|x| x.is_finite()) {
        return Err(Error::Numeric("kernel has non-finite entries".into()));
    }
    let svd = chunk.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&j| svd.singular_values[j] > tau).collect();
    let memory = k.grid().memory();
    let basis = DMatrix::from_fn(memory, keep.len(), |l, c| vt[(keep[c], l)]);
    let rank = keep.len();

    let mut out = k.clone();
    let v = k.nodes();
    for i in k.first_row()..=k.last_row() {
        let lags: Vec<usize> = (1..=memory).filter(|&l| k.cell_kind(i, l) == CellKind::Stored).collect();
        if lags.is_empty() {
            continue;
        }
        let projector = if rank == 0 {
            DMatrix::zeros(lags.len(), lags.len())
        } else {
            let a = DMatrix::from_fn(lags.len(), rank, |r, c| basis[(lags[r] - 1, c)]);
            let pinv =
                a.clone().pseudo_inverse(1e-12).map_err(|e| Error::Numeric(format!("pseudo-inverse failed: {e}")))?;
            a * pinv
        };
        for from in 0..v {
            for to in 0..v {
                let row = DVector::from_iterator(lags.len(), lags.iter().map(|&l| k.psi(i, l, from, to)));
                let fit = &projector * row;
                for (r, &l) in lags.iter().enumerate() {
                    let off = out.offset(i, l, from) + to;
                    out.data_mut()[off] = fit[r];
                }
            }
        }
    }
    Ok((KernelParams::TimeVarying(out), rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LagKernel, TimeGrid};

    #[test]
    fn rank_one_lift_is_fixed() {
        let g = TimeGrid::new(0.5, 10, 4).unwrap();
        let lag = LagKernel::from_values(g, 1, vec![0.5, -0.2, 0.1, 0.05]).unwrap();
        let kp = KernelParams::TimeVarying(lag.lift());
        let (out, r) = low_rank_truncate(&kp, 0.01).unwrap();
        assert_eq!(r, 1);
        for (a, b) in out.values().iter().zip(kp.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn threshold_above_top_value_zeroes() {
        let g = TimeGrid::new(0.5, 10, 4).unwrap();
        let lag = LagKernel::from_values(g, 1, vec![0.5, -0.2, 0.1, 0.05]).unwrap();
        let mut t = lag.lift();
        t.retain_stored();
        let (out, r) = low_rank_truncate(&KernelParams::TimeVarying(t), 100.0).unwrap();
        assert_eq!(r, 0);
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_short_horizon_and_time_invariant() {
        let g = TimeGrid::new(0.5, 3, 4).unwrap();
        let k = KernelParams::zeros_time_varying(g, 1);
        assert!(matches!(low_rank_truncate(&k, 0.1), Err(Error::InvalidArgument(_))));
        let g = TimeGrid::new(0.5, 6, 2).unwrap();
        assert!(low_rank_truncate(&KernelParams::zeros_time_invariant(g, 1), 0.1).is_err());
    }

    #[test]
    fn chunk_layout() {
        let g = TimeGrid::new(1.0, 4, 2).unwrap();
        let k = KernelTensor::from_fn(g, 2, |i, t, a, b| (10 * i + t) as f64 + 100.0 * (2 * a + b) as f64);
        let m = middle_chunk(&k).unwrap();
        assert_eq!(m.shape(), (3 * 4, 2));
        // pair (1, 0) is block 2, row i = 1, lag 2 -> K_{1,3}
        assert_eq!(m[(2 * 3 + 1, 1)], 13.0 + 200.0);
    }
}
