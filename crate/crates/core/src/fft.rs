//! Multi-dimensional FFTs over row-major arrays with a trailing component axis.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Lines per gathered tile.
const TILE: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized DFT along each of `axes` of an array shaped `dims` x `nc`.
///
/// Forward uses `exp(-2πi jk/n)`, inverse `exp(+2πi jk/n)`.
pub(crate) fn fft_axes(
    data: &mut [Complex64],
    dims: &[usize],
    nc: usize,
    axes: &[usize],
    inverse: bool,
) {
    let total: usize = dims.iter().product::<usize>() * nc;
    debug_assert_eq!(total, data.len());
    let direction = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    for &axis in axes {
        let n = dims[axis];
        if n <= 1 {
            continue;
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
        let inner: usize = dims[axis + 1..].iter().product::<usize>() * nc;
        let outer: usize = dims[..axis].iter().product();
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        if inner == 1 {
            // Lines are already contiguous: one batched call.
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // Gather strided lines a tile at a time so the transposed block stays in cache,
        // transform the tile in one batched call and scatter back.
        let mut block = vec![Complex64::new(0.0, 0.0); n * TILE.min(inner)];
        for o in 0..outer {
            let src = &mut data[o * n * inner..(o + 1) * n * inner];
            for i0 in (0..inner).step_by(TILE) {
                let w = TILE.min(inner - i0);
                let tile = &mut block[..n * w];
                for j in 0..n {
                    let row = &src[j * inner + i0..j * inner + i0 + w];
                    for (c, v) in row.iter().enumerate() {
                        tile[c * n + j] = *v;
                    }
                }
                fft.process_with_scratch(tile, &mut scratch);
                for j in 0..n {
                    let row = &mut src[j * inner + i0..j * inner + i0 + w];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = tile[c * n + j];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft_1d(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, sign * 2.0 * PI * (j * k) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn middle_axis_matches_naive() {
        let dims = [3usize, 8, 2];
        let nc = 2;
        let total = 3 * 8 * 2 * nc;
        let data: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut out = data.clone();
        fft_axes(&mut out, &dims, nc, &[1], false);
        for a in 0..3 {
            for b in 0..2 {
                for c in 0..nc {
                    let idx = |j: usize| ((a * 8 + j) * 2 + b) * nc + c;
                    let line: Vec<_> = (0..8).map(|j| data[idx(j)]).collect();
                    let expect = naive_dft_1d(&line, false);
                    for j in 0..8 {
                        assert!((out[idx(j)] - expect[j]).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
