//! Discrete Fourier transforms and spectral differential operators.
//!
//! Coefficients are Fourier-series coefficients: means over one period and over the
//! box, so a constant `c` maps to `c` at `(k, ξ) = (0, 0)` and a pure lattice mode to a
//! unit coefficient. The origin offset of the box is folded into the coefficients, so
//! they multiply `exp(iξ·x)` in true coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fft_axes;
use crate::field::{BoxField, BoxSpectrum, ModeSeries, PhysicalField, SpectralField, ZERO};
use crate::grid::BoxGrid;

/// Multiply each spatial point/mode by `(-1)^(i1+i2+i3)`.
fn apply_origin_phase(data: &mut [Complex64], grid: &BoxGrid, nc: usize) {
    let n = grid.n;
    for (r, row) in data.chunks_exact_mut(n * nc).enumerate() {
        // `r` runs over (t, i1, i2); only the parity of i1 + i2 matters.
        let (i1, i2) = ((r / n) % n, r % n);
        let first_odd = 1 - (i1 + i2) % 2;
        for i3 in (first_odd..n).step_by(2) {
            for v in &mut row[i3 * nc..(i3 + 1) * nc] {
                *v = -*v;
            }
        }
    }
}

pub fn to_spectral(field: &PhysicalField) -> SpectralField {
    let g = *field.grid();
    let nc = field.n_components();
    let mut data = field.data().to_vec();
    let n = g.n_space;
    fft_axes(&mut data, &[g.n_time, n, n, n], nc, &[0, 1, 2, 3], false);
    let scale = 1.0 / g.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    apply_origin_phase(&mut data, &g.box_grid(), nc);
    SpectralField::from_data(g, nc, data).expect("shape preserved")
}

pub fn to_physical(field: &SpectralField) -> PhysicalField {
    let g = *field.grid();
    let nc = field.n_components();
    let mut data = field.data().to_vec();
    apply_origin_phase(&mut data, &g.box_grid(), nc);
    let n = g.n_space;
    fft_axes(&mut data, &[g.n_time, n, n, n], nc, &[0, 1, 2, 3], true);
    PhysicalField::from_data(g, nc, data).expect("shape preserved")
}

pub fn box_to_spectral(field: &BoxField) -> BoxSpectrum {
    let g = *field.grid();
    let nc = field.n_components();
    let mut data = field.data().to_vec();
    fft_axes(&mut data, &[g.n, g.n, g.n], nc, &[0, 1, 2], false);
    let scale = 1.0 / g.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    apply_origin_phase(&mut data, &g, nc);
    BoxSpectrum::from_data(g, nc, data).expect("shape preserved")
}

pub fn box_to_physical(field: &BoxSpectrum) -> BoxField {
    let g = *field.grid();
    let nc = field.n_components();
    let mut data = field.data().to_vec();
    apply_origin_phase(&mut data, &g, nc);
    fft_axes(&mut data, &[g.n, g.n, g.n], nc, &[0, 1, 2], true);
    BoxField::from_data(g, nc, data).expect("shape preserved")
}

/// Split into temporal modes with physical spatial slices, `u_k(x)` for every slot.
pub fn to_mode_series(field: &SpectralField) -> ModeSeries {
    let g = *field.grid();
    let modes = (0..g.n_time)
        .map(|t| (g.mode_index(t), box_to_physical(&field.slice(t))))
        .collect();
    ModeSeries::new(g.period, modes).expect("slots carry distinct modes")
}

/// Which differential operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    /// `∂_t`, symbol `i (2π/T) k`.
    Time,
    /// Gradient of every component; component `c` yields outputs `3c..3c+3`.
    Grad,
    /// Divergence of consecutive component triples.
    Div,
    /// Componentwise Laplacian, symbol `-|ξ|²`.
    Laplacian,
}

/// Symbol `iξ_axis` at a slot, zero on the Nyquist slot of that axis.
#[inline]
pub fn partial_symbol(grid: &BoxGrid, slot: usize) -> Complex64 {
    if grid.is_nyquist(slot) {
        ZERO
    } else {
        Complex64::new(0.0, grid.wavenumber(slot))
    }
}

/// Symbol of `∂_a ∂_b`: product of first-order symbols for `a ≠ b`, `-ξ_a²` for `a = b`.
#[inline]
pub fn second_partial_symbol(grid: &BoxGrid, slots: [usize; 3], a: usize, b: usize) -> Complex64 {
    if a == b {
        let w = grid.wavenumber(slots[a]);
        Complex64::new(-w * w, 0.0)
    } else {
        partial_symbol(grid, slots[a]) * partial_symbol(grid, slots[b])
    }
}

#[inline]
pub(crate) fn xi_sq(grid: &BoxGrid, i1: usize, i2: usize, i3: usize) -> f64 {
    let xi = grid.xi(i1, i2, i3);
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

fn output_components(which: Derivative, nc: usize) -> Result<usize> {
    match which {
        Derivative::Time | Derivative::Laplacian => Ok(nc),
        Derivative::Grad => Ok(3 * nc),
        Derivative::Div => {
            if nc % 3 == 0 {
                Ok(nc / 3)
            } else {
                Err(Error::Shape(format!(
                    "divergence needs a multiple of 3 components, got {nc}"
                )))
            }
        }
    }
}

/// Apply a spatial operator to one slice of spatial coefficients.
fn spatial_kernel(
    which: Derivative,
    grid: &BoxGrid,
    nc: usize,
    input: &[Complex64],
    out: &mut [Complex64],
) {
    let nout = match which {
        Derivative::Grad => 3 * nc,
        Derivative::Div => nc / 3,
        _ => nc,
    };
    for idx in 0..grid.len() {
        let (i1, i2, i3) = grid.unflat(idx);
        let src = &input[idx * nc..(idx + 1) * nc];
        let dst = &mut out[idx * nout..(idx + 1) * nout];
        match which {
            Derivative::Laplacian => {
                let f = -xi_sq(grid, i1, i2, i3);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s * f;
                }
            }
            Derivative::Grad => {
                let sym = [
                    partial_symbol(grid, i1),
                    partial_symbol(grid, i2),
                    partial_symbol(grid, i3),
                ];
                for c in 0..nc {
                    for j in 0..3 {
                        dst[3 * c + j] = sym[j] * src[c];
                    }
                }
            }
            Derivative::Div => {
                let sym = [
                    partial_symbol(grid, i1),
                    partial_symbol(grid, i2),
                    partial_symbol(grid, i3),
                ];
                for (c, d) in dst.iter_mut().enumerate() {
                    *d = sym[0] * src[3 * c] + sym[1] * src[3 * c + 1] + sym[2] * src[3 * c + 2];
                }
            }
            Derivative::Time => unreachable!("time derivative has no spatial kernel"),
        }
    }
}

/// Coefficient-wise multiplication by the discrete symbol of `which`.
pub fn spectral_derivative(field: &SpectralField, which: Derivative) -> Result<SpectralField> {
    let g = *field.grid();
    let nc = field.n_components();
    let nout = output_components(which, nc)?;
    let mut out = SpectralField::zeros(g, nout);
    match which {
        Derivative::Time => {
            let w = g.base_frequency();
            for t in 0..g.n_time {
                let sym = if t == g.n_time / 2 {
                    ZERO
                } else {
                    Complex64::new(0.0, w * g.mode_index(t) as f64)
                };
                for (d, s) in out.slice_data_mut(t).iter_mut().zip(field.slice_data(t)) {
                    *d = sym * s;
                }
            }
        }
        _ => {
            let bg = g.box_grid();
            for t in 0..g.n_time {
                let src = field.slice_data(t).to_vec();
                spatial_kernel(which, &bg, nc, &src, out.slice_data_mut(t));
            }
        }
    }
    Ok(out)
}

/// Spatial operator on a box spectrum. `Derivative::Time` is rejected.
pub fn box_derivative(field: &BoxSpectrum, which: Derivative) -> Result<BoxSpectrum> {
    if which == Derivative::Time {
        return Err(Error::InvalidArgument(
            "a box field has no time axis to differentiate".into(),
        ));
    }
    let g = *field.grid();
    let nc = field.n_components();
    let nout = output_components(which, nc)?;
    let mut out = BoxSpectrum::zeros(g, nout);
    spatial_kernel(which, &g, nc, field.data(), out.data_mut());
    Ok(out)
}

/// Convenience: spatial operator applied to physical box samples.
pub fn box_field_derivative(field: &BoxField, which: Derivative) -> Result<BoxField> {
    Ok(box_to_physical(&box_derivative(&box_to_spectral(field), which)?))
}
