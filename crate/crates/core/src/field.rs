//! Field containers.
//!
//! Space-time arrays are flat, indexed `(((t * N + i1) * N + i2) * N + i3) * nc + c`.
//! Spectral arrays use the same layout with FFT-ordered slots (see [`crate::grid`]).
//! Box fields drop the leading time axis.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoxGrid, GridSpec};

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn check_components(nc: usize) -> Result<()> {
    if nc == 0 {
        return Err(Error::Shape("a field needs at least one component".into()));
    }
    Ok(())
}

macro_rules! common_field_impl {
    ($ty:ident, $grid:ty, $len:expr) => {
        impl $ty {
            pub fn zeros(grid: $grid, n_components: usize) -> Self {
                let len = $len(&grid) * n_components;
                $ty {
                    grid,
                    n_components,
                    data: vec![ZERO; len],
                }
            }

            pub fn from_data(grid: $grid, n_components: usize, data: Vec<Complex64>) -> Result<Self> {
                check_components(n_components)?;
                let expect = $len(&grid) * n_components;
                if data.len() != expect {
                    return Err(Error::Shape(format!(
                        "expected {expect} values for {n_components} component(s), got {}",
                        data.len()
                    )));
                }
                Ok($ty {
                    grid,
                    n_components,
                    data,
                })
            }

            pub fn grid(&self) -> &$grid {
                &self.grid
            }

            pub fn n_components(&self) -> usize {
                self.n_components
            }

            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<Complex64> {
                self.data
            }

            /// Largest modulus over all entries.
            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
            }

            /// Euclidean norm of the raw array.
            pub fn raw_l2(&self) -> f64 {
                self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            }

            pub fn scaled(&self, a: Complex64) -> Self {
                let mut out = self.clone();
                out.data.iter_mut().for_each(|v| *v *= a);
                out
            }

            pub fn same_shape(&self, other: &Self) -> bool {
                self.grid == other.grid && self.n_components == other.n_components
            }

            pub fn check_same_shape(&self, other: &Self) -> Result<()> {
                if self.same_shape(other) {
                    Ok(())
                } else {
                    Err(Error::Shape(format!(
                        "fields differ in grid or component count ({:?}/{} vs {:?}/{})",
                        self.grid, self.n_components, other.grid, other.n_components
                    )))
                }
            }

            /// Largest entrywise difference relative to the larger of the two maxima.
            pub fn max_rel_diff(&self, other: &Self) -> Result<f64> {
                self.check_same_shape(other)?;
                let scale = self.max_abs().max(other.max_abs());
                let diff = self
                    .data
                    .iter()
                    .zip(&other.data)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                Ok(if scale > 0.0 { diff / scale } else { diff })
            }

            /// Copy of a single component.
            pub fn component(&self, c: usize) -> Result<Self> {
                if c >= self.n_components {
                    return Err(Error::Shape(format!(
                        "component {c} out of range for {} component(s)",
                        self.n_components
                    )));
                }
                let data = self
                    .data
                    .iter()
                    .skip(c)
                    .step_by(self.n_components)
                    .copied()
                    .collect();
                Ok($ty {
                    grid: self.grid,
                    n_components: 1,
                    data,
                })
            }
        }

        impl Add for &$ty {
            type Output = $ty;
            /// Panics if the shapes differ.
            fn add(self, rhs: &$ty) -> $ty {
                assert!(self.same_shape(rhs), "shape mismatch in field addition");
                let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
                $ty {
                    grid: self.grid,
                    n_components: self.n_components,
                    data,
                }
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            /// Panics if the shapes differ.
            fn sub(self, rhs: &$ty) -> $ty {
                assert!(self.same_shape(rhs), "shape mismatch in field subtraction");
                let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
                $ty {
                    grid: self.grid,
                    n_components: self.n_components,
                    data,
                }
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(Complex64::new(-1.0, 0.0))
            }
        }

        impl Mul<Complex64> for &$ty {
            type Output = $ty;
            fn mul(self, a: Complex64) -> $ty {
                self.scaled(a)
            }
        }

        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, a: f64) -> $ty {
                self.scaled(Complex64::new(a, 0.0))
            }
        }
    };
}

/// Space-time samples on the time circle times the periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    grid: GridSpec,
    n_components: usize,
    data: Vec<Complex64>,
}

/// Space-time Fourier coefficients (temporal mode, spatial wavenumber, component).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: GridSpec,
    n_components: usize,
    data: Vec<Complex64>,
}

/// Samples of a time-independent field on the periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxField {
    grid: BoxGrid,
    n_components: usize,
    data: Vec<Complex64>,
}

/// Spatial Fourier coefficients of a box field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpectrum {
    grid: BoxGrid,
    n_components: usize,
    data: Vec<Complex64>,
}

common_field_impl!(PhysicalField, GridSpec, GridSpec::len);
common_field_impl!(SpectralField, GridSpec, GridSpec::len);
common_field_impl!(BoxField, BoxGrid, BoxGrid::len);
common_field_impl!(BoxSpectrum, BoxGrid, BoxGrid::len);

macro_rules! time_slicing_impl {
    ($ty:ident, $slice:ident) => {
        impl $ty {
            #[inline]
            pub fn index(&self, t: usize, i1: usize, i2: usize, i3: usize, c: usize) -> usize {
                let n = self.grid.n_space;
                (((t * n + i1) * n + i2) * n + i3) * self.n_components + c
            }

            pub fn get(&self, t: usize, i1: usize, i2: usize, i3: usize, c: usize) -> Complex64 {
                self.data[self.index(t, i1, i2, i3, c)]
            }

            /// Number of values in one time slice (all components).
            pub fn slice_len(&self) -> usize {
                self.grid.n_space.pow(3) * self.n_components
            }

            pub fn slice_data(&self, t: usize) -> &[Complex64] {
                let len = self.slice_len();
                &self.data[t * len..(t + 1) * len]
            }

            pub fn slice_data_mut(&mut self, t: usize) -> &mut [Complex64] {
                let len = self.slice_len();
                &mut self.data[t * len..(t + 1) * len]
            }

            /// Copy of time slot `t` as a box-level object.
            pub fn slice(&self, t: usize) -> $slice {
                $slice {
                    grid: self.grid.box_grid(),
                    n_components: self.n_components,
                    data: self.slice_data(t).to_vec(),
                }
            }

            /// Assemble from one box-level object per time slot.
            pub fn from_slices(grid: GridSpec, slices: &[$slice]) -> Result<Self> {
                if slices.len() != grid.n_time {
                    return Err(Error::Shape(format!(
                        "expected {} time slices, got {}",
                        grid.n_time,
                        slices.len()
                    )));
                }
                let nc = slices[0].n_components;
                let mut data = Vec::with_capacity(grid.len() * nc);
                for s in slices {
                    if s.grid != grid.box_grid() || s.n_components != nc {
                        return Err(Error::Shape("time slices differ in shape".into()));
                    }
                    data.extend_from_slice(&s.data);
                }
                $ty::from_data(grid, nc, data)
            }
        }
    };
}

time_slicing_impl!(PhysicalField, BoxField);
time_slicing_impl!(SpectralField, BoxSpectrum);

impl PhysicalField {
    /// Sample `f(t, x, out)` at every grid point.
    pub fn from_fn(
        grid: GridSpec,
        n_components: usize,
        mut f: impl FnMut(f64, [f64; 3], &mut [Complex64]),
    ) -> Self {
        let mut field = PhysicalField::zeros(grid, n_components);
        let bg = grid.box_grid();
        let nc = n_components;
        for t in 0..grid.n_time {
            let time = grid.time(t);
            let slice = field.slice_data_mut(t);
            for idx in 0..bg.len() {
                let (i1, i2, i3) = bg.unflat(idx);
                f(time, bg.point(i1, i2, i3), &mut slice[idx * nc..(idx + 1) * nc]);
            }
        }
        field
    }

    /// The same box field at every time slot.
    pub fn constant_in_time(grid: GridSpec, g: &BoxField) -> Result<Self> {
        if g.grid != grid.box_grid() {
            return Err(Error::Shape(format!(
                "box grid {:?} does not match space-time grid {:?}",
                g.grid, grid
            )));
        }
        let mut data = Vec::with_capacity(grid.len() * g.n_components);
        for _ in 0..grid.n_time {
            data.extend_from_slice(&g.data);
        }
        PhysicalField::from_data(grid, g.n_components, data)
    }

    /// Arithmetic mean over the time samples.
    pub fn time_mean(&self) -> BoxField {
        let len = self.slice_len();
        let mut acc = vec![ZERO; len];
        for t in 0..self.grid.n_time {
            for (a, v) in acc.iter_mut().zip(self.slice_data(t)) {
                *a += v;
            }
        }
        let inv = 1.0 / self.grid.n_time as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        BoxField {
            grid: self.grid.box_grid(),
            n_components: self.n_components,
            data: acc,
        }
    }
}

impl SpectralField {
    /// Spatial spectrum of temporal mode `k`, if representable on the grid.
    pub fn mode(&self, k: i64) -> Option<BoxSpectrum> {
        self.grid.mode_slot(k).map(|t| self.slice(t))
    }

    /// Overwrite temporal mode `k`.
    pub fn set_mode(&mut self, k: i64, spectrum: &BoxSpectrum) -> Result<()> {
        let t = self.grid.mode_slot(k).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "temporal mode {k} outside {}..={}",
                self.grid.k_min(),
                self.grid.k_max()
            ))
        })?;
        if spectrum.grid != self.grid.box_grid() || spectrum.n_components != self.n_components {
            return Err(Error::Shape("mode spectrum does not match field".into()));
        }
        self.slice_data_mut(t).copy_from_slice(&spectrum.data);
        Ok(())
    }

    /// Temporal modes whose coefficients are not all zero, in increasing order.
    pub fn occupied_modes(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = (0..self.grid.n_time)
            .filter(|&t| self.slice_data(t).iter().any(|v| *v != ZERO))
            .map(|t| self.grid.mode_index(t))
            .collect();
        ks.sort_unstable();
        ks
    }
}

impl BoxField {
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize, c: usize) -> usize {
        self.grid.flat(i1, i2, i3) * self.n_components + c
    }

    pub fn get(&self, i1: usize, i2: usize, i3: usize, c: usize) -> Complex64 {
        self.data[self.index(i1, i2, i3, c)]
    }

    /// Sample `f(x, out)` at every grid point.
    pub fn from_fn(grid: BoxGrid, n_components: usize, mut f: impl FnMut([f64; 3], &mut [Complex64])) -> Self {
        let mut field = BoxField::zeros(grid, n_components);
        let nc = n_components;
        for idx in 0..grid.len() {
            let (i1, i2, i3) = grid.unflat(idx);
            f(grid.point(i1, i2, i3), &mut field.data[idx * nc..(idx + 1) * nc]);
        }
        field
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.data
            .chunks_exact(self.n_components)
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

impl BoxSpectrum {
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize, c: usize) -> usize {
        self.grid.flat(i1, i2, i3) * self.n_components + c
    }

    pub fn get(&self, i1: usize, i2: usize, i3: usize, c: usize) -> Complex64 {
        self.data[self.index(i1, i2, i3, c)]
    }
}

/// A field that is spectral in time and physical in space: a list of temporal
/// modes `(k, u_k)` with `u(t, x) = Σ_k u_k(x) exp(i (2π/T) k t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSeries {
    pub period: f64,
    pub modes: Vec<(i64, BoxField)>,
}

impl ModeSeries {
    pub fn new(period: f64, mut modes: Vec<(i64, BoxField)>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        modes.sort_by_key(|(k, _)| *k);
        for w in modes.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("duplicate temporal mode {}", w[0].0)));
            }
            if !(w[0].1.grid == w[1].1.grid && w[0].1.n_components == w[1].1.n_components) {
                return Err(Error::Shape("modes differ in grid or component count".into()));
            }
        }
        Ok(ModeSeries { period, modes })
    }

    pub fn mode(&self, k: i64) -> Option<&BoxField> {
        self.modes.iter().find(|(j, _)| *j == k).map(|(_, f)| f)
    }

    pub fn indices(&self) -> Vec<i64> {
        self.modes.iter().map(|(k, _)| *k).collect()
    }

    /// Evaluate the series at time `t`.
    pub fn evaluate(&self, t: f64) -> Option<BoxField> {
        let (_, first) = self.modes.first()?;
        let mut out = BoxField::zeros(first.grid, first.n_components);
        let w = 2.0 * std::f64::consts::PI / self.period;
        for (k, f) in &self.modes {
            let phase = Complex64::from_polar(1.0, w * *k as f64 * t);
            for (o, v) in out.data.iter_mut().zip(&f.data) {
                *o += phase * v;
            }
        }
        Some(out)
    }

    /// Sample the series on a space-time grid with the same period and box.
    pub fn to_physical(&self, grid: GridSpec) -> Result<PhysicalField> {
        if (grid.period - self.period).abs() > 1e-12 * self.period {
            return Err(Error::Shape(format!(
                "grid period {} differs from series period {}",
                grid.period, self.period
            )));
        }
        let slices: Vec<BoxField> = (0..grid.n_time)
            .map(|t| {
                self.evaluate(grid.time(t))
                    .ok_or_else(|| Error::Shape("empty mode series".into()))
            })
            .collect::<Result<_>>()?;
        PhysicalField::from_slices(grid, &slices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(2.0, 1.0, 4, 4).unwrap()
    }

    #[test]
    fn shape_checked() {
        assert!(PhysicalField::from_data(grid(), 3, vec![ZERO; 10]).is_err());
        assert!(PhysicalField::from_data(grid(), 3, vec![ZERO; 4 * 64 * 3]).is_ok());
    }

    #[test]
    fn slices_round_trip() {
        let f = PhysicalField::from_fn(grid(), 2, |t, x, out| {
            out[0] = Complex64::new(t + x[0], x[1]);
            out[1] = Complex64::new(x[2], -t);
        });
        let slices: Vec<_> = (0..4).map(|t| f.slice(t)).collect();
        assert_eq!(PhysicalField::from_slices(grid(), &slices).unwrap(), f);
        assert_eq!(f.get(1, 0, 0, 0, 1), Complex64::new(-0.5, -0.5));
    }

    #[test]
    fn mode_series_rejects_duplicates() {
        let g = grid().box_grid();
        let a = BoxField::zeros(g, 3);
        assert!(ModeSeries::new(1.0, vec![(1, a.clone()), (1, a)]).is_err());
    }
}
