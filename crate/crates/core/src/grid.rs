//! Discretization of the time circle and the periodic box.
//!
//! Spatial points sit at `x_j = -L/2 + j L/N`, time samples at `t_j = j T / n_time`.
//! Spectral arrays are stored in FFT order: slot `j < N/2` holds wave index `j`,
//! slot `j >= N/2` holds `j - N`. The same convention applies to temporal modes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wave index stored at a given FFT-ordered slot.
#[inline]
pub fn wave_index(slot: usize, n: usize) -> i64 {
    if slot < n / 2 {
        slot as i64
    } else {
        slot as i64 - n as i64
    }
}

/// FFT-ordered slot of a wave index, if it is representable on `n` points.
#[inline]
pub fn slot_of(index: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if index < -half || index >= half {
        None
    } else if index >= 0 {
        Some(index as usize)
    } else {
        Some((index + n as i64) as usize)
    }
}

/// Space-time grid: time circle of length `period` times the cube `[-L/2, L/2)^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub period: f64,
    pub box_len: f64,
    pub n_space: usize,
    pub n_time: usize,
}

impl GridSpec {
    pub fn new(period: f64, box_len: f64, n_space: usize, n_time: usize) -> Result<Self> {
        let g = GridSpec {
            period,
            box_len,
            n_space,
            n_time,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid whose period is the rotation period `2π/ω`.
    pub fn for_rotation(omega: f64, box_len: f64, n_space: usize, n_time: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        GridSpec::new(2.0 * PI / omega, box_len, n_space, n_time)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        BoxGrid::new(self.box_len, self.n_space)?;
        if self.n_time < 2 || self.n_time % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_time must be even and >= 2, got {}",
                self.n_time
            )));
        }
        Ok(())
    }

    pub fn box_grid(&self) -> BoxGrid {
        BoxGrid {
            box_len: self.box_len,
            n: self.n_space,
        }
    }

    /// Base temporal frequency `2π/T`.
    pub fn base_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn time(&self, slot: usize) -> f64 {
        self.period * slot as f64 / self.n_time as f64
    }

    pub fn mode_index(&self, slot: usize) -> i64 {
        wave_index(slot, self.n_time)
    }

    pub fn mode_slot(&self, k: i64) -> Option<usize> {
        slot_of(k, self.n_time)
    }

    pub fn k_min(&self) -> i64 {
        -((self.n_time / 2) as i64)
    }

    pub fn k_max(&self) -> i64 {
        (self.n_time / 2) as i64 - 1
    }

    /// Number of samples per component.
    pub fn len(&self) -> usize {
        self.n_time * self.n_space.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The periodic cube alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub box_len: f64,
    pub n: usize,
}

impl BoxGrid {
    pub fn new(box_len: f64, n: usize) -> Result<Self> {
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_len must be positive, got {box_len}"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_space must be even and >= 4, got {n}"
            )));
        }
        Ok(BoxGrid { box_len, n })
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    pub fn coordinate(&self, slot: usize) -> f64 {
        -0.5 * self.box_len + slot as f64 * self.spacing()
    }

    pub fn point(&self, i1: usize, i2: usize, i3: usize) -> [f64; 3] {
        [self.coordinate(i1), self.coordinate(i2), self.coordinate(i3)]
    }

    /// Lattice wavenumber `2π m / L` at an FFT-ordered slot.
    pub fn wavenumber(&self, slot: usize) -> f64 {
        2.0 * PI / self.box_len * wave_index(slot, self.n) as f64
    }

    pub fn wave_index(&self, slot: usize) -> i64 {
        wave_index(slot, self.n)
    }

    pub fn slot_of(&self, index: i64) -> Option<usize> {
        slot_of(index, self.n)
    }

    pub fn is_nyquist(&self, slot: usize) -> bool {
        slot == self.n / 2
    }

    pub fn xi(&self, i1: usize, i2: usize, i3: usize) -> [f64; 3] {
        [self.wavenumber(i1), self.wavenumber(i2), self.wavenumber(i3)]
    }

    /// Points per component.
    pub fn len(&self) -> usize {
        self.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Flat spatial index of `(i1, i2, i3)`.
    #[inline]
    pub fn flat(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n + i2) * self.n + i3
    }

    /// Inverse of [`BoxGrid::flat`].
    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }
}
