//! Reproducible forcing and test-field generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoxField, SpectralField};
use crate::grid::{BoxGrid, GridSpec};
use crate::spectral::{box_derivative, box_to_physical, box_to_spectral, Derivative};
use crate::symbols::leray_symbol;

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Band limits and seed of a random divergence-free forcing ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub seed: u64,
    pub count: usize,
    /// Largest retained spatial wave index per axis (must be below `N/2`).
    pub spatial_band: i64,
    /// Largest retained `|k|` (must be below `n_time/2`).
    pub temporal_band: i64,
    /// Amplitudes decay like `(1 + |m|²)^(-decay/2)`.
    pub decay_exponent: f64,
}

impl EnsembleParams {
    pub fn new(seed: u64, count: usize) -> Self {
        EnsembleParams {
            seed,
            count,
            spatial_band: 3,
            temporal_band: 3,
            decay_exponent: 2.0,
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("ensemble count must be positive".into()));
        }
        if self.spatial_band < 1 || self.spatial_band >= (grid.n_space / 2) as i64 {
            return Err(Error::InvalidArgument(format!(
                "spatial band {} must lie in 1..{}",
                self.spatial_band,
                grid.n_space / 2
            )));
        }
        if self.temporal_band < 0 || self.temporal_band >= (grid.n_time / 2) as i64 {
            return Err(Error::InvalidArgument(format!(
                "temporal band {} must lie in 0..{}",
                self.temporal_band,
                grid.n_time / 2
            )));
        }
        Ok(())
    }

    /// Generator seed of ensemble member `j`, independent of the sweep point.
    pub fn member_seed(&self, j: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(j as u64)
    }

    pub fn member(&self, grid: &GridSpec, j: usize) -> Result<SpectralField> {
        self.validate(grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.member_seed(j));
        Ok(random_solenoidal(grid, self.spatial_band, self.temporal_band, self.decay_exponent, &mut rng))
    }
}

/// Leray-projected complex Gaussian coefficients inside the band, zero spatial mean.
pub fn random_solenoidal(
    grid: &GridSpec,
    spatial_band: i64,
    temporal_band: i64,
    decay_exponent: f64,
    rng: &mut impl Rng,
) -> SpectralField {
    let bg = grid.box_grid();
    let mut f = SpectralField::zeros(*grid, 3);
    // Fixed iteration order so the ensemble does not depend on the storage layout.
    for k in -temporal_band..=temporal_band {
        let t = grid.mode_slot(k).expect("band inside range");
        for m1 in -spatial_band..=spatial_band {
            for m2 in -spatial_band..=spatial_band {
                for m3 in -spatial_band..=spatial_band {
                    let a = [complex_normal(rng), complex_normal(rng), complex_normal(rng)];
                    if m1 == 0 && m2 == 0 && m3 == 0 {
                        continue;
                    }
                    let (i1, i2, i3) = (
                        bg.slot_of(m1).unwrap(),
                        bg.slot_of(m2).unwrap(),
                        bg.slot_of(m3).unwrap(),
                    );
                    let msq = (m1 * m1 + m2 * m2 + m3 * m3) as f64;
                    let amp = (1.0 + msq).powf(-0.5 * decay_exponent);
                    let p = leray_symbol(bg.xi(i1, i2, i3));
                    for j in 0..3 {
                        let v = (p[j][0] * a[0] + p[j][1] * a[1] + p[j][2] * a[2]) * amp;
                        let at = f.index(t, i1, i2, i3, j);
                        f.data_mut()[at] = v;
                    }
                }
            }
        }
    }
    f
}

fn mode_slots(grid: &GridSpec, k: i64, m: [i64; 3]) -> Result<(usize, [usize; 3])> {
    let bg = grid.box_grid();
    let t = grid
        .mode_slot(k)
        .ok_or_else(|| Error::InvalidArgument(format!("temporal mode {k} not on the grid")))?;
    let mut s = [0usize; 3];
    for (i, &mi) in m.iter().enumerate() {
        s[i] = bg
            .slot_of(mi)
            .ok_or_else(|| Error::InvalidArgument(format!("wave index {mi} not on the grid")))?;
    }
    Ok((t, s))
}

/// `a · exp(i(2π/T)kt) exp(iξ·x)` with `ξ = 2π m / L`.
pub fn single_mode(grid: &GridSpec, k: i64, m: [i64; 3], amp: [Complex64; 3]) -> Result<SpectralField> {
    let (t, s) = mode_slots(grid, k, m)?;
    let mut f = SpectralField::zeros(*grid, 3);
    for (j, a) in amp.iter().enumerate() {
        let at = f.index(t, s[0], s[1], s[2], j);
        f.data_mut()[at] = *a;
    }
    Ok(f)
}

/// Pure gradient `iξ φ` at a single mode.
pub fn gradient_mode(grid: &GridSpec, k: i64, m: [i64; 3], phi: Complex64) -> Result<SpectralField> {
    let bg = grid.box_grid();
    let (_, s) = mode_slots(grid, k, m)?;
    let xi = bg.xi(s[0], s[1], s[2]);
    let i = Complex64::new(0.0, 1.0);
    single_mode(grid, k, m, [i * xi[0] * phi, i * xi[1] * phi, i * xi[2] * phi])
}

/// Gaussian width that balances spatial decay at the box edge against spectral decay at
/// the Nyquist wavenumber: `L/(2σ) = sqrt(πN/2)`.
pub fn balanced_sigma(grid: &BoxGrid) -> f64 {
    grid.box_len / (2.0 * (std::f64::consts::PI * grid.n as f64 / 2.0).sqrt())
}

fn gaussian(x: [f64; 3], sigma: f64) -> f64 {
    (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma)).exp()
}

/// Monomial exponents of total degree `≤ degree` in three variables.
fn monomials(degree: usize) -> Vec<[i32; 3]> {
    let d = degree as i32;
    let mut v = Vec::new();
    for a in 0..=d {
        for b in 0..=(d - a) {
            for c in 0..=(d - a - b) {
                v.push([a, b, c]);
            }
        }
    }
    v
}

/// Gaussian times random real polynomials (one per component) in `x/σ`.
pub fn localized_polynomial(grid: BoxGrid, n_components: usize, sigma: f64, degree: usize, rng: &mut impl Rng) -> BoxField {
    let mons = monomials(degree);
    let coeffs: Vec<Vec<f64>> = (0..n_components)
        .map(|_| mons.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    BoxField::from_fn(grid, n_components, |x, o| {
        let y = [x[0] / sigma, x[1] / sigma, x[2] / sigma];
        let g = gaussian(x, sigma);
        for (c, out) in o.iter_mut().enumerate() {
            let p: f64 = mons
                .iter()
                .zip(&coeffs[c])
                .map(|(e, a)| a * y[0].powi(e[0]) * y[1].powi(e[1]) * y[2].powi(e[2]))
                .sum();
            *out = Complex64::new(g * p, 0.0);
        }
    })
}

/// Spectral curl of a 3-component field; exactly divergence-free on the grid.
pub fn curl(a: &BoxField) -> Result<BoxField> {
    if a.n_components() != 3 {
        return Err(Error::Shape("curl needs 3 components".into()));
    }
    let grad = box_derivative(&box_to_spectral(a), Derivative::Grad)?;
    let g = *a.grid();
    // grad component 3c + j holds ∂_j A_c.
    let mut out = crate::field::BoxSpectrum::zeros(g, 3);
    for idx in 0..g.len() {
        let d = |c: usize, j: usize| grad.data()[idx * 9 + 3 * c + j];
        let v = [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)];
        out.data_mut()[idx * 3..idx * 3 + 3].copy_from_slice(&v);
    }
    Ok(box_to_physical(&out))
}

/// Divergence-free velocity localized in the inscribed ball: curl of a Gaussian-weighted
/// random polynomial vector potential.
pub fn localized_solenoidal(grid: BoxGrid, sigma: f64, degree: usize, seed: u64) -> Result<BoxField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = localized_polynomial(grid, 3, sigma, degree, &mut rng);
    curl(&a)
}

/// Localized scalar: Gaussian-weighted random polynomial.
pub fn localized_scalar(grid: BoxGrid, sigma: f64, degree: usize, seed: u64) -> BoxField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5CA1_AB1E);
    localized_polynomial(grid, 1, sigma, degree, &mut rng)
}

/// Swirl `(0, -x₃, x₂) exp(-|x|²/(2σ²))`: divergence-free and equivariant under
/// rotations about e₁.
pub fn swirl(grid: BoxGrid, sigma: f64) -> BoxField {
    BoxField::from_fn(grid, 3, |x, o| {
        let g = gaussian(x, sigma);
        o[1] = Complex64::new(-x[2] * g, 0.0);
        o[2] = Complex64::new(x[1] * g, 0.0);
    })
}

/// Radial Gaussian bump.
pub fn gaussian_bump(grid: BoxGrid, sigma: f64) -> BoxField {
    BoxField::from_fn(grid, 1, |x, o| o[0] = Complex64::new(gaussian(x, sigma), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ensemble_is_solenoidal_and_reproducible() {
        let g = GridSpec::new(1.0, 2.0 * PI, 8, 8).unwrap();
        let e = EnsembleParams::new(7, 2);
        let a = e.member(&g, 1).unwrap();
        assert_eq!(a, e.member(&g, 1).unwrap());
        assert_ne!(a, e.member(&g, 0).unwrap());
        let div = crate::spectral::spectral_derivative(&a, Derivative::Div).unwrap();
        assert!(div.max_abs() <= 1e-12 * a.max_abs());
        assert_eq!(a.mode(0).unwrap().get(0, 0, 0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn band_validation() {
        let g = GridSpec::new(1.0, 1.0, 8, 4).unwrap();
        let mut e = EnsembleParams::new(1, 1);
        e.spatial_band = 4;
        assert!(e.validate(&g).is_err());
        e.spatial_band = 3;
        e.temporal_band = 2;
        assert!(e.validate(&g).is_err());
    }

    #[test]
    fn curl_is_divergence_free() {
        let g = BoxGrid::new(6.0, 8).unwrap();
        let v = localized_solenoidal(g, 0.8, 2, 3).unwrap();
        let d = crate::spectral::box_field_derivative(&v, Derivative::Div).unwrap();
        assert!(d.max_abs() < 1e-12 * v.max_abs());
    }
}
