//! Lebesgue and mixed norms by Riemann-sum quadrature.
//!
//! Time integrals carry the normalized measure (mean over samples), space integrals
//! the Lebesgue weight `(L/N)^3`. Pointwise magnitudes are Euclidean over components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoxField, ModeSeries, PhysicalField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormScope {
    SpaceTime,
    SpacePerSlice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LqNorm {
    SpaceTime(f64),
    PerSlice(Vec<f64>),
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "norm exponent must be finite and > 1, got {q}"
        )))
    }
}

/// `(w Σ m^q)^{1/q}` for pointwise magnitudes `m` and cell weight `w`.
pub(crate) fn lq_of_magnitudes(mags: &[f64], weight: f64, q: f64) -> f64 {
    let peak = mags.iter().fold(0.0f64, |a, &b| a.max(b));
    if peak == 0.0 {
        return 0.0;
    }
    // Scale by the peak so large exponents cannot overflow.
    let s = compensated_sum(mags.iter().map(|&m| (m / peak).powf(q)));
    peak * (weight * s).powf(1.0 / q)
}

fn pointwise_magnitudes(data: &[num_complex::Complex64], nc: usize) -> Vec<f64> {
    data.chunks_exact(nc)
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

pub fn lq_norm(field: &PhysicalField, q: f64, scope: NormScope) -> Result<LqNorm> {
    check_exponent(q)?;
    let g = field.grid();
    let cell = g.box_grid().cell_volume();
    let nc = field.n_components();
    Ok(match scope {
        NormScope::SpaceTime => {
            let mags = pointwise_magnitudes(field.data(), nc);
            LqNorm::SpaceTime(lq_of_magnitudes(&mags, cell / g.n_time as f64, q))
        }
        NormScope::SpacePerSlice => LqNorm::PerSlice(
            (0..g.n_time)
                .map(|t| lq_of_magnitudes(&pointwise_magnitudes(field.slice_data(t), nc), cell, q))
                .collect(),
        ),
    })
}

/// Space-time `L^q` norm.
pub fn space_time_norm(field: &PhysicalField, q: f64) -> Result<f64> {
    match lq_norm(field, q, NormScope::SpaceTime)? {
        LqNorm::SpaceTime(v) => Ok(v),
        LqNorm::PerSlice(_) => unreachable!(),
    }
}

/// Per-slice spatial `L^q` norms.
pub fn per_slice_norms(field: &PhysicalField, q: f64) -> Result<Vec<f64>> {
    match lq_norm(field, q, NormScope::SpacePerSlice)? {
        LqNorm::PerSlice(v) => Ok(v),
        LqNorm::SpaceTime(_) => unreachable!(),
    }
}

pub fn box_lq_norm(field: &BoxField, q: f64) -> Result<f64> {
    check_exponent(q)?;
    let mags = pointwise_magnitudes(field.data(), field.n_components());
    Ok(lq_of_magnitudes(&mags, field.grid().cell_volume(), q))
}

/// `L^{q_time}(T; L^{r_space})` with the normalized time measure.
pub fn mixed_norm(field: &PhysicalField, q_time: f64, r_space: f64) -> Result<f64> {
    check_exponent(q_time)?;
    let slices = per_slice_norms(field, r_space)?;
    Ok(lq_of_magnitudes(&slices, 1.0 / slices.len() as f64, q_time))
}

/// Mixed norm computed from precomputed pointwise magnitudes laid out slice by slice.
pub(crate) fn mixed_of_magnitudes(mags: &[f64], n_time: usize, cell: f64, q_time: f64, r_space: f64) -> f64 {
    let per = mags.len() / n_time;
    let slices: Vec<f64> = mags
        .chunks_exact(per)
        .map(|m| lq_of_magnitudes(m, cell, r_space))
        .collect();
    lq_of_magnitudes(&slices, 1.0 / n_time as f64, q_time)
}

/// `Σ_k ‖u_k‖_q` over the temporal modes of the series.
pub fn a_norm(series: &ModeSeries, q: f64) -> Result<f64> {
    check_exponent(q)?;
    let mut terms = Vec::with_capacity(series.modes.len());
    for (_, f) in &series.modes {
        terms.push(box_lq_norm(f, q)?);
    }
    Ok(compensated_sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use num_complex::Complex64;

    #[test]
    fn constant_field() {
        let g = GridSpec::new(1.0, 3.0, 8, 4).unwrap();
        let c = 2.5;
        let f = PhysicalField::from_fn(g, 3, |_, _, o| {
            o[0] = Complex64::new(c * 0.6, 0.0);
            o[1] = Complex64::new(0.0, c * 0.8);
        });
        for q in [1.5, 2.0, 3.7] {
            let v = space_time_norm(&f, q).unwrap();
            let expect = c * 27f64.powf(1.0 / q);
            assert!((v - expect).abs() < 1e-13 * expect);
        }
    }

    #[test]
    fn zero_and_bad_exponent() {
        let g = GridSpec::new(1.0, 1.0, 4, 2).unwrap();
        let f = PhysicalField::zeros(g, 1);
        assert_eq!(space_time_norm(&f, 2.0).unwrap(), 0.0);
        assert!(space_time_norm(&f, 1.0).is_err());
        assert!(space_time_norm(&f, 0.5).is_err());
        assert!(space_time_norm(&f, f64::INFINITY).is_err());
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
