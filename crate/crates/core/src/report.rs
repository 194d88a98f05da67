//! Solve reports: the norms entering the a priori estimates and their ratios.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{BoxSpectrum, SpectralField, ZERO};
use crate::grid::BoxGrid;
use crate::norms::{lq_of_magnitudes, mixed_of_magnitudes};
use crate::spectral::{box_to_physical, to_physical};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// `isu + ∂_t u - Δu + ∇p = f` on the rotation clock.
    Aux,
    /// Time-independent rotating resolvent problem.
    RotResolvent,
    /// Time-periodic rotating problem with arbitrary period.
    Tp,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Aux => "aux",
            ProblemKind::RotResolvent => "rot_resolvent",
            ProblemKind::Tp => "tp",
        })
    }
}

/// Norms for one exponent `q`.
///
/// For the rotating resolvent `is_u_plus_dt_u` holds `‖isv + ω(e₁∧x·∇v - e₁∧v)‖_q`,
/// the term that replaces `isu + ∂_t u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub q: f64,
    pub u: f64,
    pub dist_weighted_u: f64,
    pub is_u_plus_dt_u: f64,
    pub hess_u: f64,
    pub grad_p: f64,
    pub grad_u: f64,
    pub p: f64,
    /// `‖∇u‖` in `L^{3q/(3-q)}` in space, only for `q < 3`.
    pub grad_u_sobolev: Option<f64>,
    /// `‖u‖` in `L^{3q/(3-2q)}` in space, only for `q < 3/2`.
    pub u_sobolev: Option<f64>,
    /// `‖p‖` in `L^{3q/(3-q)}` in space, only for `q < 3`.
    pub p_sobolev: Option<f64>,
    pub forcing: f64,
    /// Sum of the four leading terms of the estimate.
    pub lhs: f64,
    /// `lhs / forcing`, absent when the forcing vanishes.
    pub empirical_constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: ProblemKind,
    pub s: f64,
    pub omega: f64,
    /// `dist(s, ωℤ)`.
    pub dist: f64,
    pub lq_norms: Vec<NormEntry>,
    pub residual_pde: f64,
    pub residual_div: f64,
    /// Largest per-`q` empirical constant.
    pub empirical_constant: Option<f64>,
    pub resonant_modes_zeroed: Vec<i64>,
    /// Relative non-mean temporal content of the rotating-frame solution.
    pub time_dependence: Option<f64>,
    /// Outside-ball mass fraction of the returned velocity.
    pub support_fraction: Option<f64>,
}

impl SolveReport {
    pub fn entry(&self, q: f64) -> Option<&NormEntry> {
        self.lq_norms.iter().find(|e| e.q == q)
    }
}

pub fn sobolev_grad_exponent(q: f64) -> Option<f64> {
    (q < 3.0).then(|| 3.0 * q / (3.0 - q))
}

pub fn sobolev_fct_exponent(q: f64) -> Option<f64> {
    (q < 1.5).then(|| 3.0 * q / (3.0 - 2.0 * q))
}

/// Pointwise magnitudes of a family of space-time spectral operators.
///
/// `op(o, t, slots, coeffs)` returns output component `o` at temporal slot `t` and
/// spatial slots, given all input components there. Outputs are transformed one at a
/// time to bound memory.
pub(crate) fn spectral_magnitudes(
    u: &SpectralField,
    n_out: usize,
    op: impl Fn(usize, usize, [usize; 3], &[Complex64]) -> Complex64,
) -> Vec<f64> {
    weighted_spectral_magnitudes(u, n_out, op, |_| 1.0)
}

/// Index pairs `a ≤ b` of a symmetric Hessian with their multiplicity in the Frobenius sum.
pub(crate) const HESSIAN_PAIRS: [(usize, usize, f64); 6] =
    [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (0, 1, 2.0), (0, 2, 2.0), (1, 2, 2.0)];

/// [`spectral_magnitudes`] with output `o` counted `weight(o)` times in the sum of squares.
pub(crate) fn weighted_spectral_magnitudes(
    u: &SpectralField,
    n_out: usize,
    op: impl Fn(usize, usize, [usize; 3], &[Complex64]) -> Complex64,
    weight: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let g = *u.grid();
    let bg = g.box_grid();
    let nc = u.n_components();
    let per = bg.len();
    let mut acc = vec![0.0f64; g.len()];
    for o in 0..n_out {
        let mut data = vec![ZERO; g.len()];
        for t in 0..g.n_time {
            let src = u.slice_data(t);
            for idx in 0..per {
                let (i1, i2, i3) = bg.unflat(idx);
                data[t * per + idx] = op(o, t, [i1, i2, i3], &src[idx * nc..(idx + 1) * nc]);
            }
        }
        let f = SpectralField::from_data(g, 1, data).expect("shape");
        let w = weight(o);
        for (a, v) in acc.iter_mut().zip(to_physical(&f).data()) {
            *a += w * v.norm_sqr();
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    acc
}

/// Box-field analogue of [`spectral_magnitudes`].
pub(crate) fn box_magnitudes(
    u: &BoxSpectrum,
    n_out: usize,
    op: impl Fn(usize, [usize; 3], &[Complex64]) -> Complex64,
) -> Vec<f64> {
    weighted_box_magnitudes(u, n_out, op, |_| 1.0)
}

pub(crate) fn weighted_box_magnitudes(
    u: &BoxSpectrum,
    n_out: usize,
    op: impl Fn(usize, [usize; 3], &[Complex64]) -> Complex64,
    weight: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let bg: BoxGrid = *u.grid();
    let nc = u.n_components();
    let mut acc = vec![0.0f64; bg.len()];
    for o in 0..n_out {
        let mut data = vec![ZERO; bg.len()];
        for (idx, d) in data.iter_mut().enumerate() {
            let (i1, i2, i3) = bg.unflat(idx);
            *d = op(o, [i1, i2, i3], &u.data()[idx * nc..(idx + 1) * nc]);
        }
        let f = BoxSpectrum::from_data(bg, 1, data).expect("shape");
        let w = weight(o);
        for (a, v) in acc.iter_mut().zip(box_to_physical(&f).data()) {
            *a += w * v.norm_sqr();
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    acc
}

/// Pointwise magnitudes of every quantity in a [`NormEntry`].
pub(crate) struct Magnitudes {
    pub u: Vec<f64>,
    pub main_time: Vec<f64>,
    pub hess: Vec<f64>,
    pub grad_u: Vec<f64>,
    pub grad_p: Vec<f64>,
    pub p: Vec<f64>,
    pub f: Vec<f64>,
    pub n_time: usize,
    pub cell: f64,
}

impl Magnitudes {
    fn lq(&self, m: &[f64], q: f64) -> f64 {
        lq_of_magnitudes(m, self.cell / self.n_time as f64, q)
    }

    fn mixed(&self, m: &[f64], q: f64, r: f64) -> f64 {
        mixed_of_magnitudes(m, self.n_time, self.cell, q, r)
    }

    pub fn entry(&self, q: f64, dist: f64) -> NormEntry {
        let u = self.lq(&self.u, q);
        let dist_weighted_u = dist * u;
        let is_u_plus_dt_u = self.lq(&self.main_time, q);
        let hess_u = self.lq(&self.hess, q);
        let grad_p = self.lq(&self.grad_p, q);
        let forcing = self.lq(&self.f, q);
        let lhs = dist_weighted_u + is_u_plus_dt_u + hess_u + grad_p;
        NormEntry {
            q,
            u,
            dist_weighted_u,
            is_u_plus_dt_u,
            hess_u,
            grad_p,
            grad_u: self.lq(&self.grad_u, q),
            p: self.lq(&self.p, q),
            grad_u_sobolev: sobolev_grad_exponent(q).map(|r| self.mixed(&self.grad_u, q, r)),
            u_sobolev: sobolev_fct_exponent(q).map(|r| self.mixed(&self.u, q, r)),
            p_sobolev: sobolev_grad_exponent(q).map(|r| self.mixed(&self.p, q, r)),
            forcing,
            lhs,
            empirical_constant: (forcing > 0.0).then(|| lhs / forcing),
        }
    }
}

pub(crate) fn max_constant(entries: &[NormEntry]) -> Option<f64> {
    entries
        .iter()
        .filter_map(|e| e.empirical_constant)
        .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.max(c))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(sobolev_grad_exponent(1.5), Some(3.0));
        assert!((sobolev_fct_exponent(1.2).unwrap() - 6.0).abs() < 1e-14);
        assert_eq!(sobolev_fct_exponent(1.5), None);
        assert_eq!(sobolev_grad_exponent(3.0), None);
    }
}
