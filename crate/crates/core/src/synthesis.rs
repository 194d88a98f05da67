//! Time-periodic rotating problem with an arbitrary period `T`.
//!
//! Mode `k` of the forcing is solved as a rotating resolvent problem at
//! `s = (2π/T)k` on the rotation clock `2π/ω`, and the modes are reattached to the
//! `T`-clock. A-norms are sums of per-mode spatial norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::AuxOptions;
use crate::error::{Error, Result};
use crate::field::{BoxField, ModeSeries, PhysicalField};
use crate::norms::{box_lq_norm, check_exponent, compensated_sum};
use crate::report::SolveReport;
use crate::resonance::{d_omega_t, in_a1};
use crate::rotation::{apply_rot_operator, solve_rot_resolvent_with};
use crate::spectral::{to_mode_series, to_spectral};

/// Modes whose peak is below this fraction of the largest mode's peak are dropped.
pub const MODE_DROP_TOL: f64 = 1e-14;

/// Search bound used for `d_{ω,T}` in the A₂ norm.
pub const LATTICE_BOUND: i64 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct TpProblem {
    pub omega: f64,
    /// Forcing modes on the `T`-clock.
    pub forcing: ModeSeries,
    /// Samples of the internal rotation clock used by each resolvent solve.
    pub rotation_samples: usize,
}

impl TpProblem {
    pub fn new(omega: f64, forcing: ModeSeries, rotation_samples: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        if forcing.modes.iter().any(|(_, f)| f.n_components() != 3) {
            return Err(Error::Shape("forcing modes must have 3 components".into()));
        }
        Ok(TpProblem {
            omega,
            forcing,
            rotation_samples,
        })
    }

    pub fn period(&self) -> f64 {
        self.forcing.period
    }

    pub fn base_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.forcing.period
    }
}

/// Temporal modes of a field, dropping those below [`MODE_DROP_TOL`] of the largest.
pub fn decompose_modes(f: &PhysicalField) -> ModeSeries {
    let series = to_mode_series(&to_spectral(f));
    let peak = series.modes.iter().map(|(_, m)| m.max_abs()).fold(0.0, f64::max);
    let modes = series
        .modes
        .into_iter()
        .filter(|(_, m)| peak > 0.0 && m.max_abs() >= MODE_DROP_TOL * peak)
        .collect();
    ModeSeries::new(f.grid().period, modes).expect("subset of distinct modes")
}

/// A-norms for one exponent `q`: each is `Σ_k ‖·_k‖_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ANormEntry {
    pub q: f64,
    pub u: f64,
    pub grad_u: f64,
    pub hess_u: f64,
    pub p: f64,
    pub grad_p: f64,
    /// `∂_t u + ω(e₁∧x·∇u - e₁∧u)`.
    pub dt_u_plus_rotation: f64,
    pub forcing: f64,
    /// `(A[∂_t u + rotation] + A[∇²u] + A[∇p]) / A[f]`.
    pub empirical_constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2Norm {
    pub q: f64,
    /// `d_{ω,T} Σ_{k ∈ A₂} ‖u_k‖_q`; zero when `d` vanishes.
    pub value: f64,
    pub d: f64,
    /// False when `d_{ω,T} = 0`, where the quantity carries no information.
    pub informative: bool,
    pub a2_modes: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub k: i64,
    pub report: SolveReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpReport {
    pub period: f64,
    pub omega: f64,
    pub per_mode: Vec<ModeReport>,
    pub a_norms: Vec<ANormEntry>,
    /// Largest per-`q` A-norm ratio.
    pub empirical_constant: Option<f64>,
    pub a2_dist_norm: Vec<A2Norm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TpSolution {
    pub velocity: ModeSeries,
    pub pressure: ModeSeries,
    pub report: TpReport,
}

pub fn solve_tp(problem: &TpProblem, q_list: &[f64]) -> Result<TpSolution> {
    solve_tp_with(problem, q_list, &AuxOptions::default())
}

pub fn solve_tp_with(problem: &TpProblem, q_list: &[f64], options: &AuxOptions) -> Result<TpSolution> {
    for &q in q_list {
        check_exponent(q)?;
    }
    let w = problem.base_frequency();
    let solved: Vec<(i64, BoxField, BoxField, SolveReport)> = problem
        .forcing
        .modes
        .par_iter()
        .map(|(k, f)| {
            let s = w * *k as f64;
            solve_rot_resolvent_with(f, s, problem.omega, problem.rotation_samples, q_list, options)
                .map(|r| (*k, r.velocity, r.pressure, r.report))
                .map_err(|e| e.in_mode(*k))
        })
        .collect::<Result<_>>()?;

    let period = problem.period();
    let velocity = ModeSeries::new(period, solved.iter().map(|(k, v, _, _)| (*k, v.clone())).collect())?;
    let pressure = ModeSeries::new(period, solved.iter().map(|(k, _, p, _)| (*k, p.clone())).collect())?;
    let per_mode: Vec<ModeReport> = solved
        .into_iter()
        .map(|(k, _, _, report)| ModeReport { k, report })
        .collect();

    let a_norms: Vec<ANormEntry> = q_list.iter().map(|&q| aggregate(&per_mode, q)).collect();
    let empirical_constant = a_norms
        .iter()
        .filter_map(|e| e.empirical_constant)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    let a2_dist_norm = q_list
        .iter()
        .map(|&q| a2_weighted_norm(&velocity, problem.omega, q))
        .collect::<Result<_>>()?;
    Ok(TpSolution {
        velocity,
        pressure,
        report: TpReport {
            period,
            omega: problem.omega,
            per_mode,
            a_norms,
            empirical_constant,
            a2_dist_norm,
        },
    })
}

fn aggregate(per_mode: &[ModeReport], q: f64) -> ANormEntry {
    let entries: Vec<_> = per_mode
        .iter()
        .map(|m| m.report.entry(q).expect("every mode reports every q"))
        .collect();
    let sum = |f: fn(&crate::report::NormEntry) -> f64| compensated_sum(entries.iter().map(|e| f(e)));
    let u = sum(|e| e.u);
    let grad_u = sum(|e| e.grad_u);
    let hess_u = sum(|e| e.hess_u);
    let p = sum(|e| e.p);
    let grad_p = sum(|e| e.grad_p);
    let dt_u_plus_rotation = sum(|e| e.is_u_plus_dt_u);
    let forcing = sum(|e| e.forcing);
    ANormEntry {
        q,
        u,
        grad_u,
        hess_u,
        p,
        grad_p,
        dt_u_plus_rotation,
        forcing,
        empirical_constant: (forcing > 0.0).then(|| (dt_u_plus_rotation + hess_u + grad_p) / forcing),
    }
}

/// `d_{ω,T} Σ_{k ∈ A₂} ‖u_k‖_q` with `A₂ = {k : (2π/T)k ∉ ωℤ}`.
pub fn a2_weighted_norm(u: &ModeSeries, omega: f64, q: f64) -> Result<A2Norm> {
    check_exponent(q)?;
    let w = 2.0 * std::f64::consts::PI / u.period;
    let lattice = d_omega_t(u.period, omega, LATTICE_BOUND)?;
    let d = if lattice.stabilized { lattice.value } else { 0.0 };
    let a2: Vec<&(i64, BoxField)> = u.modes.iter().filter(|(k, _)| !in_a1(w, omega, *k)).collect();
    let sum = compensated_sum(
        a2.iter()
            .map(|(_, f)| box_lq_norm(f, q))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(A2Norm {
        q,
        value: if d > 0.0 { d * sum } else { 0.0 },
        d,
        informative: d > 0.0,
        a2_modes: a2.iter().map(|(k, _)| *k).collect(),
    })
}

/// Per-mode relative residual of the synthesized solution against the forcing.
pub fn tp_mode_residuals(problem: &TpProblem, u: &ModeSeries, p: &ModeSeries) -> Result<Vec<(i64, f64)>> {
    let w = problem.base_frequency();
    problem
        .forcing
        .modes
        .iter()
        .map(|(k, f)| {
            let (v, pr) = match (u.mode(*k), p.mode(*k)) {
                (Some(v), Some(pr)) => (v, pr),
                _ => return Err(Error::Shape(format!("solution lacks mode {k}"))),
            };
            let lhs = apply_rot_operator(v, pr, w * *k as f64, problem.omega)?;
            let fn_ = f.raw_l2();
            let r = (&lhs - f).raw_l2();
            Ok((*k, if fn_ > 0.0 { r / fn_ } else { r }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxGrid, GridSpec};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn decomposes_cosine_into_two_halves() {
        let grid = GridSpec::new(3.0, 2.0, 4, 8).unwrap();
        let g = BoxField::from_fn(grid.box_grid(), 1, |x, o| o[0] = Complex64::new(1.0 + x[0], 0.0));
        let f = PhysicalField::from_fn(grid, 1, |t, x, o| {
            o[0] = Complex64::new((1.0 + x[0]) * (2.0 * PI * t / 3.0).cos(), 0.0)
        });
        let m = decompose_modes(&f);
        assert_eq!(m.indices(), vec![-1, 1]);
        for k in [-1, 1] {
            assert!(m.mode(k).unwrap().max_rel_diff(&g.scaled(Complex64::new(0.5, 0.0))).unwrap() < 1e-14);
        }
        let still = PhysicalField::constant_in_time(grid, &g).unwrap();
        assert_eq!(decompose_modes(&still).indices(), vec![0]);
    }

    #[test]
    fn a2_examples() {
        let g = BoxGrid::new(2.0, 4).unwrap();
        let one = BoxField::from_fn(g, 1, |_, o| o[0] = Complex64::new(1.0, 0.0));
        let modes = (-6..=6).map(|k| (k, one.clone())).collect::<Vec<_>>();
        // Commensurate clock: every mode resonates.
        let u = ModeSeries::new(2.0 * PI / 1.5, modes.clone()).unwrap();
        let r = a2_weighted_norm(&u, 1.5, 2.0).unwrap();
        assert!(r.a2_modes.is_empty() && r.value == 0.0);
        // Base frequency 2, ω = 3: A₁ = 3ℤ, d = 1.
        let u = ModeSeries::new(PI, modes).unwrap();
        let r = a2_weighted_norm(&u, 3.0, 2.0).unwrap();
        let brute: Vec<i64> = (-6..=6).filter(|k| (2 * k) % 3 != 0).collect();
        assert_eq!(r.a2_modes, brute);
        assert!((r.d - 1.0).abs() < 1e-12);
        let vol = g.volume().sqrt();
        assert!((r.value - brute.len() as f64 * vol).abs() < 1e-12);
    }

    #[test]
    fn zero_forcing_gives_zero_modes() {
        let g = BoxGrid::new(2.0 * PI, 8).unwrap();
        let f = ModeSeries::new(1.0, vec![(0, BoxField::zeros(g, 3)), (2, BoxField::zeros(g, 3))]).unwrap();
        let sol = solve_tp(&TpProblem::new(1.0, f, 8).unwrap(), &[1.5]).unwrap();
        assert!(sol.velocity.modes.iter().all(|(_, v)| v.max_abs() == 0.0));
        assert_eq!(sol.report.empirical_constant, None);
    }
}
