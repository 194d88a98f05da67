//! Solver for `isu + ∂_t u - Δu + ∇p = f`, `div u = 0` on the rotation clock `T = 2π/ω`.
//!
//! Per mode `(k, ξ)`: `p̂ = -iξ·f̂/|ξ|²` and `û = P(ξ) f̂ / D` with `D = is + iωk + |ξ|²`.
//! The parameter is first reduced to `s̃ = s - ωℓ ∈ [-ω/2, ω/2)`; since the clock period
//! is `2π/ω`, multiplying by `exp(iωℓt)` only relabels temporal modes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, ZERO};
use crate::report::{
    max_constant, spectral_magnitudes, weighted_spectral_magnitudes, Magnitudes, ProblemKind, SolveReport,
    HESSIAN_PAIRS,
};
use crate::resonance::dist_to_lattice;
use crate::spectral::{partial_symbol, second_partial_symbol, xi_sq};
use crate::symbols::{is_resonant, leray_symbol};

/// Forcing at a resonant mode counts as zero below this fraction of `max|f̂|`.
pub const RESONANT_FORCING_TOL: f64 = 1e-12;
/// Agreement required between `period·ω` and `2π`.
pub const PERIOD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct AuxProblem {
    pub s: f64,
    pub omega: f64,
    pub forcing: SpectralField,
}

impl AuxProblem {
    pub fn new(s: f64, omega: f64, forcing: SpectralField) -> Result<Self> {
        let p = AuxProblem { s, omega, forcing };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidArgument(format!("s must be finite, got {}", self.s)));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        let g = self.forcing.grid();
        let tp = 2.0 * std::f64::consts::PI;
        if (g.period * self.omega - tp).abs() > PERIOD_TOL * tp {
            return Err(Error::InvalidGrid(format!(
                "grid period {} is not 2π/ω = {}",
                g.period,
                tp / self.omega
            )));
        }
        if self.forcing.n_components() != 3 {
            return Err(Error::Shape(format!(
                "forcing must have 3 components, got {}",
                self.forcing.n_components()
            )));
        }
        if self.forcing.data().iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("forcing contains non-finite values".into()));
        }
        Ok(())
    }
}

/// `s = ωℓ + s̃` with `s̃ ∈ [-ω/2, ω/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub ell: i64,
    pub s_tilde: f64,
}

pub fn reduce_modulation(s: f64, omega: f64) -> Modulation {
    let ell = (s / omega + 0.5).floor();
    let mut s_tilde = s - omega * ell;
    let mut ell = ell as i64;
    // Guard the half-open interval against rounding at the endpoints.
    if s_tilde >= 0.5 * omega {
        ell += 1;
        s_tilde -= omega;
    } else if s_tilde < -0.5 * omega {
        ell -= 1;
        s_tilde += omega;
    }
    Modulation { ell, s_tilde }
}

/// Direction of a modulation shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Multiply by `exp(i·sign·ωℓt)`: shift temporal mode `k` to `k + sign·ℓ`.
pub fn modulate(field: &SpectralField, ell: i64, sign: Sign) -> Result<SpectralField> {
    let g = *field.grid();
    let shift = sign.value() * ell;
    let mut out = SpectralField::zeros(g, field.n_components());
    for t in 0..g.n_time {
        let k = g.mode_index(t);
        let data = field.slice_data(t);
        let occupied = data.iter().any(|v| *v != ZERO);
        let target = k.checked_add(shift).and_then(|kk| g.mode_slot(kk));
        match target {
            Some(tt) => out.slice_data_mut(tt).copy_from_slice(data),
            None if occupied => {
                return Err(Error::ModeOverflow {
                    shift,
                    k,
                    min: g.k_min(),
                    max: g.k_max(),
                })
            }
            None => {}
        }
    }
    Ok(out)
}

/// `(f₀, f_⊥)`: the `k = 0` slice and the remainder.
pub fn split_time_mean(f: &SpectralField) -> (SpectralField, SpectralField) {
    let g = *f.grid();
    let mut f0 = SpectralField::zeros(g, f.n_components());
    let mut rest = f.clone();
    let t0 = g.mode_slot(0).expect("mode 0 always exists");
    f0.slice_data_mut(t0).copy_from_slice(f.slice_data(t0));
    rest.slice_data_mut(t0).iter_mut().for_each(|v| *v = ZERO);
    (f0, rest)
}

/// Deliberate solver corruptions for exercising the verification suite.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Use `is + iωk - |ξ|²` as the denominator.
    FlipDiffusionSign,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AuxOptions {
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxSolution {
    pub velocity: SpectralField,
    pub pressure: SpectralField,
    pub report: SolveReport,
}

/// Velocity, pressure and the zeroed resonant modes, without norms.
pub(crate) fn solve_aux_fields(
    problem: &AuxProblem,
    options: &AuxOptions,
) -> Result<(SpectralField, SpectralField, Vec<i64>)> {
    problem.validate()?;
    let f = &problem.forcing;
    let g = *f.grid();
    let bg = g.box_grid();
    let omega = problem.omega;
    let Modulation { ell, s_tilde } = reduce_modulation(problem.s, omega);
    let fmax = f.max_abs();
    let per = bg.len();
    let flip = options.fault == Some(Fault::FlipDiffusionSign);

    let mut u = SpectralField::zeros(g, 3);
    let mut p = SpectralField::zeros(g, 1);
    // Modulation as relabeling: mode k of the data is mode k + ℓ on the reduced problem,
    // so D = i(s̃ + ω(k + ℓ)) + |ξ|². No data moves and no mode can overflow.
    let results: Vec<Result<Option<i64>>> = u
        .data_mut()
        .par_chunks_mut(per * 3)
        .zip(p.data_mut().par_chunks_mut(per))
        .enumerate()
        .map(|(t, (us, ps))| {
            let k = g.mode_index(t);
            let kk = (k + ell) as f64;
            let src = f.slice_data(t);
            let mut zeroed = None;
            for idx in 0..per {
                let (i1, i2, i3) = bg.unflat(idx);
                let xi = bg.xi(i1, i2, i3);
                let r2 = xi_sq(&bg, i1, i2, i3);
                let fh = &src[idx * 3..idx * 3 + 3];
                if is_resonant(s_tilde, omega, kk, r2) {
                    // ξ = 0: the projector is the identity.
                    let mag = fh.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                    if mag > RESONANT_FORCING_TOL * fmax {
                        return Err(Error::ResonantForcing { k, magnitude: mag });
                    }
                    zeroed = Some(k);
                    continue;
                }
                let diff = if flip { -r2 } else { r2 };
                let m = 1.0 / Complex64::new(diff, s_tilde + omega * kk);
                let pl = leray_symbol(xi);
                for j in 0..3 {
                    let pf = pl[j][0] * fh[0] + pl[j][1] * fh[1] + pl[j][2] * fh[2];
                    us[idx * 3 + j] = m * pf;
                }
                if r2 > 0.0 {
                    let dot = xi[0] * fh[0] + xi[1] * fh[1] + xi[2] * fh[2];
                    ps[idx] = Complex64::new(0.0, -1.0) * dot / r2;
                }
            }
            Ok(zeroed)
        })
        .collect();
    let mut zeroed = Vec::new();
    for r in results {
        if let Some(k) = r? {
            zeroed.push(k);
        }
    }
    zeroed.sort_unstable();
    Ok((u, p, zeroed))
}

pub fn solve_aux(problem: &AuxProblem, q_list: &[f64]) -> Result<AuxSolution> {
    solve_aux_with(problem, q_list, &AuxOptions::default())
}

pub fn solve_aux_with(problem: &AuxProblem, q_list: &[f64], options: &AuxOptions) -> Result<AuxSolution> {
    for &q in q_list {
        crate::norms::check_exponent(q)?;
    }
    let (u, p, zeroed) = solve_aux_fields(problem, options)?;
    let res = residual_aux(&u, &p, problem)?;
    let dist = dist_to_lattice(problem.s, problem.omega);
    let lq_norms = if q_list.is_empty() {
        Vec::new()
    } else {
        let m = aux_magnitudes(&u, &p, problem);
        q_list.iter().map(|&q| m.entry(q, dist)).collect()
    };
    let report = SolveReport {
        kind: ProblemKind::Aux,
        s: problem.s,
        omega: problem.omega,
        dist,
        empirical_constant: max_constant(&lq_norms),
        lq_norms,
        residual_pde: res.pde,
        residual_div: res.div,
        resonant_modes_zeroed: zeroed,
        time_dependence: None,
        support_fraction: None,
    };
    Ok(AuxSolution {
        velocity: u,
        pressure: p,
        report,
    })
}

fn aux_magnitudes(u: &SpectralField, p: &SpectralField, problem: &AuxProblem) -> Magnitudes {
    let g = *u.grid();
    let bg = g.box_grid();
    let w = g.base_frequency();
    let s = problem.s;
    Magnitudes {
        u: spectral_magnitudes(u, 3, |o, _, _, c| c[o]),
        main_time: spectral_magnitudes(u, 3, |o, t, _, c| {
            Complex64::new(0.0, s + w * g.mode_index(t) as f64) * c[o]
        }),
        hess: weighted_spectral_magnitudes(
            u,
            18,
            |o, _, sl, c| {
                let (a, b, _) = HESSIAN_PAIRS[o % 6];
                second_partial_symbol(&bg, sl, a, b) * c[o / 6]
            },
            |o| HESSIAN_PAIRS[o % 6].2,
        ),
        grad_u: spectral_magnitudes(u, 9, |o, _, sl, c| partial_symbol(&bg, sl[o % 3]) * c[o / 3]),
        grad_p: spectral_magnitudes(p, 3, |o, _, sl, c| partial_symbol(&bg, sl[o]) * c[0]),
        p: spectral_magnitudes(p, 1, |_, _, _, c| c[0]),
        f: spectral_magnitudes(&problem.forcing, 3, |o, _, _, c| c[o]),
        n_time: g.n_time,
        cell: bg.cell_volume(),
    }
}

/// Relative `L²` residuals of the momentum and continuity equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub pde: f64,
    pub div: f64,
}

/// Residuals of `(u, p)` in the auxiliary system, coefficient-wise with exact symbols.
///
/// Both are `L²` norms relative to `‖f‖₂` (absolute when `f = 0`).
pub fn residual_aux(u: &SpectralField, p: &SpectralField, problem: &AuxProblem) -> Result<Residual> {
    let f = &problem.forcing;
    let g = *f.grid();
    if u.grid() != &g || p.grid() != &g || u.n_components() != 3 || p.n_components() != 1 {
        return Err(Error::Shape(
            "residual needs a 3-component velocity and scalar pressure on the forcing grid".into(),
        ));
    }
    let bg = g.box_grid();
    let w = g.base_frequency();
    let per = bg.len();
    let (mut r2, mut d2, mut f2) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..g.n_time {
        let kt = problem.s + w * g.mode_index(t) as f64;
        let (us, ps, fs) = (u.slice_data(t), p.slice_data(t), f.slice_data(t));
        for idx in 0..per {
            let (i1, i2, i3) = bg.unflat(idx);
            let xi = bg.xi(i1, i2, i3);
            let d = Complex64::new(xi_sq(&bg, i1, i2, i3), kt);
            let mut div = ZERO;
            for j in 0..3 {
                let uj = us[idx * 3 + j];
                let r = d * uj + Complex64::new(0.0, xi[j]) * ps[idx] - fs[idx * 3 + j];
                r2 += r.norm_sqr();
                f2 += fs[idx * 3 + j].norm_sqr();
                div += xi[j] * uj;
            }
            d2 += div.norm_sqr();
        }
    }
    let vol = bg.volume();
    let (r, d, fnorm) = ((r2 * vol).sqrt(), (d2 * vol).sqrt(), (f2 * vol).sqrt());
    Ok(if fnorm > 0.0 {
        Residual {
            pde: r / fnorm,
            div: d / fnorm,
        }
    } else {
        Residual { pde: r, div: d }
    })
}
