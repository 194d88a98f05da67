//! Rotating frame about the x₁-axis.
//!
//! `Q(t)` rotates the `(x₂, x₃)` plane by `ωt`, so `Q'(t)x = ω e₁∧(Q(t)x)`. A field `ũ`
//! in the inertial frame corresponds to `u(t, x) = Q(t) ũ(t, Qᵀ(t)x)` in the rotating
//! frame, and then `Q ∂_t ũ = ∂_t u + ω(e₁∧x·∇u - e₁∧u)`. The rotating resolvent
//! problem is therefore solved by conjugating its time-independent forcing into the
//! inertial frame, solving the auxiliary problem there, conjugating back and averaging
//! over one rotation period.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{solve_aux_fields, AuxOptions, AuxProblem, Residual};
use crate::error::{Error, Result};
use crate::field::{BoxField, PhysicalField, ZERO};
use crate::grid::{BoxGrid, GridSpec};
use crate::interp::eval_rotated;
use crate::report::{
    box_magnitudes, max_constant, weighted_box_magnitudes, Magnitudes, ProblemKind, SolveReport, HESSIAN_PAIRS,
};
use crate::resonance::dist_to_lattice;
use crate::spectral::{
    box_derivative, box_to_physical, box_to_spectral, partial_symbol, second_partial_symbol, to_physical,
    to_spectral, Derivative,
};

/// Largest admissible fraction of `L²` mass outside the inscribed ball.
pub const SUPPORT_TOL: f64 = 1e-8;

pub type Matrix3 = [[f64; 3]; 3];

/// `Q(t)`: identity on e₁, rotation by `ωt` on `(e₂, e₃)`.
pub fn q_matrix(omega: f64, t: f64) -> Matrix3 {
    let (s, c) = (omega * t).rem_euclid(2.0 * PI).sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub fn mat_vec(m: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn transpose(m: &Matrix3) -> Matrix3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = *v;
        }
    }
    t
}

/// `e₁ ∧ x = (0, -x₃, x₂)`.
pub fn e1_cross(x: [f64; 3]) -> [f64; 3] {
    [0.0, -x[2], x[1]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationFrame {
    pub omega: f64,
    pub period: f64,
}

impl RotationFrame {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        Ok(RotationFrame {
            omega,
            period: 2.0 * PI / omega,
        })
    }

    pub fn q(&self, t: f64) -> Matrix3 {
        q_matrix(self.omega, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `ũ(t, x) = Qᵀ(t) u(t, Q(t)x)`.
    ToInertial,
    /// `u(t, x) = Q(t) ũ(t, Qᵀ(t)x)`.
    ToRotating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Vector,
    Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub radius: f64,
    pub outside_mass_fraction: f64,
}

impl SupportCheck {
    pub fn passes(&self) -> bool {
        self.outside_mass_fraction <= SUPPORT_TOL
    }
}

fn outside_ball(grid: &BoxGrid, idx: usize) -> bool {
    let (i1, i2, i3) = grid.unflat(idx);
    let x = grid.point(i1, i2, i3);
    let r = 0.5 * grid.box_len;
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > r * r
}

/// Per-component mean over the grid points outside the inscribed ball.
///
/// This constant rotates exactly (a pressure gauge, a uniform flow), so it is split off
/// before the support check and before interpolation.
pub fn far_field_constant(field: &BoxField) -> Vec<Complex64> {
    let g = field.grid();
    let nc = field.n_components();
    let mut sum = vec![ZERO; nc];
    let mut count = 0usize;
    for idx in (0..g.len()).filter(|&idx| outside_ball(g, idx)) {
        for (c, acc) in sum.iter_mut().enumerate() {
            *acc += field.data()[idx * nc + c];
        }
        count += 1;
    }
    if count > 0 {
        sum.iter_mut().for_each(|v| *v /= count as f64);
    }
    sum
}

fn without_constant(field: &BoxField, c: &[Complex64]) -> BoxField {
    let nc = c.len();
    let mut out = field.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v -= c[i % nc];
    }
    out
}

/// Fraction of the `L²` mass outside the ball of radius `L/2`, after removing the
/// far-field constant. Several fields are checked as one stacked field.
pub fn support_check_joint(fields: &[&BoxField]) -> SupportCheck {
    let mut total = 0.0;
    let mut outside = 0.0;
    let mut radius = 0.0;
    for field in fields {
        let g = field.grid();
        radius = 0.5 * g.box_len;
        let c = far_field_constant(field);
        let rest = without_constant(field, &c);
        for (idx, m) in rest.magnitudes().iter().enumerate() {
            let m2 = m * m;
            total += m2;
            if outside_ball(g, idx) {
                outside += m2;
            }
        }
    }
    SupportCheck {
        radius,
        outside_mass_fraction: if total > 0.0 { outside / total } else { 0.0 },
    }
}

pub fn support_check(field: &BoxField) -> SupportCheck {
    support_check_joint(&[field])
}

fn require_support(fields: &[&BoxField], slice: usize) -> Result<SupportCheck> {
    let c = support_check_joint(fields);
    if c.passes() {
        Ok(c)
    } else {
        Err(Error::SupportViolation {
            fraction: c.outside_mass_fraction,
            radius: c.radius,
            slice,
        })
    }
}

fn check_kind(kind: FieldKind, nc: usize) -> Result<()> {
    match (kind, nc) {
        (FieldKind::Vector, 3) | (FieldKind::Scalar, _) => Ok(()),
        (FieldKind::Vector, n) => Err(Error::Shape(format!(
            "vector conjugation needs 3 components, got {n}"
        ))),
    }
}

/// Rotate one slice: argument by `Q` or `Qᵀ`, components by the inverse.
fn conjugate_slice(slice: &BoxField, omega: f64, t: f64, direction: Direction, kind: FieldKind) -> BoxField {
    let angle = (omega * t).rem_euclid(2.0 * PI);
    let q = q_matrix(omega, t);
    let (arg_angle, frame) = match direction {
        Direction::ToInertial => (angle, transpose(&q)),
        Direction::ToRotating => (-angle, q),
    };
    let c = far_field_constant(slice);
    let mut out = eval_rotated(&without_constant(slice, &c), arg_angle);
    let nc = c.len();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v += c[i % nc];
    }
    if kind == FieldKind::Vector {
        for chunk in out.data_mut().chunks_exact_mut(3) {
            let v = [chunk[0], chunk[1], chunk[2]];
            for (i, c) in chunk.iter_mut().enumerate() {
                *c = frame[i][0] * v[0] + frame[i][1] * v[1] + frame[i][2] * v[2];
            }
        }
    }
    out
}

pub(crate) fn conjugate_unchecked(
    field: &PhysicalField,
    omega: f64,
    direction: Direction,
    kind: FieldKind,
) -> PhysicalField {
    let g = *field.grid();
    let slices: Vec<BoxField> = (0..g.n_time)
        .into_par_iter()
        .map(|t| conjugate_slice(&field.slice(t), omega, g.time(t), direction, kind))
        .collect();
    PhysicalField::from_slices(g, &slices).expect("slices share the grid")
}

fn check_clock(grid: &GridSpec, frame: &RotationFrame) -> Result<()> {
    if (grid.period - frame.period).abs() > 1e-12 * frame.period {
        return Err(Error::InvalidGrid(format!(
            "field period {} differs from the rotation period {}",
            grid.period, frame.period
        )));
    }
    Ok(())
}

/// Change of frame with trigonometric interpolation at the rotated points.
pub fn conjugate_field(
    field: &PhysicalField,
    frame: &RotationFrame,
    direction: Direction,
    kind: FieldKind,
) -> Result<PhysicalField> {
    check_clock(field.grid(), frame)?;
    check_kind(kind, field.n_components())?;
    for t in 0..field.grid().n_time {
        require_support(&[&field.slice(t)], t)?;
    }
    Ok(conjugate_unchecked(field, frame.omega, direction, kind))
}

/// `(e₁∧x)·∇v - e₁∧v` for a vector field, `(e₁∧x)·∇p` for a scalar.
pub fn rotation_term(v: &BoxField) -> Result<BoxField> {
    let nc = v.n_components();
    if nc != 1 && nc != 3 {
        return Err(Error::Shape(format!("rotation term needs 1 or 3 components, got {nc}")));
    }
    let g = *v.grid();
    let grad = box_to_physical(&box_derivative(&box_to_spectral(v), Derivative::Grad)?);
    let mut out = BoxField::zeros(g, nc);
    for idx in 0..g.len() {
        let (i1, i2, i3) = g.unflat(idx);
        let w = e1_cross(g.point(i1, i2, i3));
        for c in 0..nc {
            let gr = &grad.data()[(idx * nc + c) * 3..(idx * nc + c) * 3 + 3];
            let mut val = w[1] * gr[1] + w[2] * gr[2];
            if nc == 3 {
                let vv = &v.data()[idx * 3..idx * 3 + 3];
                let cross = [ZERO, -vv[2], vv[1]];
                val -= cross[c];
            }
            out.data_mut()[idx * nc + c] = val;
        }
    }
    Ok(out)
}

/// `isv + ω((e₁∧x)·∇v - e₁∧v) - Δv + ∇p`.
pub fn apply_rot_operator(v: &BoxField, p: &BoxField, s: f64, omega: f64) -> Result<BoxField> {
    if v.n_components() != 3 || p.n_components() != 1 || v.grid() != p.grid() {
        return Err(Error::Shape(
            "need a 3-component velocity and a scalar pressure on one grid".into(),
        ));
    }
    let vs = box_to_spectral(v);
    let lap = box_to_physical(&box_derivative(&vs, Derivative::Laplacian)?);
    let gp = box_to_physical(&box_derivative(&box_to_spectral(p), Derivative::Grad)?);
    let rot = rotation_term(v)?;
    let is = Complex64::new(0.0, s);
    let mut out = BoxField::zeros(*v.grid(), 3);
    for (i, o) in out.data_mut().iter_mut().enumerate() {
        *o = is * v.data()[i] + omega * rot.data()[i] - lap.data()[i] + gp.data()[i];
    }
    Ok(out)
}

fn residual_unchecked(v: &BoxField, p: &BoxField, g: &BoxField, s: f64, omega: f64) -> Result<Residual> {
    if g.grid() != v.grid() || g.n_components() != 3 {
        return Err(Error::Shape("forcing must be a 3-component field on the velocity grid".into()));
    }
    let lhs = apply_rot_operator(v, p, s, omega)?;
    let r = (&lhs - g).raw_l2();
    let div = box_to_physical(&box_derivative(&box_to_spectral(v), Derivative::Div)?).raw_l2();
    let gn = g.raw_l2();
    // Raw sums share the cell weight, which cancels in the ratios.
    let w = g.grid().cell_volume().sqrt();
    Ok(if gn > 0.0 {
        Residual { pde: r / gn, div: div / gn }
    } else {
        Residual { pde: r * w, div: div * w }
    })
}

/// Relative `L²` residuals of the rotating resolvent system.
pub fn rot_residual(v: &BoxField, p: &BoxField, g: &BoxField, s: f64, omega: f64) -> Result<Residual> {
    require_support(&[v], 0)?;
    residual_unchecked(v, p, g, s, omega)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotSolution {
    pub velocity: BoxField,
    pub pressure: BoxField,
    pub report: SolveReport,
}

/// Solve `isv + ω((e₁∧x)·∇v - e₁∧v) - Δv + ∇p = g`, `div v = 0`.
///
/// `n_time` samples resolve one rotation period; the conjugated forcing must have its
/// angular content about e₁ within `n_time/2 - 1` (including the ±1 from rotating
/// components).
pub fn solve_rot_resolvent(g: &BoxField, s: f64, omega: f64, n_time: usize, q_list: &[f64]) -> Result<RotSolution> {
    solve_rot_resolvent_with(g, s, omega, n_time, q_list, &AuxOptions::default())
}

pub fn solve_rot_resolvent_with(
    g: &BoxField,
    s: f64,
    omega: f64,
    n_time: usize,
    q_list: &[f64],
    options: &AuxOptions,
) -> Result<RotSolution> {
    for &q in q_list {
        crate::norms::check_exponent(q)?;
    }
    if g.n_components() != 3 {
        return Err(Error::Shape(format!("forcing must have 3 components, got {}", g.n_components())));
    }
    let frame = RotationFrame::new(omega)?;
    let bg = *g.grid();
    let grid = GridSpec::new(frame.period, bg.box_len, bg.n, n_time)?;
    require_support(&[g], 0)?;

    let f = PhysicalField::constant_in_time(grid, g)?;
    let f_inertial = conjugate_unchecked(&f, omega, Direction::ToInertial, FieldKind::Vector);
    let problem = AuxProblem::new(s, omega, to_spectral(&f_inertial))?;
    let (u_hat, p_hat, zeroed) = solve_aux_fields(&problem, options)?;
    let u_inertial = to_physical(&u_hat);
    let p_inertial = to_physical(&p_hat);
    for t in 0..n_time {
        require_support(&[&u_inertial.slice(t), &p_inertial.slice(t)], t)?;
    }
    let u = conjugate_unchecked(&u_inertial, omega, Direction::ToRotating, FieldKind::Vector);
    let pr = conjugate_unchecked(&p_inertial, omega, Direction::ToRotating, FieldKind::Scalar);
    let v = u.time_mean();
    let p = pr.time_mean();
    let time_dependence = temporal_variation(&[(&u, &v), (&pr, &p)]);

    let res = residual_unchecked(&v, &p, g, s, omega)?;
    let dist = dist_to_lattice(s, omega);
    let lq_norms = if q_list.is_empty() {
        Vec::new()
    } else {
        let m = rot_magnitudes(&v, &p, g, s, omega)?;
        q_list.iter().map(|&q| m.entry(q, dist)).collect()
    };
    let report = SolveReport {
        kind: ProblemKind::RotResolvent,
        s,
        omega,
        dist,
        empirical_constant: max_constant(&lq_norms),
        lq_norms,
        residual_pde: res.pde,
        residual_div: res.div,
        resonant_modes_zeroed: zeroed,
        time_dependence: Some(time_dependence),
        support_fraction: Some(support_check_joint(&[&v, &p]).outside_mass_fraction),
    };
    Ok(RotSolution {
        velocity: v,
        pressure: p,
        report,
    })
}

/// `sqrt(mean_t ‖w(t) - mean‖²) / ‖mean‖` over the stacked fields, the non-mean temporal
/// content by Parseval. Stacking keeps round-off in a vanishing pressure from dominating.
fn temporal_variation(fields: &[(&PhysicalField, &BoxField)]) -> f64 {
    let mut var = 0.0;
    let mut base = 0.0;
    for (u, mean) in fields {
        let n_time = u.grid().n_time;
        for t in 0..n_time {
            var += u
                .slice_data(t)
                .iter()
                .zip(mean.data())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / n_time as f64;
        }
        base += mean.raw_l2().powi(2);
    }
    if base > 0.0 {
        (var / base).sqrt()
    } else if var == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub(crate) fn rot_magnitudes(v: &BoxField, p: &BoxField, g: &BoxField, s: f64, omega: f64) -> Result<Magnitudes> {
    let grid = *v.grid();
    let vs = box_to_spectral(v);
    let ps = box_to_spectral(p);
    let rot = rotation_term(v)?;
    let is = Complex64::new(0.0, s);
    let main: Vec<Complex64> = v.data().iter().zip(rot.data()).map(|(a, r)| is * a + omega * r).collect();
    let main = BoxField::from_data(grid, 3, main)?;
    Ok(Magnitudes {
        u: v.magnitudes(),
        main_time: main.magnitudes(),
        hess: weighted_box_magnitudes(
            &vs,
            18,
            |o, sl, c| {
                let (a, b, _) = HESSIAN_PAIRS[o % 6];
                second_partial_symbol(&grid, sl, a, b) * c[o / 6]
            },
            |o| HESSIAN_PAIRS[o % 6].2,
        ),
        grad_u: box_magnitudes(&vs, 9, |o, sl, c| partial_symbol(&grid, sl[o % 3]) * c[o / 3]),
        grad_p: box_magnitudes(&ps, 3, |o, sl, c| partial_symbol(&grid, sl[o]) * c[0]),
        p: p.magnitudes(),
        f: g.magnitudes(),
        n_time: 1,
        cell: grid.cell_volume(),
    })
}
