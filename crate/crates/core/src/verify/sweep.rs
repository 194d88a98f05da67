//! Empirical-constant sweeps: solve over a grid of `(s, ω)` and forcings and tabulate
//! `estimate LHS / ‖f‖_q` for each exponent.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{solve_aux, AuxProblem};
use crate::error::{Error, Result};
use crate::field::{BoxField, BoxSpectrum, ModeSeries, SpectralField};
use crate::generators::{balanced_sigma, localized_solenoidal, single_mode, EnsembleParams};
use crate::grid::{BoxGrid, GridSpec};
use crate::report::{NormEntry, ProblemKind};
use crate::rotation::solve_rot_resolvent;
use crate::spectral::box_to_physical;
use crate::synthesis::{solve_tp, TpProblem};

/// Polynomial degree of the localized forcings used by the rotating kinds.
pub const LOCALIZED_DEGREE: usize = 2;

/// Forcing family of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepForcing {
    /// Random divergence-free ensemble. The rotating kinds use localized curl fields
    /// seeded by the same member seeds.
    Ensemble(EnsembleParams),
    /// `a · exp(iωkt) exp(iξ·x)` with `ξ = 2πm/L`.
    SingleMode { k: i64, m: [i64; 3], amp: [Complex64; 3] },
    Zero,
}

impl SweepForcing {
    fn members(&self) -> usize {
        match self {
            SweepForcing::Ensemble(e) => e.count,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub s_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub forcing: SweepForcing,
    /// Spatial box and resolution. `period` is the reference period for the small-`ω`
    /// exclusion; the auxiliary kind runs on the rotation clock `2π/ω` of each cell.
    pub grid: GridSpec,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.s_values.is_empty() || self.omega_values.is_empty() || self.q_values.is_empty() {
            return Err(Error::InvalidArgument("sweep lists must be nonempty".into()));
        }
        if let Some(s) = self.s_values.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s must be finite, got {s}")));
        }
        if let Some(w) = self.omega_values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {w}")));
        }
        if let Some(q) = self.q_values.iter().find(|q| !(**q > 1.0 && **q < 1.5)) {
            return Err(Error::InvalidArgument(format!("q must lie in (1, 3/2), got {q}")));
        }
        if let SweepForcing::Ensemble(e) = &self.forcing {
            e.validate(&self.grid)?;
        }
        Ok(())
    }

    /// Smallest `ω` the temporal grid resolves: `2π/(period · n_time)`.
    pub fn omega_threshold(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.grid.period * self.grid.n_time as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// Forcing vanishes; no constant is defined.
    ZeroForcing,
    Error,
}

/// One `(ω, s, member, q)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub s: f64,
    pub member: usize,
    pub q: f64,
    pub status: CellStatus,
    pub dist: Option<f64>,
    pub u: Option<f64>,
    /// `dist(s, ωℤ)‖u‖_q`, or the A₂ term for the time-periodic kind.
    pub weighted_u: Option<f64>,
    pub lhs: Option<f64>,
    pub forcing: Option<f64>,
    pub constant: Option<f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub max: f64,
    pub median: f64,
    pub max_over_median: f64,
    /// Row index of the maximum.
    pub argmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: ProblemKind,
    pub spec: SweepSpec,
    pub omega_threshold: f64,
    pub excluded_omegas: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub summary: Option<SweepSummary>,
}

impl SweepTable {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn constants(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.rows.iter().map(|r| r.constant)
    }
}

struct Cell {
    omega: f64,
    s: f64,
    member: usize,
}

pub fn estimate_sweep(spec: &SweepSpec, kind: ProblemKind) -> Result<SweepTable> {
    spec.validate()?;
    let threshold = spec.omega_threshold();
    let (kept, excluded): (Vec<f64>, Vec<f64>) = spec.omega_values.iter().partition(|&&w| w >= threshold);
    if !excluded.is_empty() {
        log::warn!("excluding omega values {excluded:?} below the resolution limit {threshold}");
    }
    let mut cells = Vec::new();
    for &omega in &kept {
        for &s in &spec.s_values {
            for member in 0..spec.forcing.members() {
                cells.push(Cell { omega, s, member });
            }
        }
    }
    let rows: Vec<Vec<SweepRow>> = cells.par_iter().map(|c| run_cell(spec, kind, c)).collect();
    let rows: Vec<SweepRow> = rows.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(SweepTable {
        kind,
        spec: spec.clone(),
        omega_threshold: threshold,
        excluded_omegas: excluded,
        rows,
        summary,
    })
}

fn summarize(rows: &[SweepRow]) -> Option<SweepSummary> {
    let vals: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.constant.map(|c| (i, c)))
        .collect();
    let (argmax, max) = vals.iter().copied().fold(None, |m: Option<(usize, f64)>, (i, c)| match m {
        Some((_, b)) if b >= c => m,
        _ => Some((i, c)),
    })?;
    let mut sorted: Vec<f64> = vals.iter().map(|v| v.1).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Some(SweepSummary {
        cells: n,
        max,
        median,
        max_over_median: max / median,
        argmax,
    })
}

fn blank(c: &Cell, q: f64, status: CellStatus, message: Option<String>) -> SweepRow {
    SweepRow {
        omega: c.omega,
        s: c.s,
        member: c.member,
        q,
        status,
        dist: None,
        u: None,
        weighted_u: None,
        lhs: None,
        forcing: None,
        constant: None,
        message,
    }
}

fn run_cell(spec: &SweepSpec, kind: ProblemKind, c: &Cell) -> Vec<SweepRow> {
    let qs = &spec.q_values;
    let rows = match kind {
        ProblemKind::Aux => aux_cell(spec, c),
        ProblemKind::RotResolvent => rot_cell(spec, c),
        ProblemKind::Tp => tp_cell(spec, c),
    };
    match rows {
        Ok(Some(rows)) => rows,
        Ok(None) => qs.iter().map(|&q| blank(c, q, CellStatus::ZeroForcing, None)).collect(),
        Err(e) => {
            log::debug!("sweep cell omega={} s={} member={}: {e}", c.omega, c.s, c.member);
            qs.iter()
                .map(|&q| blank(c, q, CellStatus::Error, Some(e.to_string())))
                .collect()
        }
    }
}

fn from_entry(c: &Cell, dist: f64, e: &NormEntry) -> SweepRow {
    SweepRow {
        dist: Some(dist),
        u: Some(e.u),
        weighted_u: Some(e.dist_weighted_u),
        lhs: Some(e.lhs),
        forcing: Some(e.forcing),
        constant: e.empirical_constant,
        ..blank(c, e.q, CellStatus::Ok, None)
    }
}

fn aux_forcing(spec: &SweepSpec, grid: &GridSpec, member: usize) -> Result<SpectralField> {
    match &spec.forcing {
        SweepForcing::Ensemble(e) => e.member(grid, member),
        SweepForcing::SingleMode { k, m, amp } => single_mode(grid, *k, *m, *amp),
        SweepForcing::Zero => Ok(SpectralField::zeros(*grid, 3)),
    }
}

/// Localized forcing for the rotating kinds; `salt` separates temporal modes.
fn box_forcing(spec: &SweepSpec, bg: BoxGrid, member: usize, salt: u64) -> Result<BoxField> {
    match &spec.forcing {
        SweepForcing::Ensemble(e) => {
            let seed = e.member_seed(member) ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
            localized_solenoidal(bg, balanced_sigma(&bg), LOCALIZED_DEGREE, seed)
        }
        SweepForcing::SingleMode { m, amp, .. } => {
            let mut spectrum = BoxSpectrum::zeros(bg, 3);
            let mut slots = [0usize; 3];
            for (slot, &mi) in slots.iter_mut().zip(m) {
                *slot = bg
                    .slot_of(mi)
                    .ok_or_else(|| Error::InvalidArgument(format!("wave index {mi} not on the grid")))?;
            }
            for (j, a) in amp.iter().enumerate() {
                let at = spectrum.index(slots[0], slots[1], slots[2], j);
                spectrum.data_mut()[at] = *a;
            }
            Ok(box_to_physical(&spectrum))
        }
        SweepForcing::Zero => Ok(BoxField::zeros(bg, 3)),
    }
}

fn aux_cell(spec: &SweepSpec, c: &Cell) -> Result<Option<Vec<SweepRow>>> {
    let g = &spec.grid;
    let grid = GridSpec::for_rotation(c.omega, g.box_len, g.n_space, g.n_time)?;
    let f = aux_forcing(spec, &grid, c.member)?;
    if f.max_abs() == 0.0 {
        return Ok(None);
    }
    let sol = solve_aux(&AuxProblem::new(c.s, c.omega, f)?, &spec.q_values)?;
    let r = &sol.report;
    Ok(Some(r.lq_norms.iter().map(|e| from_entry(c, r.dist, e)).collect()))
}

fn rot_cell(spec: &SweepSpec, c: &Cell) -> Result<Option<Vec<SweepRow>>> {
    let g = &spec.grid;
    let bg = BoxGrid::new(g.box_len, g.n_space)?;
    let f = box_forcing(spec, bg, c.member, 0)?;
    if f.max_abs() == 0.0 {
        return Ok(None);
    }
    let sol = solve_rot_resolvent(&f, c.s, c.omega, g.n_time, &spec.q_values)?;
    let r = &sol.report;
    Ok(Some(r.lq_norms.iter().map(|e| from_entry(c, r.dist, e)).collect()))
}

/// Time-periodic cell: `s` is the base frequency `2π/T`; the forcing carries modes 1 and 2
/// (or the single requested mode).
fn tp_cell(spec: &SweepSpec, c: &Cell) -> Result<Option<Vec<SweepRow>>> {
    if !(c.s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time-periodic cells read s as the base frequency 2π/T and need s > 0, got {}",
            c.s
        )));
    }
    let g = &spec.grid;
    let bg = BoxGrid::new(g.box_len, g.n_space)?;
    let modes = match &spec.forcing {
        SweepForcing::SingleMode { k, .. } => vec![(*k, box_forcing(spec, bg, c.member, 0)?)],
        _ => vec![
            (1, box_forcing(spec, bg, c.member, 1)?),
            (2, box_forcing(spec, bg, c.member, 2)?),
        ],
    };
    if modes.iter().all(|(_, f)| f.max_abs() == 0.0) {
        return Ok(None);
    }
    let period = 2.0 * std::f64::consts::PI / c.s;
    let problem = TpProblem::new(c.omega, ModeSeries::new(period, modes)?, g.n_time)?;
    let sol = solve_tp(&problem, &spec.q_values)?;
    let r = &sol.report;
    Ok(Some(
        r.a_norms
            .iter()
            .zip(&r.a2_dist_norm)
            .map(|(a, a2)| {
                let lhs = a.dt_u_plus_rotation + a.hess_u + a.grad_p + a2.value;
                SweepRow {
                    dist: Some(a2.d),
                    u: Some(a.u),
                    weighted_u: Some(a2.value),
                    lhs: Some(lhs),
                    forcing: Some(a.forcing),
                    constant: (a.forcing > 0.0).then(|| lhs / a.forcing),
                    ..blank(c, a.q, CellStatus::Ok, None)
                }
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(forcing: SweepForcing) -> SweepSpec {
        SweepSpec {
            s_values: vec![0.0, 0.3, 1.7],
            omega_values: vec![1.0],
            q_values: vec![1.2, 1.4],
            forcing,
            grid: GridSpec::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap(),
        }
    }

    #[test]
    fn zero_forcing_is_marked() {
        let t = estimate_sweep(&spec(SweepForcing::Zero), ProblemKind::Aux).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert!(t.rows.iter().all(|r| r.status == CellStatus::ZeroForcing && r.constant.is_none()));
        assert!(t.summary.is_none());
    }

    #[test]
    fn small_omega_is_excluded() {
        let mut sp = spec(SweepForcing::Ensemble(EnsembleParams::new(1, 1)));
        sp.omega_values = vec![0.1, 1.0];
        let t = estimate_sweep(&sp, ProblemKind::Aux).unwrap();
        assert_eq!(t.excluded_omegas, vec![0.1]);
        assert!((t.omega_threshold - 0.125).abs() < 1e-15);
        assert!(t.rows.iter().all(|r| r.omega == 1.0));
    }

    #[test]
    fn errors_stay_in_table() {
        // Unlocalized single mode cannot be conjugated; s = 0 is not a base frequency.
        let f = SweepForcing::SingleMode {
            k: 0,
            m: [1, 0, 0],
            amp: [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        let t = estimate_sweep(&spec(f.clone()), ProblemKind::RotResolvent).unwrap();
        assert!(t.rows.iter().all(|r| r.status == CellStatus::Error));
        assert!(t.rows[0].message.as_deref().unwrap().contains("support"));
        let t = estimate_sweep(&spec(f), ProblemKind::Tp).unwrap();
        assert_eq!(t.rows[0].status, CellStatus::Error);
    }

    #[test]
    fn rejects_q_outside_range() {
        let mut sp = spec(SweepForcing::Zero);
        sp.q_values = vec![1.5];
        assert!(estimate_sweep(&sp, ProblemKind::Aux).is_err());
    }

    #[test]
    fn summary_median_and_argmax() {
        let mk = |c: Option<f64>| SweepRow {
            constant: c,
            ..blank(&Cell { omega: 1.0, s: 0.0, member: 0 }, 1.2, CellStatus::Ok, None)
        };
        let rows = vec![mk(Some(1.0)), mk(None), mk(Some(4.0)), mk(Some(2.0)), mk(Some(3.0))];
        let s = summarize(&rows).unwrap();
        assert_eq!((s.cells, s.argmax), (4, 2));
        assert_eq!((s.max, s.median), (4.0, 2.5));
    }
}
