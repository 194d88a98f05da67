//! Sampled suprema of the weighted derivatives `|η^α ξ^β ∂_η^α ∂_ξ^β M|` of the
//! extended symbols, the quantities bounded by the Marcinkiewicz multiplier theorem.
//!
//! The weighted derivatives are invariant in modulus under `ξ_i → -ξ_i`, so only
//! `ξ_i ≥ 0` is sampled; `η` is sampled with both signs. Each row's grid maximum is
//! polished by a deterministic pattern search in log coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{weighted_derivative, weighted_derivative_table, weighted_derivative_tables, SymbolId};

/// Declared tolerance on `max_s sup / min_s sup`.
pub const UNIFORMITY_TOL: f64 = 1.5;
/// Allowed relative change of a supremum under doubling of the grid density.
pub const REFINEMENT_TOL: f64 = 0.05;

/// Sample grid of the scan; the `η` band around the cutoff transition depends on `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    /// Log-spaced points per decade in `|η|` and in each `ξ_i`.
    pub eta_per_decade: usize,
    pub xi_per_decade: usize,
    /// Decades covered, as powers of ten.
    pub min_exp: i32,
    pub max_exp: i32,
    /// Linear points across `η ∈ (s/ω)·[-2.2, 0.2]`, where `χ(1 + ωη/s)` varies.
    pub band_points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            eta_per_decade: 2,
            xi_per_decade: 1,
            min_exp: -3,
            max_exp: 3,
            band_points: 12,
        }
    }
}

fn log_points(min_exp: i32, max_exp: i32, per_decade: usize) -> Vec<f64> {
    let n = (max_exp - min_exp) as usize * per_decade;
    (0..=n)
        .map(|i| 10f64.powf(min_exp as f64 + i as f64 / per_decade as f64))
        .collect()
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.eta_per_decade == 0 || self.xi_per_decade == 0 || self.min_exp >= self.max_exp {
            return Err(Error::InvalidArgument("scan grid needs a positive density and range".into()));
        }
        if self.min_exp > -3 || self.max_exp < 3 {
            return Err(Error::InvalidArgument(
                "scan grid must span at least [1e-3, 1e3] per axis".into(),
            ));
        }
        Ok(())
    }

    /// Twice the density on every axis.
    pub fn refined(&self) -> ScanGrid {
        ScanGrid {
            eta_per_decade: 2 * self.eta_per_decade,
            xi_per_decade: 2 * self.xi_per_decade,
            band_points: 2 * self.band_points,
            ..*self
        }
    }

    pub fn eta_points(&self, s: f64, omega: f64) -> Vec<f64> {
        let mags = log_points(self.min_exp, self.max_exp, self.eta_per_decade);
        let mut v: Vec<f64> = mags.iter().map(|m| -m).rev().collect();
        v.push(0.0);
        v.extend(&mags);
        let b = self.band_points.max(2);
        for i in 0..b {
            let x = -2.2 + 2.4 * i as f64 / (b - 1) as f64;
            v.push(x * s / omega);
        }
        v
    }

    pub fn xi_axis(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(log_points(self.min_exp, self.max_exp, self.xi_per_decade));
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanValue {
    pub s: f64,
    /// Supremum after local polishing.
    pub sup: f64,
    /// Maximum over the grid points alone.
    pub grid_sup: f64,
    /// `(η, ξ₁, ξ₂, ξ₃)` of the polished supremum.
    pub argmax: [f64; 4],
    /// Finite-difference value at the argmax and its relative deviation from the jet value.
    pub fd_value: f64,
    pub fd_rel_diff: f64,
    pub fd_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub symbol: String,
    pub alpha: u8,
    pub beta: [u8; 3],
    pub per_s: Vec<ScanValue>,
    /// `max_s sup / min_s sup`.
    pub uniformity: f64,
}

impl ScanRow {
    pub fn max_sup(&self) -> f64 {
        self.per_s.iter().map(|v| v.sup).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub omega: f64,
    pub s_values: Vec<f64>,
    pub grid: ScanGrid,
    pub rows: Vec<ScanRow>,
    /// Largest row uniformity factor.
    pub uniformity: f64,
    pub tolerance: f64,
    pub stable: bool,
    pub all_finite: bool,
    /// Every finite-difference cross-check at an argmax agreed with the jets.
    pub fd_consistent: bool,
}

impl ScanResult {
    pub fn row(&self, id: SymbolId, alpha: u8, beta: [u8; 3]) -> Option<&ScanRow> {
        let label = id.label();
        self.rows
            .iter()
            .find(|r| r.symbol == label && r.alpha == alpha && r.beta == beta)
    }
}

/// `(α, β)` of a derivative mask.
pub fn mask_orders(mask: usize) -> (u8, [u8; 3]) {
    (
        (mask & 1) as u8,
        [((mask >> 1) & 1) as u8, ((mask >> 2) & 1) as u8, ((mask >> 3) & 1) as u8],
    )
}

#[derive(Clone, Copy, Debug)]
struct Best {
    value: f64,
    at: [f64; 4],
}

/// Grid starting points polished per row.
const CANDIDATES: usize = 12;
/// Evaluation budget of one polish.
const POLISH_EVALS: usize = 800;

/// NaN ranks first so that it surfaces.
fn ranks_above(a: f64, b: f64) -> bool {
    a.is_nan() && !b.is_nan() || a > b
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// Log coordinates used for distances and polishing: `sign(η)·log10|η|` keeps both signs
/// of `η` apart.
fn log_coords(p: &[f64; 4]) -> [f64; 4] {
    p.map(|v| if v == 0.0 { f64::NEG_INFINITY } else { v.signum() * (1.0 + v.abs().log10() + 10.0) })
}

/// Greedy pick in ranked order, skipping points within one decade of an earlier pick.
fn select_diverse(ranked: Vec<Best>) -> Vec<Best> {
    let mut out: Vec<Best> = Vec::with_capacity(CANDIDATES);
    for c in ranked {
        let lc = log_coords(&c.at);
        let near = out.iter().any(|o| {
            let lo = log_coords(&o.at);
            lc.iter().zip(&lo).all(|(a, b)| a == b || (a - b).abs() < 1.0)
        });
        if !near {
            out.push(c);
            if out.len() == CANDIDATES {
                break;
            }
        }
    }
    out
}

/// Starting points for every symbol and mask: the largest grid values among points that
/// are maximal along each of the four grid axes. Indexed `[symbol][mask]`.
fn grid_candidates(s: f64, omega: f64, grid: &ScanGrid) -> Result<Vec<Vec<Vec<Best>>>> {
    let etas = sorted_unique(grid.eta_points(s, omega));
    let xi = grid.xi_axis();
    let (ne, nx) = (etas.len(), xi.len());
    let plane = nx * nx * nx;
    let n_ids = SymbolId::all().len();
    // One pass shares the χ/D jet between symbols; planes hold `[point][symbol]`.
    let planes: Vec<Vec<[f64; 16]>> = etas
        .par_iter()
        .map(|&eta| -> Result<Vec<[f64; 16]>> {
            let mut out = Vec::with_capacity(plane * n_ids);
            for &a in &xi {
                for &b in &xi {
                    for &c in &xi {
                        out.extend(weighted_derivative_tables(s, omega, eta, [a, b, c])?);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let value = |idx: usize, id: usize, mask: usize| planes[idx / plane][(idx % plane) * n_ids + id][mask];
    let point = |idx: usize| {
        let (e, r) = (idx / plane, idx % plane);
        [etas[e], xi[r / (nx * nx)], xi[(r / nx) % nx], xi[r % nx]]
    };
    let strides = [plane, nx * nx, nx, 1];
    let extents = [ne, nx, nx, nx];
    let coords = |idx: usize| [idx / plane, (idx / (nx * nx)) % nx, (idx / nx) % nx, idx % nx];
    let total = ne * plane;
    let out = (0..n_ids * 16)
        .into_par_iter()
        .map(|job| {
            let (id, mask) = (job / 16, job % 16);
            let vals: Vec<f64> = (0..total).map(|idx| value(idx, id, mask)).collect();
            let mut cands: Vec<Best> = Vec::new();
            for (idx, &v) in vals.iter().enumerate() {
                let c = coords(idx);
                let local = (0..4).all(|ax| {
                    let lower = c[ax] == 0 || !ranks_above(vals[idx - strides[ax]], v);
                    let upper = c[ax] + 1 == extents[ax] || !ranks_above(vals[idx + strides[ax]], v);
                    lower && upper
                });
                if local {
                    cands.push(Best { value: v, at: point(idx) });
                }
            }
            // Stable sort keeps grid order among ties, so the choice is deterministic.
            cands.sort_by(|a, b| {
                if ranks_above(a.value, b.value) {
                    std::cmp::Ordering::Less
                } else if ranks_above(b.value, a.value) {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            });
            select_diverse(cands)
        })
        .collect::<Vec<_>>();
    Ok(out.chunks(16).map(<[_]>::to_vec).collect())
}

/// Nelder-Mead ascent in `log10` of the nonzero magnitudes, confined to the scanned range;
/// signs and zero coordinates stay fixed.
fn polish(id: SymbolId, mask: usize, s: f64, omega: f64, start: Best, step: f64, grid: &ScanGrid) -> Result<Best> {
    if !start.value.is_finite() {
        return Ok(start);
    }
    let free: Vec<usize> = (0..4).filter(|&a| start.at[a] != 0.0).collect();
    if free.is_empty() {
        return Ok(start);
    }
    let (lo, hi) = (grid.min_exp as f64, grid.max_exp as f64);
    let to_point = |y: &[f64]| {
        let mut p = start.at;
        for (k, &a) in free.iter().enumerate() {
            p[a] = start.at[a].signum() * 10f64.powf(y[k].clamp(lo, hi));
        }
        p
    };
    let eval = |y: &[f64]| -> Result<f64> {
        let p = to_point(y);
        Ok(weighted_derivative_table(id, s, omega, p[0], [p[1], p[2], p[3]])?[mask])
    };
    let n = free.len();
    let y0: Vec<f64> = free.iter().map(|&a| start.at[a].abs().log10()).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(y0.clone(), start.value)];
    for k in 0..n {
        let mut y = y0.clone();
        y[k] += if y[k] + step <= hi { step } else { -step };
        let v = eval(&y)?;
        simplex.push((y, v));
    }
    let mut evals = n;
    let order = |sx: &mut Vec<(Vec<f64>, f64)>| sx.sort_by(|a, b| b.1.total_cmp(&a.1));
    while evals < POLISH_EVALS {
        order(&mut simplex);
        let size = simplex[1..]
            .iter()
            .map(|(y, _)| y.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < 1e-6 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(y, _)| y[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| (c + t * (c - w)).clamp(lo, hi))
                .collect()
        };
        let yr = along(1.0);
        let vr = eval(&yr)?;
        evals += 1;
        if vr > simplex[0].1 {
            let ye = along(2.0);
            let ve = eval(&ye)?;
            evals += 1;
            simplex[n] = if ve > vr { (ye, ve) } else { (yr, vr) };
        } else if vr > simplex[n - 1].1 {
            simplex[n] = (yr, vr);
        } else {
            let yc = along(if vr > worst.1 { 0.5 } else { -0.5 });
            let vc = eval(&yc)?;
            evals += 1;
            if vc > worst.1.max(vr) {
                simplex[n] = (yc, vc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let y: Vec<f64> = item.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    let v = eval(&y)?;
                    *item = (y, v);
                }
                evals += n;
            }
        }
    }
    order(&mut simplex);
    let (y, v) = &simplex[0];
    Ok(if *v > start.value {
        Best { value: *v, at: to_point(y) }
    } else {
        start
    })
}

/// Suprema of all sixteen weighted derivatives of each extended symbol, per `s`.
pub fn marcinkiewicz_scan(s_list: &[f64], omega: f64, grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if s_list.is_empty() {
        return Err(Error::InvalidArgument("scan needs at least one s".into()));
    }
    for &s in s_list {
        if s == 0.0 || !s.is_finite() || s.abs() > 0.5 * omega {
            return Err(Error::InvalidArgument(format!(
                "scan needs 0 < |s| <= ω/2, got s = {s}"
            )));
        }
    }
    let ids = SymbolId::all();
    let step = 0.5 / grid.xi_per_decade.min(grid.eta_per_decade) as f64;
    let mut per_s = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let mut values = Vec::with_capacity(ids.len() * 16);
        let all_cands = grid_candidates(s, omega, grid)?;
        for (&id, cands) in ids.iter().zip(all_cands) {
            let polished: Vec<(Best, Best)> = cands
                .par_iter()
                .enumerate()
                .map(|(mask, list)| -> Result<(Best, Best)> {
                    let start = list[0];
                    let mut b = start;
                    for c in list {
                        let p = polish(id, mask, s, omega, *c, step, grid)?;
                        if ranks_above(p.value, b.value) {
                            b = p;
                        }
                    }
                    Ok((start, b))
                })
                .collect::<Result<_>>()?;
            for (mask, (start, b)) in polished.into_iter().enumerate() {
                let (alpha, beta) = mask_orders(mask);
                let fd = weighted_derivative(id, s, omega, b.at[0], [b.at[1], b.at[2], b.at[3]], alpha, beta)?;
                let fd_rel_diff = if b.value > 0.0 {
                    (fd.value - b.value).abs() / b.value
                } else {
                    fd.value
                };
                values.push(ScanValue {
                    s,
                    sup: b.value,
                    grid_sup: start.value,
                    argmax: b.at,
                    fd_value: fd.value,
                    fd_rel_diff,
                    fd_consistent: fd.consistent,
                });
            }
        }
        per_s.push(values);
    }

    let mut rows = Vec::with_capacity(ids.len() * 16);
    for (i, id) in ids.iter().enumerate() {
        for mask in 0..16 {
            let vals: Vec<ScanValue> = per_s.iter().map(|v| v[i * 16 + mask].clone()).collect();
            let hi = vals.iter().map(|v| v.sup).fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().map(|v| v.sup).fold(f64::INFINITY, f64::min);
            let uniformity = if hi == 0.0 {
                1.0
            } else if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            };
            let (alpha, beta) = mask_orders(mask);
            rows.push(ScanRow {
                symbol: id.label(),
                alpha,
                beta,
                per_s: vals,
                uniformity,
            });
        }
    }
    let all_finite = rows.iter().all(|r| r.per_s.iter().all(|v| v.sup.is_finite()));
    let uniformity = rows.iter().map(|r| r.uniformity).fold(1.0, f64::max);
    let fd_consistent = rows
        .iter()
        .all(|r| r.per_s.iter().all(|v| v.fd_consistent && v.fd_rel_diff <= 1e-3));
    Ok(ScanResult {
        omega,
        s_values: s_list.to_vec(),
        grid: *grid,
        rows,
        uniformity,
        tolerance: UNIFORMITY_TOL,
        stable: all_finite && uniformity <= UNIFORMITY_TOL,
        all_finite,
        fd_consistent,
    })
}

/// Largest relative change of any supremum between two scans of the same rows.
pub fn refinement_change(coarse: &ScanResult, fine: &ScanResult) -> Result<f64> {
    if coarse.rows.len() != fine.rows.len() || coarse.s_values != fine.s_values {
        return Err(Error::InvalidArgument("scans cover different rows or s values".into()));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in coarse.rows.iter().zip(&fine.rows) {
        for (va, vb) in a.per_s.iter().zip(&b.per_s) {
            let scale = va.sup.max(vb.sup);
            if scale > 0.0 {
                worst = worst.max((va.sup - vb.sup).abs() / scale);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_required_range() {
        let g = ScanGrid::default();
        let xi = g.xi_axis();
        assert_eq!(xi[0], 0.0);
        assert!((xi[1] - 1e-3).abs() < 1e-18 && (xi.last().unwrap() - 1e3).abs() < 1e-9);
        let eta = g.eta_points(0.25, 1.0);
        assert!(eta.iter().any(|&e| e <= -1e3 + 1e-9) && eta.iter().any(|&e| e >= 1e3 - 1e-9));
        assert!(ScanGrid { min_exp: -2, ..g }.validate().is_err());
    }

    #[test]
    fn rejects_bad_s() {
        let g = ScanGrid::default();
        assert!(marcinkiewicz_scan(&[0.0], 1.0, &g).is_err());
        assert!(marcinkiewicz_scan(&[0.6], 1.0, &g).is_err());
    }
}
