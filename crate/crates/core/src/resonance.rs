//! Arithmetic of the resonance lattice `ωℤ` and of the sum lattice `(2π/T)ℤ + ωℤ`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values of `|a|` at or below `ZERO_TOL·ω` count as zero in lattice searches.
pub const ZERO_TOL: f64 = 1e-12;
/// Relative tolerance for matching a continued-fraction convergent.
pub const RATIONAL_TOL: f64 = 1e-12;
/// Largest denominator accepted as evidence of commensurability.
///
/// Without a cap every real number "matches" once convergent denominators pass
/// roughly `1/sqrt(RATIONAL_TOL)`.
pub const MAX_DENOMINATOR: i64 = 100_000;
/// Absolute tolerance (units of ω) for the membership `(2π/T)k ∈ ωℤ`.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Decrease of the lattice minimum, relative to `ω`, below which it counts as unchanged.
pub const DECREASE_TOL: f64 = 1e-9;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `min_ℓ |s - ωℓ|`.
pub fn dist_to_lattice(s: f64, omega: f64) -> f64 {
    (s - omega * (s / omega).round()).abs()
}

/// Result of the bounded search for the smallest nonzero element of the sum lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeMinimum {
    /// Running minimum over `|j|, |k| ≤ bound`.
    pub value: f64,
    /// Coefficients `(j, k)` attaining it: `value = |(2π/T) j + ω k|`.
    pub attained: (i64, i64),
    /// True when the minimum did not change between `bound/2` and `bound`.
    pub stabilized: bool,
    /// `(window, minimum)` each time the running minimum decreased.
    pub history: Vec<(i64, f64)>,
    pub bound: i64,
}

/// Best nonzero `|a j + ω k|` with `|j| = n` fixed, `|k| ≤ bound`.
fn best_for_fixed(a: f64, omega: f64, j: i64, bound: i64) -> Option<(f64, i64)> {
    let centre = (-a * j as f64 / omega).round() as i64;
    let mut best: Option<(f64, i64)> = None;
    for k in [centre - 1, centre, centre + 1] {
        if k.abs() > bound {
            continue;
        }
        let v = (a * j as f64 + omega * k as f64).abs();
        if v <= ZERO_TOL * omega {
            continue;
        }
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, k));
        }
    }
    if best.is_none() {
        // The nearest multiples were out of range; fall back to the window edges.
        for k in [-bound, bound] {
            let v = (a * j as f64 + omega * k as f64).abs();
            if v > ZERO_TOL * omega && best.is_none_or(|(b, _)| v < b) {
                best = Some((v, k));
            }
        }
    }
    best
}

/// Bounded search for `d = inf{|a| : 0 ≠ a ∈ (2π/T)ℤ + ωℤ}`.
pub fn d_omega_t(period: f64, omega: f64, bound: i64) -> Result<LatticeMinimum> {
    check_positive("period", period)?;
    check_positive("omega", omega)?;
    if bound < 1 {
        return Err(Error::InvalidArgument(format!("bound must be >= 1, got {bound}")));
    }
    let a = 2.0 * std::f64::consts::PI / period;
    let mut best = f64::INFINITY;
    let mut attained = (0, 0);
    let mut history = Vec::new();
    let mut at_half = f64::INFINITY;
    for n in 1..=bound {
        // New pairs entering the window: j = ±n with |k| ≤ n, and k = ±n with |j| < n.
        let mut cands: Vec<(f64, i64, i64)> = Vec::with_capacity(4);
        for j in [-n, n] {
            if let Some((v, k)) = best_for_fixed(a, omega, j, n) {
                cands.push((v, j, k));
            }
        }
        for k in [-n, n] {
            if let Some((v, j)) = best_for_fixed(omega, a, k, n - 1) {
                cands.push((v, j, k));
            }
        }
        for (v, j, k) in cands {
            // Round-off in `a` lets large (j, k) undercut an exact minimum by ~n·ε.
            if v < best - DECREASE_TOL * omega {
                best = v;
                attained = (j, k);
            }
        }
        if history.last().is_none_or(|&(_, m)| best < m) {
            history.push((n, best));
        }
        if n == bound / 2 {
            at_half = best;
        }
    }
    if bound == 1 {
        at_half = best;
    }
    Ok(LatticeMinimum {
        value: best,
        attained,
        stabilized: best == at_half,
        history,
        bound,
    })
}

/// Continued-fraction verdict on the ratio `(2π/T)/ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commensurability {
    pub commensurable: bool,
    /// Matching convergent, or the last one computed when nothing matched.
    pub rational_approx: Option<(i64, i64)>,
    pub ratio: f64,
    pub convergents: Vec<(i64, i64)>,
}

/// Continued-fraction convergents of `x > 0`, at most `depth` of them.
pub fn convergents(x: f64, depth: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (1i128, 0i128);
    let (mut k0, mut k1) = (0i128, 1i128);
    let mut r = x;
    for _ in 0..depth {
        let a = r.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h = ai * h0 + h1;
        let k = ai * k0 + k1;
        if h.abs() > i64::MAX as i128 || k > i64::MAX as i128 {
            break;
        }
        out.push((h as i64, k as i64));
        (h1, h0) = (h0, h);
        (k1, k0) = (k0, k);
        let frac = r - a;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

pub fn is_commensurable(period: f64, omega: f64, depth: usize) -> Result<Commensurability> {
    check_positive("period", period)?;
    check_positive("omega", omega)?;
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let x = 2.0 * std::f64::consts::PI / period / omega;
    let convs = convergents(x, depth);
    let hit = convs.iter().copied().find(|&(p, q)| {
        q <= MAX_DENOMINATOR && (x - p as f64 / q as f64).abs() <= RATIONAL_TOL * x.abs()
    });
    Ok(Commensurability {
        commensurable: hit.is_some(),
        rational_approx: hit.or_else(|| convs.last().copied()),
        ratio: x,
        convergents: convs,
    })
}

/// Index split `A₁ = {k : (2π/T)k ∈ ωℤ}`, `A₂` its complement, over `|k| ≤ k_max`.
pub fn split_indices(period: f64, omega: f64, k_max: i64) -> (Vec<i64>, Vec<i64>) {
    let a = 2.0 * std::f64::consts::PI / period;
    (-k_max..=k_max).partition(|&k| in_a1(a, omega, k))
}

pub(crate) fn in_a1(base_frequency: f64, omega: f64, k: i64) -> bool {
    dist_to_lattice(base_frequency * k as f64, omega) <= MEMBERSHIP_TOL * omega
}

/// One horizontal half-line `{α + iωℓ : alpha_min ≤ α ≤ 0}` of the essential spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub ell: i64,
    pub imag: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

pub fn spectrum_lattice(omega: f64, ell_range: (i64, i64), alpha_min: f64) -> Result<Vec<SpectrumLine>> {
    check_positive("omega", omega)?;
    if ell_range.0 > ell_range.1 {
        return Err(Error::InvalidArgument("empty ell range".into()));
    }
    if !(alpha_min.is_finite() && alpha_min <= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha_min must be <= 0, got {alpha_min}")));
    }
    Ok((ell_range.0..=ell_range.1)
        .map(|ell| SpectrumLine {
            ell,
            imag: omega * ell as f64,
            alpha_min,
            alpha_max: 0.0,
        })
        .collect())
}

/// Whether `z` lies on one of the lines (imaginary part matched to `1e-12·max(1,|z|)`).
pub fn on_spectrum_lines(lines: &[SpectrumLine], z: Complex64) -> bool {
    let tol = 1e-12 * z.norm().max(1.0);
    lines
        .iter()
        .any(|l| (z.im - l.imag).abs() <= tol && z.re <= l.alpha_max && z.re >= l.alpha_min)
}

pub fn write_spectrum_csv(lines: &[SpectrumLine], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["ell", "imag", "alpha_min", "alpha_max"])?;
    for l in lines {
        wr.write_record([
            l.ell.to_string(),
            l.imag.to_string(),
            l.alpha_min.to_string(),
            l.alpha_max.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Inputs for [`resonance_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceQuery {
    pub s: f64,
    pub omega: f64,
    pub period: f64,
    pub k_max: i64,
    pub bound: i64,
    pub depth: usize,
    pub ell_range: (i64, i64),
    pub alpha_min: f64,
}

impl ResonanceQuery {
    pub fn new(s: f64, omega: f64, period: f64) -> Self {
        ResonanceQuery {
            s,
            omega,
            period,
            k_max: 10,
            bound: 1000,
            depth: 30,
            ell_range: (-3, 3),
            alpha_min: -10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub zero: f64,
    pub rational: f64,
    pub max_denominator: i64,
    pub membership: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub query: ResonanceQuery,
    pub dist_value: f64,
    pub d_omega_t: f64,
    pub d_search: LatticeMinimum,
    pub commensurable: bool,
    pub rational_approx: Option<(i64, i64)>,
    pub convergents: Vec<(i64, i64)>,
    pub a1_indices: Vec<i64>,
    pub a2_indices: Vec<i64>,
    pub spectrum_lines: Vec<SpectrumLine>,
    /// Whether `is` lies on the essential-spectrum lines.
    pub is_on_spectrum: bool,
    pub tolerances: Tolerances,
}

pub fn resonance_report(q: &ResonanceQuery) -> Result<ResonanceReport> {
    if !q.s.is_finite() {
        return Err(Error::InvalidArgument("s must be finite".into()));
    }
    let search = d_omega_t(q.period, q.omega, q.bound)?;
    let comm = is_commensurable(q.period, q.omega, q.depth)?;
    let (a1, a2) = split_indices(q.period, q.omega, q.k_max);
    let lines = spectrum_lattice(q.omega, q.ell_range, q.alpha_min)?;
    Ok(ResonanceReport {
        query: q.clone(),
        dist_value: dist_to_lattice(q.s, q.omega),
        // An unstabilized search is evidence of an incommensurable ratio, where d = 0.
        d_omega_t: if search.stabilized { search.value } else { 0.0 },
        d_search: search,
        commensurable: comm.commensurable,
        rational_approx: comm.rational_approx,
        convergents: comm.convergents,
        a1_indices: a1,
        a2_indices: a2,
        is_on_spectrum: on_spectrum_lines(&lines, Complex64::new(0.0, q.s)),
        spectrum_lines: lines,
        tolerances: Tolerances {
            zero: ZERO_TOL,
            rational: RATIONAL_TOL,
            max_denominator: MAX_DENOMINATOR,
            membership: MEMBERSHIP_TOL,
        },
    })
}
