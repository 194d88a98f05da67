//! Closed-form multiplier symbols.
//!
//! The common denominator is `D = is + iωk + |ξ|²`. On the integer lattice the solution
//! multipliers are `m = 1/D`, `m0 = is/D`, `m1 = iωk/D`, `m_jl = -ξ_j ξ_l / D`. The
//! extended family over real `η` inserts the cutoff `χ(1 + ωη/s)`, which vanishes near
//! the single zero of `D` and is identically one where `|s + ωη| ≥ |s|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet4;

/// Relative tolerance (in units of ω) below which `s + ωk` counts as zero.
pub const RESONANCE_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A point in frequency space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqPoint {
    /// Temporal frequency index (integer on the lattice, real for extended symbols).
    pub k: f64,
    pub xi: [f64; 3],
    pub s: f64,
    pub omega: f64,
}

impl FreqPoint {
    pub fn new(s: f64, omega: f64, k: f64, xi: [f64; 3]) -> Self {
        FreqPoint { k, xi, s, omega }
    }

    pub fn xi_sq(&self) -> f64 {
        self.xi.iter().map(|v| v * v).sum()
    }

    pub fn is_resonant(&self) -> bool {
        is_resonant(self.s, self.omega, self.k, self.xi_sq())
    }
}

#[inline]
pub fn is_resonant(s: f64, omega: f64, k: f64, xi_sq: f64) -> bool {
    xi_sq == 0.0 && (s + omega * k).abs() <= RESONANCE_TOL * omega
}

/// Symbol values at one frequency point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolBundle {
    pub d: Complex64,
    pub m: Complex64,
    pub m0: Complex64,
    pub m1: Complex64,
    pub mjl: [[Complex64; 3]; 3],
    /// When set, `D` vanishes and the multiplier entries are NaN.
    pub resonant: bool,
}

pub fn eval_d(p: &FreqPoint) -> Complex64 {
    Complex64::new(p.xi_sq(), p.s + p.omega * p.k)
}

pub fn eval_m_family(p: &FreqPoint) -> SymbolBundle {
    let d = eval_d(p);
    if p.is_resonant() {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        return SymbolBundle {
            d: Complex64::new(0.0, 0.0),
            m: nan,
            m0: nan,
            m1: nan,
            mjl: [[nan; 3]; 3],
            resonant: true,
        };
    }
    let m = 1.0 / d;
    let mut mjl = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (j, row) in mjl.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = -p.xi[j] * p.xi[l] * m;
        }
    }
    SymbolBundle {
        d,
        m,
        m0: I * p.s * m,
        m1: I * (p.omega * p.k) * m,
        mjl,
        resonant: false,
    }
}

/// Leray projector `I - ξ⊗ξ/|ξ|²`; the identity at `ξ = 0`.
pub fn leray_symbol(xi: [f64; 3]) -> [[f64; 3]; 3] {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    let mut p = [[0.0; 3]; 3];
    for j in 0..3 {
        for l in 0..3 {
            let id = if j == l { 1.0 } else { 0.0 };
            p[j][l] = if r2 == 0.0 { id } else { id - xi[j] * xi[l] / r2 };
        }
    }
    p
}

/// Pressure symbols `(-iξ/|ξ|², ξ⊗ξ/|ξ|²)`; both zero at `ξ = 0`.
pub fn pressure_symbols(xi: [f64; 3]) -> ([Complex64; 3], [[f64; 3]; 3]) {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return ([Complex64::new(0.0, 0.0); 3], [[0.0; 3]; 3]);
    }
    let v = [
        Complex64::new(0.0, -xi[0] / r2),
        Complex64::new(0.0, -xi[1] / r2),
        Complex64::new(0.0, -xi[2] / r2),
    ];
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        for l in 0..3 {
            m[j][l] = xi[j] * xi[l] / r2;
        }
    }
    (v, m)
}

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn h_prime(t: f64) -> f64 {
    if t > 0.0 {
        h(t) / (t * t)
    } else {
        0.0
    }
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = h(t);
        a / (a + h(1.0 - t))
    }
}

fn psi_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (h(t), h(1.0 - t));
    (h_prime(t) * b + a * h_prime(1.0 - t)) / ((a + b) * (a + b))
}

/// Smooth cutoff: 0 on `|x| ≤ 1/2`, 1 on `|x| ≥ 1`.
pub fn cutoff_chi(x: f64) -> f64 {
    psi(2.0 * x.abs() - 1.0)
}

/// Derivative of [`cutoff_chi`].
pub fn cutoff_chi_derivative(x: f64) -> f64 {
    2.0 * x.signum() * psi_prime(2.0 * x.abs() - 1.0)
}

/// Which member of the extended family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolId {
    M0,
    M1,
    /// Zero-based index pair.
    Mjl(usize, usize),
}

impl SymbolId {
    /// `M0`, `M1` and the six `M_jl` with `j ≤ l`.
    pub fn all() -> Vec<SymbolId> {
        let mut v = vec![SymbolId::M0, SymbolId::M1];
        for j in 0..3 {
            for l in j..3 {
                v.push(SymbolId::Mjl(j, l));
            }
        }
        v
    }

    pub fn label(&self) -> String {
        match self {
            SymbolId::M0 => "M0".into(),
            SymbolId::M1 => "M1".into(),
            SymbolId::Mjl(j, l) => format!("M{}{}", j + 1, l + 1),
        }
    }
}

impl std::fmt::Display for SymbolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// Extended symbols at one real frequency point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedSymbols {
    pub m0: Complex64,
    pub m1: Complex64,
    pub mjl: [[Complex64; 3]; 3],
}

impl ExtendedSymbols {
    pub fn get(&self, id: SymbolId) -> Complex64 {
        match id {
            SymbolId::M0 => self.m0,
            SymbolId::M1 => self.m1,
            SymbolId::Mjl(j, l) => self.mjl[j][l],
        }
    }
}

fn check_extended(s: f64, omega: f64) -> Result<()> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::InvalidArgument(
            "extended symbols need s != 0; the s = 0 case is the steady problem".into(),
        ));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// `M0 = is χ/D`, `M1 = iωη χ/D`, `M_jl = ξ_j ξ_l χ/D` with `χ = χ(1 + ωη/s)`.
pub fn eval_extended_family(s: f64, omega: f64, eta: f64, xi: [f64; 3]) -> Result<ExtendedSymbols> {
    check_extended(s, omega)?;
    let chi = cutoff_chi(1.0 + omega * eta / s);
    let zero = Complex64::new(0.0, 0.0);
    if chi == 0.0 {
        return Ok(ExtendedSymbols {
            m0: zero,
            m1: zero,
            mjl: [[zero; 3]; 3],
        });
    }
    let d = Complex64::new(xi.iter().map(|v| v * v).sum(), s + omega * eta);
    let r = chi / d;
    let mut mjl = [[zero; 3]; 3];
    for j in 0..3 {
        for l in 0..3 {
            mjl[j][l] = xi[j] * xi[l] * r;
        }
    }
    Ok(ExtendedSymbols {
        m0: I * s * r,
        m1: I * (omega * eta) * r,
        mjl,
    })
}

struct ExtendedJets {
    eta: Jet4,
    xi: [Jet4; 3],
    /// `χ/D`, or `None` where the cutoff and its derivative vanish.
    ratio: Option<Jet4>,
}

fn extended_jets(s: f64, omega: f64, eta: f64, xi: [f64; 3]) -> ExtendedJets {
    let eta_j = Jet4::variable(eta, 0);
    let xi_j = [
        Jet4::variable(xi[0], 1),
        Jet4::variable(xi[1], 2),
        Jet4::variable(xi[2], 3),
    ];
    let x0 = 1.0 + omega * eta / s;
    let (c0, c1) = (cutoff_chi(x0), cutoff_chi_derivative(x0));
    let ratio = (c0 != 0.0 || c1 != 0.0).then(|| {
        let x = Jet4::real(1.0) + eta_j.scale(Complex64::new(omega / s, 0.0));
        let chi = x.lift(&[c0, c1]);
        let d = Jet4::constant(I * s)
            + eta_j.scale(I * omega)
            + xi_j[0] * xi_j[0]
            + xi_j[1] * xi_j[1]
            + xi_j[2] * xi_j[2];
        chi * d.recip()
    });
    ExtendedJets {
        eta: eta_j,
        xi: xi_j,
        ratio,
    }
}

impl ExtendedJets {
    /// Jet of one symbol: coefficient `c[S]` is the mixed partial over the variable set
    /// `S` (bit 0 = η, bits 1..=3 = ξ axes).
    fn symbol(&self, id: SymbolId, s: f64, omega: f64) -> Jet4 {
        let Some(ratio) = self.ratio else {
            return Jet4::real(0.0);
        };
        match id {
            SymbolId::M0 => ratio.scale(I * s),
            SymbolId::M1 => (self.eta * ratio).scale(I * omega),
            SymbolId::Mjl(j, l) => self.xi[j] * self.xi[l] * ratio,
        }
    }
}

/// Bitmask of a derivative multi-index: bit 0 for `α`, bits 1..=3 for `β`.
pub fn derivative_mask(alpha: u8, beta: [u8; 3]) -> usize {
    (alpha as usize & 1)
        | ((beta[0] as usize & 1) << 1)
        | ((beta[1] as usize & 1) << 2)
        | ((beta[2] as usize & 1) << 3)
}

fn check_orders(alpha: u8, beta: [u8; 3]) -> Result<()> {
    if alpha > 1 || beta.iter().any(|&b| b > 1) {
        return Err(Error::InvalidArgument(
            "derivative orders must be 0 or 1 per variable".into(),
        ));
    }
    Ok(())
}

fn weight(mask: usize, eta: f64, xi: [f64; 3]) -> f64 {
    let coords = [eta, xi[0], xi[1], xi[2]];
    (0..4)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| coords[b])
        .product()
}

/// All sixteen weighted mixed partials `|η^α ξ^β ∂^α ∂^β M|`, indexed by
/// [`derivative_mask`], evaluated exactly by jet arithmetic.
pub fn weighted_derivative_table(id: SymbolId, s: f64, omega: f64, eta: f64, xi: [f64; 3]) -> Result<[f64; 16]> {
    check_extended(s, omega)?;
    let jet = extended_jets(s, omega, eta, xi).symbol(id, s, omega);
    Ok(weighted_table(&jet, eta, xi))
}

fn weighted_table(jet: &Jet4, eta: f64, xi: [f64; 3]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for (mask, v) in out.iter_mut().enumerate() {
        *v = (jet.c[mask] * weight(mask, eta, xi)).norm();
    }
    out
}

/// [`weighted_derivative_table`] for every symbol of [`SymbolId::all`], in that order,
/// sharing the `χ/D` jet.
pub fn weighted_derivative_tables(s: f64, omega: f64, eta: f64, xi: [f64; 3]) -> Result<Vec<[f64; 16]>> {
    check_extended(s, omega)?;
    let jets = extended_jets(s, omega, eta, xi);
    Ok(SymbolId::all()
        .iter()
        .map(|&id| weighted_table(&jets.symbol(id, s, omega), eta, xi))
        .collect())
}

/// One weighted mixed partial by exact jet arithmetic.
pub fn weighted_derivative_exact(
    id: SymbolId,
    s: f64,
    omega: f64,
    eta: f64,
    xi: [f64; 3],
    alpha: u8,
    beta: [u8; 3],
) -> Result<f64> {
    check_orders(alpha, beta)?;
    Ok(weighted_derivative_table(id, s, omega, eta, xi)?[derivative_mask(alpha, beta)])
}

/// Finite-difference estimate of a weighted mixed partial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDerivative {
    /// `|η^α ξ^β ∂^α ∂^β M|` from the finer extrapolated stencil.
    pub value: f64,
    /// Extrapolated estimates at steps `h` and `h/2`.
    pub coarse: f64,
    pub fine: f64,
    pub rel_diff: f64,
    /// False when the two estimates disagree beyond the consistency tolerance.
    pub consistent: bool,
}

/// Relative agreement required between the two finite-difference levels.
pub const FD_CONSISTENCY_TOL: f64 = 1e-4;
/// Absolute floor for the consistency test (values are O(1) at most).
pub const FD_ABS_FLOOR: f64 = 1e-8;
const FD_STEP_FACTOR: f64 = 0.02;

fn fd_steps(s: f64, omega: f64, eta: f64, xi: [f64; 3]) -> [f64; 4] {
    let d = Complex64::new(xi.iter().map(|v| v * v).sum(), s + omega * eta).norm();
    // Local length scales: the cutoff transition and |D| in η, sqrt|D| in each ξ axis.
    let eta_scale = (1.0 + eta.abs()).min(0.25 * s.abs() / omega).min(d / omega);
    let xi_scale = d.sqrt();
    [
        FD_STEP_FACTOR * eta_scale,
        FD_STEP_FACTOR * (1.0 + xi[0].abs()).min(xi_scale),
        FD_STEP_FACTOR * (1.0 + xi[1].abs()).min(xi_scale),
        FD_STEP_FACTOR * (1.0 + xi[2].abs()).min(xi_scale),
    ]
}

fn nested_central(f: &dyn Fn([f64; 4]) -> Complex64, at: [f64; 4], mask: usize, h: [f64; 4]) -> Complex64 {
    let axes: Vec<usize> = (0..4).filter(|b| mask & (1 << b) != 0).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for signs in 0..(1usize << axes.len()) {
        let mut p = at;
        let mut sign = 1.0;
        for (j, &a) in axes.iter().enumerate() {
            if signs & (1 << j) != 0 {
                p[a] += h[a];
            } else {
                p[a] -= h[a];
                sign = -sign;
            }
        }
        acc += f(p) * sign;
    }
    let denom: f64 = axes.iter().map(|&a| 2.0 * h[a]).product();
    acc / denom
}

/// Weighted mixed partial by nested central differences.
///
/// Each level is a Richardson extrapolation of the stencils at `h` and `h/2`; the
/// levels at `h` and `h/2` must agree to [`FD_CONSISTENCY_TOL`]. Steps scale with the
/// local variation length of the symbol rather than a fixed fraction of the coordinate.
pub fn weighted_derivative(
    id: SymbolId,
    s: f64,
    omega: f64,
    eta: f64,
    xi: [f64; 3],
    alpha: u8,
    beta: [u8; 3],
) -> Result<WeightedDerivative> {
    check_orders(alpha, beta)?;
    check_extended(s, omega)?;
    let mask = derivative_mask(alpha, beta);
    let f = |p: [f64; 4]| {
        eval_extended_family(s, omega, p[0], [p[1], p[2], p[3]])
            .map(|e| e.get(id))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let w = weight(mask, eta, xi).abs();
    let at = [eta, xi[0], xi[1], xi[2]];
    if mask == 0 {
        let v = f(at).norm();
        return Ok(WeightedDerivative {
            value: v,
            coarse: v,
            fine: v,
            rel_diff: 0.0,
            consistent: true,
        });
    }
    let h = fd_steps(s, omega, eta, xi);
    let half = |h: [f64; 4]| h.map(|v| 0.5 * v);
    let level = |h: [f64; 4]| {
        let a = nested_central(&f, at, mask, h);
        let b = nested_central(&f, at, mask, half(h));
        (4.0 * b - a) / 3.0
    };
    let coarse = level(h);
    let fine = level(half(h));
    let (cv, fv) = ((coarse * w).norm(), (fine * w).norm());
    let diff = ((coarse - fine) * w).norm();
    let scale = cv.max(fv);
    let rel_diff = if scale > 0.0 { diff / scale } else { 0.0 };
    Ok(WeightedDerivative {
        value: fv,
        coarse: cv,
        fine: fv,
        rel_diff,
        consistent: diff.is_finite() && diff <= FD_CONSISTENCY_TOL * scale + FD_ABS_FLOOR,
    })
}
