//! Evaluation of box fields at points rotated about the x₁-axis.
//!
//! Rotations about e₁ keep `x₁` fixed, so each `x₁`-plane is interpolated on its own
//! with its 2-D trigonometric interpolant. The Nyquist wave uses `cos`, which keeps the
//! interpolant real for real data and reproduces grid samples exactly.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fft::fft_axes;
use crate::field::{BoxField, ZERO};
use crate::grid::BoxGrid;

/// Planar trigonometric coefficients of every `(x₁-plane, component)`, split re/im.
struct PlaneCoefficients {
    n: usize,
    n_planes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PlaneCoefficients {
    fn new(field: &BoxField) -> Self {
        let g = *field.grid();
        let n = g.n;
        let nc = field.n_components();
        let mut data = field.data().to_vec();
        fft_axes(&mut data, &[n, n, n], nc, &[1, 2], false);
        let scale = 1.0 / (n * n) as f64;
        let n_planes = n * nc;
        let nn = n * n;
        let mut re = vec![0.0; n_planes * nn];
        let mut im = vec![0.0; n_planes * nn];
        for i1 in 0..n {
            for m2 in 0..n {
                for m3 in 0..n {
                    // Origin offset: the grid starts at -L/2 in each axis.
                    let sign = if (m2 + m3) % 2 == 0 { scale } else { -scale };
                    for c in 0..nc {
                        let v = data[((i1 * n + m2) * n + m3) * nc + c] * sign;
                        let at = (i1 * nc + c) * nn + m2 * n + m3;
                        re[at] = v.re;
                        im[at] = v.im;
                    }
                }
            }
        }
        PlaneCoefficients { n, n_planes, re, im }
    }
}

/// Basis value of FFT slot `m` at coordinate `y`.
fn basis(grid: &BoxGrid, m: usize, y: f64) -> Complex64 {
    let k = grid.wavenumber(m);
    if grid.is_nyquist(m) {
        Complex64::new((k * y).cos(), 0.0)
    } else {
        Complex64::from_polar(1.0, k * y)
    }
}

fn complex_dot(wr: &[f64], wi: &[f64], cr: &[f64], ci: &[f64]) -> Complex64 {
    let mut ar = [0.0f64; 4];
    let mut ai = [0.0f64; 4];
    let chunks = wr.len() / 4;
    for j in 0..chunks {
        for l in 0..4 {
            let i = 4 * j + l;
            ar[l] += wr[i] * cr[i] - wi[i] * ci[i];
            ai[l] += wr[i] * ci[i] + wi[i] * cr[i];
        }
    }
    let mut sr = (ar[0] + ar[1]) + (ar[2] + ar[3]);
    let mut si = (ai[0] + ai[1]) + (ai[2] + ai[3]);
    for i in 4 * chunks..wr.len() {
        sr += wr[i] * cr[i] - wi[i] * ci[i];
        si += wr[i] * ci[i] + wi[i] * cr[i];
    }
    Complex64::new(sr, si)
}

/// Quarter turns are exact index permutations on the grid.
fn quarter_turns(angle: f64) -> Option<usize> {
    let turns = angle.rem_euclid(2.0 * PI) / FRAC_PI_2;
    let r = turns.round();
    ((turns - r).abs() < 1e-13).then_some((r as usize) % 4)
}

fn permute_quarter(field: &BoxField, turns: usize) -> BoxField {
    let g = *field.grid();
    let n = g.n;
    let nc = field.n_components();
    let neg = |i: usize| (n - i) % n;
    let mut out = BoxField::zeros(g, nc);
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                // Source indices of (c x₂ - s x₃, s x₂ + c x₃).
                let (j2, j3) = match turns {
                    0 => (i2, i3),
                    1 => (neg(i3), i2),
                    2 => (neg(i2), neg(i3)),
                    _ => (i3, neg(i2)),
                };
                for c in 0..nc {
                    let v = field.get(i1, j2, j3, c);
                    let at = out.index(i1, i2, i3, c);
                    out.data_mut()[at] = v;
                }
            }
        }
    }
    out
}

const TARGET_BLOCK: usize = 8;

/// `out(x) = field(R x)` with `R` the rotation by `angle` in the `(x₂, x₃)` plane:
/// `R x = (x₁, cos·x₂ - sin·x₃, sin·x₂ + cos·x₃)`. Components are not rotated.
///
/// Rotated points that leave the box read zero instead of a periodic image; only fields
/// supported in the inscribed ball are meaningful here.
pub fn eval_rotated(field: &BoxField, angle: f64) -> BoxField {
    if let Some(t) = quarter_turns(angle) {
        return permute_quarter(field, t);
    }
    let g = *field.grid();
    let n = g.n;
    let nn = n * n;
    let nc = field.n_components();
    let coef = PlaneCoefficients::new(field);
    let (sa, ca) = angle.sin_cos();
    let half = 0.5 * g.box_len * (1.0 + 1e-12);
    let inside = |y: f64| y.abs() <= half;

    let targets: Vec<(usize, usize)> = (0..n).flat_map(|i2| (0..n).map(move |i3| (i2, i3))).collect();
    // values[target][plane]
    let blocks: Vec<Vec<Complex64>> = targets
        .par_chunks(TARGET_BLOCK)
        .map(|block| {
            let b = block.len();
            let mut wr = vec![0.0; b * nn];
            let mut wi = vec![0.0; b * nn];
            for (bi, &(i2, i3)) in block.iter().enumerate() {
                let (x2, x3) = (g.coordinate(i2), g.coordinate(i3));
                let y2 = ca * x2 - sa * x3;
                let y3 = sa * x2 + ca * x3;
                let e2: Vec<Complex64> = (0..n).map(|m| basis(&g, m, y2)).collect();
                let e3: Vec<Complex64> = (0..n).map(|m| basis(&g, m, y3)).collect();
                for m2 in 0..n {
                    for m3 in 0..n {
                        let w = e2[m2] * e3[m3];
                        wr[bi * nn + m2 * n + m3] = w.re;
                        wi[bi * nn + m2 * n + m3] = w.im;
                    }
                }
            }
            let keep: Vec<bool> = block
                .iter()
                .map(|&(i2, i3)| {
                    let (x2, x3) = (g.coordinate(i2), g.coordinate(i3));
                    inside(ca * x2 - sa * x3) && inside(sa * x2 + ca * x3)
                })
                .collect();
            let mut vals = vec![ZERO; b * coef.n_planes];
            for p in 0..coef.n_planes {
                let cr = &coef.re[p * nn..(p + 1) * nn];
                let ci = &coef.im[p * nn..(p + 1) * nn];
                for bi in (0..b).filter(|&bi| keep[bi]) {
                    vals[bi * coef.n_planes + p] =
                        complex_dot(&wr[bi * nn..(bi + 1) * nn], &wi[bi * nn..(bi + 1) * nn], cr, ci);
                }
            }
            vals
        })
        .collect();

    let mut out = BoxField::zeros(g, nc);
    let mut t = 0;
    for vals in blocks {
        for chunk in vals.chunks_exact(coef.n_planes) {
            let (i2, i3) = targets[t];
            for i1 in 0..coef.n {
                for c in 0..nc {
                    let at = out.index(i1, i2, i3, c);
                    out.data_mut()[at] = chunk[i1 * nc + c];
                }
            }
            t += 1;
        }
    }
    out
}
