//! Acceptance suite: every check prints one PASS/FAIL line; the process fails if any does.
//!
//! Runs with `cargo test -p strot-core --test acceptance`.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strot_core::auxiliary::{modulate, solve_aux, AuxProblem, Sign};
use strot_core::generators::{balanced_sigma, curl, localized_solenoidal, single_mode, swirl, EnsembleParams};
use strot_core::report::ProblemKind;
use strot_core::resonance::{convergents, d_omega_t, dist_to_lattice};
use strot_core::rotation::{
    conjugate_field, e1_cross, mat_vec, q_matrix, rotation_term, solve_rot_resolvent, transpose, Direction, FieldKind,
    RotationFrame,
};
use strot_core::spectral::{to_physical, to_spectral};
use strot_core::symbols::{eval_extended_family, eval_m_family, leray_symbol, FreqPoint};
use strot_core::synthesis::{solve_tp, TpProblem};
use strot_core::verify::baseline::{load_json, SCAN_REGRESSION_TOL, SWEEP_REGRESSION_TOL};
use strot_core::verify::scan::REFINEMENT_TOL;
use strot_core::verify::{
    check_scan, check_sweep, estimate_sweep, marcinkiewicz_scan, refinement_change, ScanBaseline, SweepBaseline,
};
use strot_core::{BoxField, BoxGrid, GridSpec, ModeSeries, PhysicalField, SpectralField};

type Outcome = Result<Vec<Part>, Box<dyn std::error::Error>>;
type Check = (&'static str, fn() -> Outcome);

enum Part {
    Measure { label: String, value: f64, tol: f64 },
    Flag { label: String, ok: bool },
}

impl Part {
    fn measure(label: impl Into<String>, value: f64, tol: f64) -> Part {
        Part::Measure { label: label.into(), value, tol }
    }

    fn flag(label: impl Into<String>, ok: bool) -> Part {
        Part::Flag { label: label.into(), ok }
    }

    fn ok(&self) -> bool {
        match self {
            // NaN fails.
            Part::Measure { value, tol, .. } => *value <= *tol,
            Part::Flag { ok, .. } => *ok,
        }
    }

    fn describe(&self) -> String {
        match self {
            Part::Measure { label, value, tol } => format!("{label} {value:.3e} (tol {tol:.0e})"),
            Part::Flag { label, ok } => format!("{label} {ok}"),
        }
    }
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5EED_0000 + salt)
}

fn cnum(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Plain `(Σ |v|^q h³)^{1/q}` over the pointwise Euclidean magnitudes.
fn lq_direct(f: &BoxField, q: f64) -> f64 {
    let nc = f.n_components();
    let sum: f64 = f
        .data()
        .chunks_exact(nc)
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().powf(q))
        .sum();
    (sum * f.grid().cell_volume()).powf(1.0 / q)
}

/// `û = a / (is + iωk + |ξ|²)` at the forced mode, zero elsewhere, and `p = 0`.
fn single_mode_closed_form() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let omega = r.random_range(0.25..4.0);
        let grid = GridSpec::for_rotation(omega, TAU, 16, 16)?;
        let k = r.random_range(-7i64..=7);
        let m = loop {
            let m = [r.random_range(-7i64..=7), r.random_range(-7i64..=7), r.random_range(-7i64..=7)];
            if m != [0, 0, 0] {
                break m;
            }
        };
        let xi = m.map(|v| v as f64);
        let pl = leray_symbol(xi);
        let raw = [cnum(&mut r), cnum(&mut r), cnum(&mut r)];
        let a: [Complex64; 3] = std::array::from_fn(|j| (0..3).map(|l| pl[j][l] * raw[l]).sum());
        let s = r.random_range(-3.0..3.0) * omega;
        let sol = solve_aux(&AuxProblem::new(s, omega, single_mode(&grid, k, m, a)?)?, &[])?;
        let d = Complex64::new(xi.iter().map(|v| v * v).sum(), s + omega * k as f64);
        let mut expected = SpectralField::zeros(grid, 3);
        let bg = grid.box_grid();
        let t = grid.mode_slot(k).unwrap();
        let sl = m.map(|v| bg.slot_of(v).unwrap());
        for (j, aj) in a.iter().enumerate() {
            let at = expected.index(t, sl[0], sl[1], sl[2], j);
            expected.data_mut()[at] = aj / d;
        }
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max) / d.norm();
        let err = max_diff(sol.velocity.data(), expected.data()).max(sol.pressure.max_abs()) / scale;
        worst = worst.max(err);
    }
    Ok(vec![Part::measure("max rel err over 20 modes", worst, 1e-12)])
}

/// Auxiliary residuals on band-limited forcings; rotating residuals on localized ones.
fn residual_suite() -> Outcome {
    let grid = GridSpec::new(TAU, TAU, 16, 16)?;
    let ens = EnsembleParams::new(11, 10);
    let mut r = rng(2);
    let mut aux = 0.0f64;
    for j in 0..ens.count {
        let s = r.random_range(-2.0..2.0);
        let sol = solve_aux(&AuxProblem::new(s, 1.0, ens.member(&grid, j)?)?, &[])?;
        aux = aux.max(sol.report.residual_pde).max(sol.report.residual_div);
    }
    let bg = BoxGrid::new(TAU, 24)?;
    let mut rot = 0.0f64;
    for (seed, s) in [(3u64, 100.0), (4, -150.0)] {
        let g = localized_solenoidal(bg, balanced_sigma(&bg), 2, seed)?;
        let sol = solve_rot_resolvent(&g, s, 1.0, 16, &[])?;
        rot = rot.max(sol.report.residual_pde).max(sol.report.residual_div);
    }
    Ok(vec![
        Part::measure("aux residual, 10 forcings", aux, 1e-10),
        Part::measure("rotating residual", rot, 1e-6),
    ])
}

fn symbol_identities() -> Outcome {
    let mut r = rng(3);
    let (mut partition, mut leray) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let omega = r.random_range(0.1..5.0);
        let s = r.random_range(-5.0..5.0);
        let k = r.random_range(-20i64..=20) as f64;
        let xi = [r.random_range(-10.0..10.0), r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)];
        let b = eval_m_family(&FreqPoint::new(s, omega, k, xi));
        let trace = b.mjl[0][0] + b.mjl[1][1] + b.mjl[2][2];
        partition = partition.max((b.m0 + b.m1 - trace - 1.0).norm());
        let p = leray_symbol(xi);
        for j in 0..3 {
            for l in 0..3 {
                let pp: f64 = (0..3).map(|i| p[j][i] * p[i][l]).sum();
                leray = leray.max((pp - p[j][l]).abs());
            }
        }
    }
    // Integer η where χ(1 + ωη/s) = 1, i.e. |s + ωk| ≥ |s|; M_jl carries the opposite sign.
    let mut restriction = 0.0f64;
    let mut tested = 0;
    while tested < 10_000 {
        let omega = r.random_range(0.1..5.0);
        let s = r.random_range(-0.5..0.5) * omega;
        let k = r.random_range(-20i64..=20);
        if s == 0.0 || (s + omega * k as f64).abs() < s.abs() {
            continue;
        }
        tested += 1;
        let xi = [r.random_range(-10.0..10.0), r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)];
        let m = eval_m_family(&FreqPoint::new(s, omega, k as f64, xi));
        let big = eval_extended_family(s, omega, k as f64, xi)?;
        let mut d = (big.m0 - m.m0).norm().max((big.m1 - m.m1).norm());
        for j in 0..3 {
            for l in 0..3 {
                d = d.max((big.mjl[j][l] + m.mjl[j][l]).norm());
            }
        }
        restriction = restriction.max(d);
    }
    Ok(vec![
        Part::measure("partition", partition, 1e-14),
        Part::measure("leray idempotence", leray, 1e-14),
        Part::measure("restriction", restriction, 1e-14),
    ])
}

fn modulation_equivariance() -> Outcome {
    let grid = GridSpec::new(TAU, TAU, 16, 16)?;
    let ens = EnsembleParams {
        temporal_band: 3,
        ..EnsembleParams::new(21, 1)
    };
    let f = ens.member(&grid, 0)?;
    let mut worst = 0.0f64;
    for s in [0.37, -0.2, 1.6] {
        let base = solve_aux(&AuxProblem::new(s, 1.0, f.clone())?, &[])?;
        for ell in -3..=3 {
            let shifted = modulate(&f, ell, Sign::Plus)?;
            let sol = solve_aux(&AuxProblem::new(s - ell as f64, 1.0, shifted)?, &[])?;
            let u = modulate(&sol.velocity, ell, Sign::Minus)?;
            let p = modulate(&sol.pressure, ell, Sign::Minus)?;
            worst = worst.max(base.velocity.max_rel_diff(&u)?).max(base.pressure.max_rel_diff(&p)?);
        }
    }
    Ok(vec![Part::measure("max rel diff, ell in -3..=3", worst, 1e-12)])
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn resonance_sharpness() -> Outcome {
    let grid = GridSpec::new(TAU, TAU, 16, 16)?;
    let k = 2;
    let amp = [Complex64::new(0.3, -0.2), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)];
    let f = single_mode(&grid, k, [0, 0, 0], amp)?;
    let mut identity = 0.0f64;
    let mut curves = [Vec::new(), Vec::new()];
    for e in 1..=6 {
        let eps = 10f64.powi(-e);
        let s = -(k as f64) + eps;
        let sol = solve_aux(&AuxProblem::new(s, 1.0, f.clone())?, &[1.2, 1.4])?;
        for (entry, curve) in sol.report.lq_norms.iter().zip(&mut curves) {
            let dist = dist_to_lattice(s, 1.0);
            identity = identity.max((dist * entry.u - entry.forcing).abs() / entry.forcing);
            curve.push((eps.ln(), entry.u.ln()));
        }
    }
    let slope_err = curves
        .iter()
        .map(|c| (least_squares_slope(c) + 1.0).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Part::measure("dist*|u| vs |f|", identity, 1e-10),
        Part::measure("|slope + 1|", slope_err, 0.01),
    ])
}

fn rotation_algebra() -> Outcome {
    let mut r = rng(6);
    let (mut orth, mut deriv) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let omega = r.random_range(0.1..5.0);
        let t = r.random_range(-10.0..10.0);
        let q = q_matrix(omega, t);
        let qt = transpose(&q);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|l| qt[i][l] * q[l][j]).sum();
                orth = orth.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let x = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let h = 1e-5;
        let (a, b) = (mat_vec(&q_matrix(omega, t + h), x), mat_vec(&q_matrix(omega, t - h), x));
        let want = e1_cross(mat_vec(&q, x)).map(|v| omega * v);
        let scale = omega * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..3 {
            deriv = deriv.max(((a[i] - b[i]) / (2.0 * h) - want[i]).abs() / scale);
        }
    }

    let omega = 1.0;
    let frame = RotationFrame::new(omega)?;
    // Interpolation error follows the Gaussian tail at the box edge, about 1e-9 at N = 32.
    let bg = BoxGrid::new(TAU, 32)?;
    let clock = GridSpec::for_rotation(omega, TAU, 32, 16)?;
    let sigma = balanced_sigma(&bg);
    let slices: Vec<BoxField> = (0..clock.n_time)
        .map(|t| localized_solenoidal(bg, sigma, 2, 100 + t as u64))
        .collect::<Result<_, _>>()?;
    let field = PhysicalField::from_slices(clock, &slices)?;
    let inertial = conjugate_field(&field, &frame, Direction::ToInertial, FieldKind::Vector)?;
    let back = conjugate_field(&inertial, &frame, Direction::ToRotating, FieldKind::Vector)?;
    let round_trip = field.max_rel_diff(&back)?;
    let isometry = (0..clock.n_time)
        .map(|t| {
            let (a, b) = (field.slice(t).raw_l2(), inertial.slice(t).raw_l2());
            (a - b).abs() / a
        })
        .fold(0.0, f64::max);

    let w = swirl(bg, sigma);
    let steady = PhysicalField::constant_in_time(clock, &w)?;
    let fixed = conjugate_field(&steady, &frame, Direction::ToInertial, FieldKind::Vector)?.max_rel_diff(&steady)?;
    let term = rotation_term(&w)?.max_abs() / w.max_abs();
    Ok(vec![
        Part::measure("Q orthogonality", orth, 1e-15),
        Part::measure("Q' = w e1 x Q", deriv, 1e-6),
        Part::measure("round trip", round_trip, 1e-8),
        Part::measure("L2 isometry", isometry, 1e-8),
        Part::measure("equivariant fixed point", fixed.max(term), 1e-8),
    ])
}

/// Equivariant forcings: the rotating solve must match the time-independent auxiliary solve.
fn rotating_vs_plain() -> Outcome {
    let omega = 1.0;
    let bg = BoxGrid::new(TAU, 24)?;
    let sigma = balanced_sigma(&bg);
    // The curl of a swirl is an equivariant meridional flow.
    let meridional = curl(&swirl(bg, sigma))?;
    let mut worst = 0.0f64;
    for (g, s) in [(swirl(bg, sigma), 100.0), (meridional, -120.0)] {
        let rot = solve_rot_resolvent(&g, s, omega, 16, &[])?;
        let clock = GridSpec::for_rotation(omega, TAU, 24, 16)?;
        let f = to_spectral(&PhysicalField::constant_in_time(clock, &g)?);
        let plain = solve_aux(&AuxProblem::new(s, omega, f)?, &[])?;
        let u = to_physical(&plain.velocity).slice(0);
        worst = worst.max(rot.velocity.max_rel_diff(&u)?);
    }
    Ok(vec![Part::measure("max rel diff", worst, 1e-6)])
}

fn baseline_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/baselines").join(name)
}

fn multiplier_scan() -> Outcome {
    let baseline: ScanBaseline = load_json(baseline_path("scan.json"))?;
    let omega = 1.0;
    let s_values = vec![0.05 * omega, 0.25 * omega, 0.5 * omega];
    let coarse = marcinkiewicz_scan(&s_values, omega, &baseline.grid)?;
    let fine = marcinkiewicz_scan(&s_values, omega, &baseline.grid.refined())?;
    let change = refinement_change(&coarse, &fine)?;
    let regression = check_scan(&coarse, &baseline, SCAN_REGRESSION_TOL);
    Ok(vec![
        Part::flag("16 weighted derivatives x 8 symbols finite", coarse.all_finite && coarse.rows.len() == 128),
        Part::measure("refinement change", change, REFINEMENT_TOL),
        Part::flag("same setup as baseline", regression.same_setup),
        Part::measure(
            format!("uniformity {:.4} vs baseline {:.4}", coarse.uniformity, baseline.uniformity),
            regression.rel_change,
            SCAN_REGRESSION_TOL,
        ),
    ])
}

/// Smallest nonzero `|a j + ω k|` over `|j|, |k| ≤ bound`, by enumeration.
fn brute_lattice_min(a: f64, omega: f64, bound: i64) -> f64 {
    let mut best = f64::INFINITY;
    for j in -bound..=bound {
        for k in -bound..=bound {
            let v = (a * j as f64 + omega * k as f64).abs();
            if v > 1e-9 * omega {
                best = best.min(v);
            }
        }
    }
    best
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn resonance_arithmetic() -> Outcome {
    let omega = 1.7;
    let mut worst = 0.0f64;
    let mut all_stable = true;
    for p in 1..=12i64 {
        for q in 1..=12i64 {
            if gcd(p, q) != 1 {
                continue;
            }
            // (2π/T)/ω = p/q.
            let a = omega * p as f64 / q as f64;
            let period = TAU / a;
            let found = d_omega_t(period, omega, 200)?;
            let brute = brute_lattice_min(a, omega, 30);
            let want = omega / q as f64;
            worst = worst.max((found.value - want).abs() / want).max((brute - want).abs() / want);
            all_stable &= found.stabilized;
        }
    }
    let a = omega * 2f64.sqrt();
    let found = d_omega_t(TAU / a, omega, 2000)?;
    let decreasing = found.history.windows(2).all(|w| w[1].1 < w[0].1);
    // Each recorded minimum is the true minimum over its window.
    let window_err = found
        .history
        .iter()
        .filter(|(n, _)| *n <= 200)
        .map(|&(n, v)| {
            let b = brute_lattice_min(a, omega, n);
            (v - b).abs() / b
        })
        .fold(0.0, f64::max);
    let cf = convergents(2f64.sqrt(), 8);
    Ok(vec![
        Part::measure("d = w/q for p, q <= 12", worst, 1e-9),
        Part::flag("rational ratios stabilized", all_stable),
        Part::flag("sqrt2 unstabilized", !found.stabilized),
        Part::flag(
            format!("sqrt2 strictly decreasing over {} windows", found.history.len()),
            decreasing && found.history.len() >= 5 && cf.len() >= 5,
        ),
        Part::measure("sqrt2 window minima vs enumeration", window_err, 1e-9),
    ])
}

fn tp_synthesis() -> Outcome {
    let omega = 1.0;
    let bg = BoxGrid::new(TAU, 24)?;
    let sigma = balanced_sigma(&bg);
    let f1 = localized_solenoidal(bg, sigma, 2, 31)?;
    let f2 = localized_solenoidal(bg, sigma, 2, 32)?;
    let period = TAU / 100.0;
    let qs = [1.2, 1.4];
    let both = solve_tp(
        &TpProblem::new(omega, ModeSeries::new(period, vec![(1, f1.clone()), (2, f2.clone())])?, 16)?,
        &qs,
    )?;
    let mut superposition = 0.0f64;
    for (k, f) in [(1, f1.clone()), (2, f2.clone())] {
        let one = solve_tp(&TpProblem::new(omega, ModeSeries::new(period, vec![(k, f)])?, 16)?, &[])?;
        let (u, p) = (both.velocity.mode(k).unwrap(), both.pressure.mode(k).unwrap());
        superposition = superposition
            .max(u.max_rel_diff(one.velocity.mode(k).unwrap())?)
            .max(p.max_rel_diff(one.pressure.mode(k).unwrap())?);
    }
    let mut a_norm = 0.0f64;
    for entry in &both.report.a_norms {
        let u: f64 = both.velocity.modes.iter().map(|(_, v)| lq_direct(v, entry.q)).sum();
        let f: f64 = [&f1, &f2].iter().map(|v| lq_direct(v, entry.q)).sum();
        a_norm = a_norm.max((entry.u - u).abs() / u).max((entry.forcing - f).abs() / f);
    }

    // T = 2π/ω: every mode lies on the rotation lattice.
    let commensurate = solve_tp(
        &TpProblem::new(omega, ModeSeries::new(TAU / omega, vec![(100, f1), (101, f2)])?, 16)?,
        &[1.2],
    )?;
    let a2 = &commensurate.report.a2_dist_norm[0];
    Ok(vec![
        Part::measure("two-mode vs single-mode solves", superposition, 1e-12),
        Part::measure("A-norm vs per-mode sum", a_norm, 1e-13),
        Part::flag("commensurate A2 empty", a2.a2_modes.is_empty()),
        Part::measure("commensurate A2-weighted norm", a2.value, 0.0),
    ])
}

fn sweep_regression() -> Outcome {
    let baseline: SweepBaseline = load_json(baseline_path("sweep_aux.json"))?;
    let spec = &baseline.table.spec;
    let s_grid: Vec<f64> = (0..25).map(|i| 2.0 * i as f64 / 24.0).collect();
    let setup = spec.s_values == s_grid
        && spec.omega_values == [0.5, 1.0]
        && spec.q_values == [1.2, 1.4]
        && (spec.grid.n_space, spec.grid.n_time, spec.grid.box_len) == (16, 16, TAU)
        && baseline.kind == ProblemKind::Aux;
    let current = estimate_sweep(spec, baseline.kind)?;
    let report = check_sweep(&current, &baseline, SWEEP_REGRESSION_TOL);
    Ok(vec![
        Part::flag("baseline covers s in [0, 2], w in {0.5, 1}, q in {1.2, 1.4}", setup),
        Part::flag("fingerprint", report.fingerprint_match),
        Part::measure(
            format!("max rel diff over {} constants", report.compared),
            report.max_rel_diff,
            SWEEP_REGRESSION_TOL,
        ),
    ])
}

fn main() {
    let checks: [Check; 11] = [
        ("single-mode closed form", single_mode_closed_form),
        ("residual suite", residual_suite),
        ("symbol identities", symbol_identities),
        ("modulation equivariance", modulation_equivariance),
        ("resonance sharpness", resonance_sharpness),
        ("rotation algebra", rotation_algebra),
        ("rotating vs plain", rotating_vs_plain),
        ("multiplier scan", multiplier_scan),
        ("resonance arithmetic", resonance_arithmetic),
        ("time-periodic synthesis", tp_synthesis),
        ("estimate sweep regression", sweep_regression),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(parts) => (
                parts.iter().all(Part::ok),
                parts.iter().map(Part::describe).collect::<Vec<_>>().join("; "),
            ),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 11 passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
