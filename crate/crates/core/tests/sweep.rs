use std::f64::consts::PI;

use num_complex::Complex64;
use strot_core::auxiliary::{modulate, solve_aux, AuxProblem, Sign};
use strot_core::generators::EnsembleParams;
use strot_core::report::ProblemKind;
use strot_core::resonance::dist_to_lattice;
use strot_core::verify::{estimate_sweep, CellStatus, SweepForcing, SweepSpec};
use strot_core::GridSpec;

/// A single mode has constant pointwise magnitudes, so every norm ratio is a ratio of
/// symbol values: `(dist + |s + ωk| + |ξ|²) / |is + iωk + |ξ|²|`.
fn single_mode_constant(s: f64, omega: f64, k: i64, xi_sq: f64) -> f64 {
    let d = Complex64::new(xi_sq, s + omega * k as f64);
    (dist_to_lattice(s, omega) + (s + omega * k as f64).abs() + xi_sq) / d.norm()
}

#[test]
fn single_mode_cells_match_closed_form() {
    let (k, m) = (2, [1, -2, 0]);
    let amp = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, -1.0)];
    let spec = SweepSpec {
        s_values: vec![0.0, 0.3, 1.1, 2.0],
        omega_values: vec![0.5, 1.0],
        q_values: vec![1.2, 1.4],
        forcing: SweepForcing::SingleMode { k, m, amp },
        grid: GridSpec::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap(),
    };
    let table = estimate_sweep(&spec, ProblemKind::Aux).unwrap();
    assert_eq!(table.rows.len(), 16);
    // a ⊥ ξ: (2, 1, 0.5-i)·(1, -2, 0) = 0.
    let xi_sq = 5.0;
    for r in &table.rows {
        assert_eq!(r.status, CellStatus::Ok);
        let want = single_mode_constant(r.s, r.omega, k, xi_sq);
        let got = r.constant.unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "s={} ω={}: {got} vs {want}", r.s, r.omega);
    }
}

fn ensemble_forcing(grid: &GridSpec) -> strot_core::SpectralField {
    EnsembleParams::new(21, 1).member(grid, 0).unwrap()
}

#[test]
fn constants_are_homogeneous() {
    let grid = GridSpec::for_rotation(1.0, 2.0 * PI, 8, 8).unwrap();
    let f = ensemble_forcing(&grid);
    let base = solve_aux(&AuxProblem::new(0.4, 1.0, f.clone()).unwrap(), &[1.2, 1.4]).unwrap();
    for alpha in [1e-3, 7.5, -2.0] {
        let scaled = f.scaled(Complex64::new(alpha, 0.3 * alpha));
        let r = solve_aux(&AuxProblem::new(0.4, 1.0, scaled).unwrap(), &[1.2, 1.4]).unwrap();
        for (a, b) in base.report.lq_norms.iter().zip(&r.report.lq_norms) {
            let (ca, cb) = (a.empirical_constant.unwrap(), b.empirical_constant.unwrap());
            assert!((ca - cb).abs() <= 1e-10 * ca, "alpha={alpha}: {ca} vs {cb}");
        }
    }
}

#[test]
fn constants_survive_modulation_shift() {
    let grid = GridSpec::for_rotation(1.0, 2.0 * PI, 8, 16).unwrap();
    let f = ensemble_forcing(&grid);
    let s = 0.35;
    let base = solve_aux(&AuxProblem::new(s, 1.0, f.clone()).unwrap(), &[1.2]).unwrap();
    for ell in [-3i64, -1, 1, 2] {
        // (s, f) -> (s - ωℓ, f·exp(iωℓt)).
        let g = modulate(&f, ell, Sign::Plus).unwrap();
        let r = solve_aux(&AuxProblem::new(s - ell as f64, 1.0, g).unwrap(), &[1.2]).unwrap();
        let (ca, cb) = (base.report.empirical_constant.unwrap(), r.report.empirical_constant.unwrap());
        assert!((ca - cb).abs() <= 1e-10 * ca, "ell={ell}: {ca} vs {cb}");
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let spec = SweepSpec {
        s_values: vec![0.0, 0.7, 1.9],
        omega_values: vec![1.0],
        q_values: vec![1.3],
        forcing: SweepForcing::Ensemble(EnsembleParams::new(4, 2)),
        grid: GridSpec::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap(),
    };
    let a = estimate_sweep(&spec, ProblemKind::Aux).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| estimate_sweep(&spec, ProblemKind::Aux).unwrap());
    let bits = |t: &strot_core::verify::SweepTable| -> Vec<u64> {
        t.rows.iter().map(|r| r.constant.unwrap().to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a, b);
}
