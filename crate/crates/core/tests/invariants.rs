use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use strot_core::auxiliary::{modulate, reduce_modulation, solve_aux, AuxProblem, Sign};
use strot_core::resonance::{d_omega_t, dist_to_lattice};
use strot_core::rotation::{mat_vec, q_matrix};
use strot_core::spectral::{to_physical, to_spectral};
use strot_core::symbols::{eval_m_family, leray_symbol, FreqPoint};
use strot_core::{GridSpec, PhysicalField, SpectralField};

fn xi_strategy() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-50.0..50.0f64)
}

fn small_grid() -> GridSpec {
    GridSpec::new(TAU, TAU, 4, 8).unwrap()
}

fn field_strategy(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #[test]
    fn leray_is_a_symmetric_projection_killing_xi(xi in xi_strategy()) {
        let p = leray_symbol(xi);
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..3 {
            let px: f64 = (0..3).map(|l| p[j][l] * xi[l]).sum();
            prop_assert!(px.abs() <= 1e-13 * norm.max(1.0));
            for l in 0..3 {
                prop_assert_eq!(p[j][l], p[l][j]);
                let pp: f64 = (0..3).map(|i| p[j][i] * p[i][l]).sum();
                prop_assert!((pp - p[j][l]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn partition_of_unity(s in -10.0..10.0f64, omega in 0.01..10.0f64, k in -50i64..50, xi in xi_strategy()) {
        let b = eval_m_family(&FreqPoint::new(s, omega, k as f64, xi));
        prop_assume!(!b.resonant);
        let sum = b.m0 + b.m1 - (b.mjl[0][0] + b.mjl[1][1] + b.mjl[2][2]);
        let scale = (b.m0.norm() + b.m1.norm() + 1.0).max(1.0);
        prop_assert!((sum - 1.0).norm() <= 1e-14 * scale);
    }

    #[test]
    fn lattice_distance_is_periodic_and_bounded(s in -100.0..100.0f64, omega in 0.1..10.0f64, n in -5i64..5) {
        let d = dist_to_lattice(s, omega);
        prop_assert!(d >= 0.0 && d <= 0.5 * omega * (1.0 + 1e-12));
        prop_assert!((dist_to_lattice(s + n as f64 * omega, omega) - d).abs() <= 1e-9 * omega);
        prop_assert!((dist_to_lattice(-s, omega) - d).abs() <= 1e-12 * omega.max(s.abs()));
    }

    #[test]
    fn modulation_reduction_recomposes(s in -100.0..100.0f64, omega in 0.1..10.0f64) {
        let m = reduce_modulation(s, omega);
        prop_assert!(m.s_tilde >= -0.5 * omega && m.s_tilde < 0.5 * omega);
        prop_assert!((omega * m.ell as f64 + m.s_tilde - s).abs() <= 1e-12 * s.abs().max(omega));
    }

    #[test]
    fn rotations_compose(omega in 0.1..5.0f64, t1 in -5.0..5.0f64, t2 in -5.0..5.0f64, x in prop::array::uniform3(-1.0..1.0f64)) {
        let once = mat_vec(&q_matrix(omega, t1 + t2), x);
        let twice = mat_vec(&q_matrix(omega, t1), mat_vec(&q_matrix(omega, t2), x));
        for i in 0..3 {
            prop_assert!((once[i] - twice[i]).abs() <= 1e-12);
        }
        let n0: f64 = x.iter().map(|v| v * v).sum();
        let n1: f64 = once.iter().map(|v| v * v).sum();
        prop_assert!((n0 - n1).abs() <= 1e-14);
    }

    #[test]
    fn rational_ratios_give_omega_over_q(p in 1i64..20, q in 1i64..20, omega in 0.2..5.0f64) {
        prop_assume!(gcd(p, q) == 1);
        let period = TAU / (omega * p as f64 / q as f64);
        let m = d_omega_t(period, omega, 400).unwrap();
        prop_assert!(m.stabilized);
        prop_assert!((m.value - omega / q as f64).abs() <= 1e-9 * omega);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transforms_round_trip(data in field_strategy(small_grid().len() * 3)) {
        let g = small_grid();
        let f = PhysicalField::from_data(g, 3, data).unwrap();
        let back = to_physical(&to_spectral(&f));
        prop_assert!(back.max_rel_diff(&f).unwrap() <= 1e-14);
    }

    #[test]
    fn modulation_shifts_undo(data in field_strategy(small_grid().len() * 3), ell in -1i64..=1) {
        let g = small_grid();
        // Clear the modes a shift by ±1 could push off the grid.
        let mut f = SpectralField::from_data(g, 3, data).unwrap();
        for k in [g.k_min(), g.k_max()] {
            let t = g.mode_slot(k).unwrap();
            f.slice_data_mut(t).iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        }
        let back = modulate(&modulate(&f, ell, Sign::Plus).unwrap(), ell, Sign::Minus).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn aux_solve_is_linear(
        a in field_strategy(small_grid().len() * 3),
        b in field_strategy(small_grid().len() * 3),
        alpha in -3.0..3.0f64,
        s in 0.1..0.4f64,
    ) {
        let g = small_grid();
        let fa = SpectralField::from_data(g, 3, a).unwrap();
        let fb = SpectralField::from_data(g, 3, b).unwrap();
        let combo: Vec<Complex64> = fa.data().iter().zip(fb.data()).map(|(x, y)| x * alpha + y).collect();
        let fc = SpectralField::from_data(g, 3, combo).unwrap();
        let ua = solve_aux(&AuxProblem::new(s, 1.0, fa).unwrap(), &[]).unwrap().velocity;
        let ub = solve_aux(&AuxProblem::new(s, 1.0, fb).unwrap(), &[]).unwrap().velocity;
        let uc = solve_aux(&AuxProblem::new(s, 1.0, fc).unwrap(), &[]).unwrap().velocity;
        let sum: Vec<Complex64> = ua.data().iter().zip(ub.data()).map(|(x, y)| x * alpha + y).collect();
        let sum = SpectralField::from_data(g, 3, sum).unwrap();
        prop_assert!(uc.max_rel_diff(&sum).unwrap() <= 1e-13);
    }
}
