use std::f64::consts::PI;

use strot_core::auxiliary::{AuxOptions, Fault};
use strot_core::verify::{oracle_suite, oracle_suite_with};
use strot_core::GridSpec;

#[test]
fn fresh_grid_passes_and_fault_is_caught() {
    let grid = GridSpec::new(2.0 * PI, 2.0 * PI, 16, 16).unwrap();
    let report = oracle_suite(&grid, 11);
    for r in &report.results {
        println!("{:<24} {:>10.3e} tol {:.0e} {} {:?}", r.name, r.value, r.tolerance, r.passed, r.detail);
    }
    assert!(report.passed);

    let faulty = AuxOptions {
        fault: Some(Fault::FlipDiffusionSign),
    };
    let bad = oracle_suite_with(&grid, 11, &faulty);
    let residual = bad.result("residual").unwrap();
    assert!(!residual.passed);
    assert!(residual.detail.as_deref().unwrap().contains("member="));
    assert!(!bad.passed);
}

#[test]
fn report_is_deterministic() {
    let grid = GridSpec::new(PI, 2.0 * PI, 8, 8).unwrap();
    assert_eq!(oracle_suite(&grid, 3), oracle_suite(&grid, 3));
}
