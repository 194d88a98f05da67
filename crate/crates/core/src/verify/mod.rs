//! Batch verification: multiplier scans, empirical-constant sweeps, oracle suites and
//! regression baselines.

pub mod baseline;
pub mod oracle;
pub mod scan;
pub mod sweep;

pub use baseline::{check_scan, check_sweep, fingerprint, ScanBaseline, SweepBaseline};
pub use oracle::{oracle_suite, oracle_suite_with, OracleReport, OracleResult};
pub use scan::{marcinkiewicz_scan, refinement_change, ScanGrid, ScanResult, ScanRow, ScanValue};
pub use sweep::{estimate_sweep, CellStatus, SweepForcing, SweepRow, SweepSpec, SweepSummary, SweepTable};
