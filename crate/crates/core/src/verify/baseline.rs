//! Frozen baselines: the first run records its numbers, later runs are compared to them.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::report::ProblemKind;

use super::scan::{ScanGrid, ScanResult};
use super::sweep::{SweepForcing, SweepTable};

/// Relative agreement required of every sweep constant.
pub const SWEEP_REGRESSION_TOL: f64 = 1e-10;
/// Relative drift allowed in the scan uniformity factor.
pub const SCAN_REGRESSION_TOL: f64 = 0.1;

/// SHA-256 over the bit patterns of the grid and the seed.
pub fn fingerprint(grid: &GridSpec, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(grid.period.to_bits().to_le_bytes());
    h.update(grid.box_len.to_bits().to_le_bytes());
    h.update((grid.n_space as u64).to_le_bytes());
    h.update((grid.n_time as u64).to_le_bytes());
    h.update(seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn sweep_seed(table: &SweepTable) -> u64 {
    match &table.spec.forcing {
        SweepForcing::Ensemble(e) => e.seed,
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub omega: f64,
    pub s: f64,
    pub member: usize,
    pub q: f64,
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepBaseline {
    pub fingerprint: String,
    pub kind: ProblemKind,
    pub table: SweepTable,
}

impl SweepBaseline {
    pub fn freeze(table: &SweepTable) -> Self {
        SweepBaseline {
            fingerprint: fingerprint(&table.spec.grid, sweep_seed(table)),
            kind: table.kind,
            table: table.clone(),
        }
    }

    pub fn entries(&self) -> Vec<BaselineEntry> {
        entries(&self.table)
    }
}

fn entries(t: &SweepTable) -> Vec<BaselineEntry> {
    t.rows
        .iter()
        .map(|r| BaselineEntry {
            omega: r.omega,
            s: r.s,
            member: r.member,
            q: r.q,
            constant: r.constant,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub baseline: BaselineEntry,
    pub current: Option<f64>,
    pub rel_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub fingerprint_match: bool,
    pub compared: usize,
    pub max_rel_diff: f64,
    pub tolerance: f64,
    pub mismatches: Vec<Mismatch>,
    pub passed: bool,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Compare a rerun against a baseline cell by cell. Cells must line up exactly in
/// `(ω, s, member, q)`; a constant present on one side only is a mismatch.
pub fn check_sweep(current: &SweepTable, baseline: &SweepBaseline, tol: f64) -> RegressionReport {
    let fp = fingerprint(&current.spec.grid, sweep_seed(current));
    let fingerprint_match = fp == baseline.fingerprint && current.kind == baseline.kind;
    let cur = entries(current);
    let base = baseline.entries();
    let mut mismatches = Vec::new();
    let mut max_rel = 0.0f64;
    let aligned = cur.len() == base.len();
    for (b, c) in base.iter().zip(&cur) {
        let same_cell = (b.omega, b.s, b.member, b.q) == (c.omega, c.s, c.member, c.q);
        let d = match (b.constant, c.constant) {
            (Some(x), Some(y)) if same_cell => rel_diff(x, y),
            (None, None) if same_cell => 0.0,
            _ => f64::INFINITY,
        };
        max_rel = max_rel.max(d);
        if !(d <= tol) {
            mismatches.push(Mismatch {
                baseline: b.clone(),
                current: c.constant,
                rel_diff: d,
            });
        }
    }
    if !aligned {
        max_rel = f64::INFINITY;
    }
    RegressionReport {
        fingerprint_match,
        compared: base.len().min(cur.len()),
        max_rel_diff: max_rel,
        tolerance: tol,
        passed: fingerprint_match && aligned && mismatches.is_empty(),
        mismatches,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanBaseline {
    pub omega: f64,
    pub s_values: Vec<f64>,
    pub grid: ScanGrid,
    pub uniformity: f64,
    pub result: ScanResult,
}

impl ScanBaseline {
    pub fn freeze(result: &ScanResult) -> Self {
        ScanBaseline {
            omega: result.omega,
            s_values: result.s_values.clone(),
            grid: result.grid,
            uniformity: result.uniformity,
            result: result.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRegression {
    pub same_setup: bool,
    pub baseline_uniformity: f64,
    pub current_uniformity: f64,
    pub rel_change: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_scan(current: &ScanResult, baseline: &ScanBaseline, tol: f64) -> ScanRegression {
    let same_setup =
        current.omega == baseline.omega && current.s_values == baseline.s_values && current.grid == baseline.grid;
    let rel_change = (current.uniformity - baseline.uniformity).abs() / baseline.uniformity;
    ScanRegression {
        same_setup,
        baseline_uniformity: baseline.uniformity,
        current_uniformity: current.uniformity,
        rel_change,
        tolerance: tol,
        passed: same_setup && rel_change <= tol,
    }
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_at(path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| io_at(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
