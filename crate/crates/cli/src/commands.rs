//! Subcommand bodies. Each writes `resolved_config.json` first, then its artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use strot_core::auxiliary::{solve_aux, AuxProblem};
use strot_core::generators::EnsembleParams;
use strot_core::io::{read_field, write_field, FieldData};
use strot_core::resonance::{resonance_report, write_spectrum_csv, ResonanceQuery};
use strot_core::rotation::solve_rot_resolvent;
use strot_core::spectral::{box_to_physical, to_spectral};
use strot_core::synthesis::{decompose_modes, solve_tp, TpProblem};
use strot_core::verify::baseline::{
    check_scan, check_sweep, load_json, ScanBaseline, SweepBaseline, SCAN_REGRESSION_TOL, SWEEP_REGRESSION_TOL,
};
use strot_core::verify::scan::REFINEMENT_TOL;
use strot_core::verify::{
    estimate_sweep, marcinkiewicz_scan, oracle_suite, refinement_change, ScanGrid, SweepForcing, SweepSpec,
};
use strot_core::{BoxField, BoxGrid, Complex64, SpectralField};

use crate::config::RunConfig;
use crate::generator::Generator;
use crate::Command;

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn save_field(dir: &Path, name: &str, field: impl Into<FieldData>) -> Result<()> {
    let path = dir.join(name);
    write_field(&path, &field.into()).with_context(|| format!("writing {}", path.display()))
}

fn load_input(path: &Path) -> Result<FieldData> {
    read_field(path).with_context(|| format!("reading forcing {}", path.display()))
}

fn generator(cfg: &RunConfig) -> Result<Generator> {
    match &cfg.forcing {
        Some(g) => g.parse(),
        None => bail!("{} needs --forcing or --input", cfg.command),
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write_json(&cfg.out, "resolved_config.json", cfg)?;
    log::info!("{} -> {}", cfg.command, cfg.out.display());
    match command {
        Command::SolveAux => solve_aux_cmd(cfg),
        Command::SolveResolvent => solve_resolvent_cmd(cfg),
        Command::SolveTp => solve_tp_cmd(cfg),
        Command::ResonanceScan => resonance_cmd(cfg),
        Command::VerifyMultiplier => verify_multiplier_cmd(cfg),
        Command::Sweep => sweep_cmd(cfg),
        Command::OracleSuite => oracle_cmd(cfg),
    }
}

fn solve_aux_cmd(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid.spec(cfg.period)?;
    let forcing: SpectralField = match &cfg.input {
        Some(p) => match load_input(p)? {
            FieldData::Spectral(f) => f,
            FieldData::Physical(f) => to_spectral(&f),
            _ => bail!("{}: solve-aux needs a space-time field", p.display()),
        },
        None => generator(cfg)?.spectral(&grid, cfg.seed)?,
    };
    let sol = solve_aux(&AuxProblem::new(cfg.s, cfg.omega, forcing)?, &cfg.q)?;
    save_field(&cfg.out, "u.strf", sol.velocity)?;
    save_field(&cfg.out, "p.strf", sol.pressure)?;
    write_json(&cfg.out, "report.json", &sol.report)?;
    let r = &sol.report;
    println!(
        "solve-aux: residual {:.3e}, divergence {:.3e}, constant {}",
        r.residual_pde,
        r.residual_div,
        fmt_opt(r.empirical_constant)
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |c| format!("{c:.6e}"))
}

fn solve_resolvent_cmd(cfg: &RunConfig) -> Result<()> {
    let bg = BoxGrid::new(cfg.grid.box_len, cfg.grid.n_space)?;
    let g: BoxField = match &cfg.input {
        Some(p) => match load_input(p)? {
            FieldData::Box(f) => f,
            FieldData::BoxSpectrum(f) => box_to_physical(&f),
            _ => bail!("{}: solve-resolvent needs a time-independent field", p.display()),
        },
        None => generator(cfg)?.box_forcing(bg, cfg.seed)?,
    };
    let sol = solve_rot_resolvent(&g, cfg.s, cfg.omega, cfg.grid.n_time, &cfg.q)?;
    save_field(&cfg.out, "v.strf", sol.velocity)?;
    save_field(&cfg.out, "p.strf", sol.pressure)?;
    write_json(&cfg.out, "report.json", &sol.report)?;
    let r = &sol.report;
    println!(
        "solve-resolvent: residual {:.3e}, time dependence {:.3e}, constant {}",
        r.residual_pde,
        r.time_dependence.unwrap_or(f64::NAN),
        fmt_opt(r.empirical_constant)
    );
    Ok(())
}

fn solve_tp_cmd(cfg: &RunConfig) -> Result<()> {
    let bg = BoxGrid::new(cfg.grid.box_len, cfg.grid.n_space)?;
    let series = match &cfg.input {
        Some(p) => match load_input(p)? {
            FieldData::Physical(f) => decompose_modes(&f),
            FieldData::Spectral(f) => decompose_modes(&strot_core::spectral::to_physical(&f)),
            _ => bail!("{}: solve-tp needs a space-time field", p.display()),
        },
        None => generator(cfg)?.mode_series(bg, cfg.period, cfg.seed)?,
    };
    let problem = TpProblem::new(cfg.omega, series, cfg.grid.n_time)?;
    let sol = solve_tp(&problem, &cfg.q)?;
    for (k, v) in &sol.velocity.modes {
        save_field(&cfg.out, &format!("u_k{k}.strf"), v.clone())?;
    }
    for (k, p) in &sol.pressure.modes {
        save_field(&cfg.out, &format!("p_k{k}.strf"), p.clone())?;
    }
    write_json(&cfg.out, "tp_report.json", &sol.report)?;
    println!(
        "solve-tp: {} modes, constant {}",
        sol.report.per_mode.len(),
        fmt_opt(sol.report.empirical_constant)
    );
    Ok(())
}

fn resonance_cmd(cfg: &RunConfig) -> Result<()> {
    let report = resonance_report(&ResonanceQuery::new(cfg.s, cfg.omega, cfg.period))?;
    write_json(&cfg.out, "resonance_report.json", &report)?;
    let path = cfg.out.join("spectrum.csv");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_spectrum_csv(&report.spectrum_lines, BufWriter::new(file))?;
    println!(
        "resonance-scan: dist {:.6e}, d_omega_T {:.6e}, commensurable {}",
        report.dist_value, report.d_omega_t, report.commensurable
    );
    Ok(())
}

fn verify_multiplier_cmd(cfg: &RunConfig) -> Result<()> {
    let grid = ScanGrid::default();
    let scan = marcinkiewicz_scan(&cfg.s_values, cfg.omega, &grid)?;
    write_json(&cfg.out, "scan.json", &scan)?;
    println!(
        "verify-multiplier: uniformity {:.6}, stable {}, finite {}",
        scan.uniformity, scan.stable, scan.all_finite
    );
    if cfg.refine {
        let fine = marcinkiewicz_scan(&cfg.s_values, cfg.omega, &grid.refined())?;
        let change = refinement_change(&scan, &fine)?;
        write_json(&cfg.out, "scan_refined.json", &fine)?;
        write_json(
            &cfg.out,
            "refinement.json",
            &serde_json::json!({ "change": change, "tolerance": REFINEMENT_TOL, "stable": change <= REFINEMENT_TOL }),
        )?;
        println!("verify-multiplier: refinement change {change:.3e}");
    }
    if let Some(path) = &cfg.freeze_baseline {
        strot_core::verify::baseline::save_json(path, &ScanBaseline::freeze(&scan))?;
    }
    if let Some(path) = &cfg.baseline {
        let base: ScanBaseline = load_json(path)?;
        let reg = check_scan(&scan, &base, SCAN_REGRESSION_TOL);
        write_json(&cfg.out, "regression.json", &reg)?;
        if !reg.passed {
            bail!(
                "scan regression against {}: uniformity {} vs baseline {} (same setup: {})",
                path.display(),
                reg.current_uniformity,
                reg.baseline_uniformity,
                reg.same_setup
            );
        }
    }
    Ok(())
}

fn sweep_forcing(cfg: &RunConfig) -> Result<SweepForcing> {
    let Some(text) = &cfg.forcing else {
        return Ok(SweepForcing::Ensemble(EnsembleParams::new(cfg.seed, cfg.members)));
    };
    let g: Generator = text.parse()?;
    Ok(match g.name.as_str() {
        "ensemble" => SweepForcing::Ensemble(EnsembleParams::new(cfg.seed, cfg.members)),
        "zero" => SweepForcing::Zero,
        "single-mode" => {
            let probe = strot_core::GridSpec::new(1.0, cfg.grid.box_len, cfg.grid.n_space, cfg.grid.n_time)?;
            let f = g.spectral(&probe, cfg.seed)?;
            let (k, m, amp) = single_mode_parts(&f)?;
            SweepForcing::SingleMode { k, m, amp }
        }
        other => bail!("sweep forcing must be ensemble, single-mode or zero, got '{other}'"),
    })
}

/// Read back the one occupied coefficient of a generated single mode.
fn single_mode_parts(f: &SpectralField) -> Result<(i64, [i64; 3], [Complex64; 3])> {
    let g = *f.grid();
    let bg = g.box_grid();
    for t in 0..g.n_time {
        let data = f.slice_data(t);
        for idx in 0..bg.len() {
            let c = &data[idx * 3..idx * 3 + 3];
            if c.iter().any(|v| v.norm() > 0.0) {
                let (i1, i2, i3) = bg.unflat(idx);
                let m = [bg.wave_index(i1), bg.wave_index(i2), bg.wave_index(i3)];
                return Ok((g.mode_index(t), m, [c[0], c[1], c[2]]));
            }
        }
    }
    bail!("single-mode forcing has zero amplitude")
}

fn sweep_cmd(cfg: &RunConfig) -> Result<()> {
    let spec = SweepSpec {
        s_values: cfg.s_values.clone(),
        omega_values: cfg.omega_values.clone(),
        q_values: cfg.q.clone(),
        forcing: sweep_forcing(cfg)?,
        grid: cfg.grid.spec(cfg.period)?,
    };
    let table = estimate_sweep(&spec, cfg.kind.into())?;
    write_json(&cfg.out, "sweep.json", &table)?;
    let path = cfg.out.join("sweep.csv");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    table.write_csv(BufWriter::new(file))?;
    let errors = table.rows.iter().filter(|r| r.message.is_some()).count();
    match &table.summary {
        Some(s) => println!(
            "sweep: {} cells, max {:.6e}, median {:.6e}, max/median {:.4}, {} error cells",
            s.cells, s.max, s.median, s.max_over_median, errors
        ),
        None => println!("sweep: no constants ({} rows, {} error cells)", table.rows.len(), errors),
    }
    if !table.excluded_omegas.is_empty() {
        println!(
            "sweep: excluded omega {:?} below {:.6e}",
            table.excluded_omegas, table.omega_threshold
        );
    }
    if let Some(path) = &cfg.freeze_baseline {
        strot_core::verify::baseline::save_json(path, &SweepBaseline::freeze(&table))?;
    }
    if let Some(path) = &cfg.baseline {
        let base: SweepBaseline = load_json(path)?;
        let reg = check_sweep(&table, &base, SWEEP_REGRESSION_TOL);
        write_json(&cfg.out, "regression.json", &reg)?;
        if !reg.passed {
            bail!(
                "sweep regression against {}: {} mismatches, max relative difference {:e}, fingerprint match {}",
                path.display(),
                reg.mismatches.len(),
                reg.max_rel_diff,
                reg.fingerprint_match
            );
        }
        println!("sweep: baseline matched, max relative difference {:e}", reg.max_rel_diff);
    }
    Ok(())
}

fn oracle_cmd(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid.spec(cfg.period)?;
    let report = oracle_suite(&grid, cfg.seed);
    write_json(&cfg.out, "oracle_report.json", &report)?;
    for r in &report.results {
        println!(
            "{} {:<24} {:.3e} (tol {:.0e}){}",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.value,
            r.tolerance,
            r.detail.as_deref().filter(|_| !r.passed).map(|d| format!(" {d}")).unwrap_or_default()
        );
    }
    if !report.passed {
        bail!("oracle suite failed");
    }
    Ok(())
}
