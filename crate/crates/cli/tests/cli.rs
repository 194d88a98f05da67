use std::path::Path;
use std::process::{Command, Output};

fn strot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_aux_matches_closed_form_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = strot(&["solve-aux", "--grid", "8,8,6.283185307179586", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    // Default mode k = 1, ξ = e₁ at s = 0.5, ω = 1: (dist + |s + ωk| + |ξ|²) / |D|.
    let want = 3.0 / (1.0f64 + 1.5 * 1.5).sqrt();
    let got = report["empirical_constant"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
    assert!(dir.path().join("u.strf").exists() && dir.path().join("p.strf").exists());
}

#[test]
fn resonant_forcing_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = strot(&[
        "solve-aux",
        "--grid",
        "8,8,6.283185307179586",
        "--s",
        "-1",
        "--forcing",
        "single-mode:k=1;m=0,0,0;amp=1,0,0",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn missing_input_exits_one_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.strf");
    let out = strot(&["solve-aux", "--input", s(&missing), "--out", s(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.strf"));
}

#[test]
fn bad_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"omgea": 2.0}"#).unwrap();
    let out = strot(&["resonance-scan", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"omega": 2.0, "s": 0.25, "period": 9.42477796076938}"#).unwrap();
    let out = strot(&["resonance-scan", "--config", s(&cfg), "--s", "0.75", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let resolved = json(&dir.path().join("resolved_config.json"));
    assert_eq!(resolved["omega"], 2.0);
    assert_eq!(resolved["s"], 0.75);
    assert_eq!(resolved["seed"], 0);
    // (2π/T)/ω = 1/3.
    let report = json(&dir.path().join("resonance_report.json"));
    let d = report["d_omega_t"].as_f64().unwrap();
    assert!((d - 2.0 / 3.0).abs() < 1e-9, "{report}");
}

fn small_sweep(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "sweep",
        "--grid",
        "8,8,6.283185307179586",
        "--s-values",
        "0,0.4,1.3",
        "--omega-values",
        "1",
        "--q",
        "1.3",
        "--members",
        "2",
        "--seed",
        "9",
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    strot(&args)
}

#[test]
fn resolved_config_replays_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&small_sweep(&a, &[])), 0);
    let replay = strot(&[
        "sweep",
        "--config",
        s(&a.join("resolved_config.json")),
        "--out",
        s(&b),
        "--threads",
        "1",
    ]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    for f in ["sweep.json", "sweep.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_baseline_freeze_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.json");
    assert_eq!(code(&small_sweep(&dir.path().join("a"), &["--freeze-baseline", s(&base)])), 0);
    let check = small_sweep(&dir.path().join("b"), &["--baseline", s(&base)]);
    assert_eq!(code(&check), 0, "{}", String::from_utf8_lossy(&check.stderr));
    assert_eq!(json(&dir.path().join("b/regression.json"))["passed"], true);
    // A different seed is a different experiment.
    let other = strot(&[
        "sweep",
        "--grid",
        "8,8,6.283185307179586",
        "--s-values",
        "0,0.4,1.3",
        "--omega-values",
        "1",
        "--q",
        "1.3",
        "--seed",
        "10",
        "--out",
        s(&dir.path().join("c")),
        "--baseline",
        s(&base),
    ]);
    assert_eq!(code(&other), 1);
}

#[test]
fn zero_threads_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_sweep(dir.path(), &["--threads", "0"])), 1);
}
