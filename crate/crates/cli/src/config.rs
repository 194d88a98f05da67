//! Run configuration: flags override the config file, which overrides the defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use strot_core::report::ProblemKind;
use strot_core::GridSpec;

use crate::Command;

/// `--grid N,NT,L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridArg {
    pub n_space: usize,
    pub n_time: usize,
    pub box_len: f64,
}

impl std::str::FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n, nt, l] = parts.as_slice() else {
            return Err(format!("expected N,NT,L, got '{s}'"));
        };
        Ok(GridArg {
            n_space: n.parse().map_err(|e| format!("N: {e}"))?,
            n_time: nt.parse().map_err(|e| format!("NT: {e}"))?,
            box_len: l.parse().map_err(|e| format!("L: {e}"))?,
        })
    }
}

impl GridArg {
    pub fn spec(&self, period: f64) -> strot_core::Result<GridSpec> {
        GridSpec::new(period, self.box_len, self.n_space, self.n_time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Aux,
    RotResolvent,
    Tp,
}

impl From<SweepKind> for ProblemKind {
    fn from(k: SweepKind) -> Self {
        match k {
            SweepKind::Aux => ProblemKind::Aux,
            SweepKind::RotResolvent => ProblemKind::RotResolvent,
            SweepKind::Tp => ProblemKind::Tp,
        }
    }
}

/// Settings shared by the flags and the config file; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Subcommand that produced a resolved config; ignored on input.
    #[arg(skip)]
    pub command: Option<String>,
    /// Output directory [default: strot-out].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for generated forcings [default: 0].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads [default: available cores]; results do not depend on it.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Spatial points, time samples and box length [default: 16,16,6.283185307179586;
    /// 24,16,6.283185307179586 for solve-resolvent and solve-tp].
    #[arg(long, value_name = "N,NT,L")]
    pub grid: Option<GridArg>,
    /// Resolvent parameter [default: 0.5; 100 for solve-resolvent].
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Angular velocity [default: 1].
    #[arg(long, value_name = "F")]
    pub omega: Option<f64>,
    /// Time period T [default: 2π/ω; 2π/100 for solve-tp].
    #[arg(long, value_name = "F")]
    pub period: Option<f64>,
    /// Integrability exponents [default: 1.2,1.4].
    #[arg(long, value_name = "F[,F...]", value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Forcing generator, e.g. `single-mode:k=1;m=1,0,0;amp=0,1,0`, `swirl`,
    /// `localized:degree=2`, `ensemble:member=0`, `gradient:m=1,0,0`, `zero`.
    #[arg(long, value_name = "GEN")]
    pub forcing: Option<String>,
    /// Forcing field file; takes precedence over --forcing.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Sweep or scan s values [default: sweep 25 points on [0, 2·max ω]; scan
    /// 0.05ω,0.25ω,0.5ω].
    #[arg(long, value_name = "F[,F...]", value_delimiter = ',', allow_hyphen_values = true)]
    pub s_values: Option<Vec<f64>>,
    /// Sweep ω values [default: the --omega value].
    #[arg(long, value_name = "F[,F...]", value_delimiter = ',')]
    pub omega_values: Option<Vec<f64>>,
    /// Sweep ensemble size [default: 2].
    #[arg(long, value_name = "N")]
    pub members: Option<usize>,
    /// Sweep problem kind [default: aux].
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Also run the scan at doubled density and report the change.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub refine: Option<bool>,
    /// Compare results against this frozen baseline.
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,
    /// Write results as a new baseline.
    #[arg(long, value_name = "PATH")]
    pub freeze_baseline: Option<PathBuf>,
}

/// Fully resolved configuration, written next to every run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub grid: GridArg,
    pub s: f64,
    pub omega: f64,
    pub period: f64,
    pub q: Vec<f64>,
    pub forcing: Option<String>,
    pub input: Option<PathBuf>,
    pub s_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub members: usize,
    pub kind: SweepKind,
    pub refine: bool,
    pub baseline: Option<PathBuf>,
    pub freeze_baseline: Option<PathBuf>,
}

pub const DEFAULT_OUT: &str = "strot-out";
pub const DEFAULT_Q: [f64; 2] = [1.2, 1.4];
pub const SCAN_S_FACTORS: [f64; 3] = [0.05, 0.25, 0.5];
pub const SWEEP_POINTS: usize = 25;
/// Resolvent parameter where rotating solves stay localized on a 2π box.
pub const ROTATING_S: f64 = 100.0;

fn default_forcing(command: Command) -> Option<&'static str> {
    match command {
        Command::SolveAux => Some("single-mode:k=1;m=1,0,0;amp=0,1,0"),
        Command::SolveResolvent => Some("swirl"),
        Command::SolveTp => Some("localized:modes=1,2"),
        _ => None,
    }
}

fn load(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn resolve(command: Command, flags: Settings) -> Result<RunConfig> {
    let file = match &flags.config {
        Some(p) => load(p)?,
        None => Settings::default(),
    };
    macro_rules! pick {
        ($f:ident) => {
            flags.$f.clone().or(file.$f.clone())
        };
    }
    let rotating = matches!(command, Command::SolveResolvent | Command::SolveTp);
    let tau = 2.0 * std::f64::consts::PI;
    let omega = pick!(omega).unwrap_or(1.0);
    let grid = pick!(grid).unwrap_or(GridArg {
        n_space: if rotating { 24 } else { 16 },
        n_time: 16,
        box_len: tau,
    });
    let period = pick!(period).unwrap_or(if command == Command::SolveTp {
        tau / ROTATING_S
    } else {
        tau / omega
    });
    let omega_values = pick!(omega_values).unwrap_or_else(|| vec![omega]);
    let s_values = pick!(s_values).unwrap_or_else(|| match command {
        Command::VerifyMultiplier => SCAN_S_FACTORS.iter().map(|f| f * omega).collect(),
        _ => {
            let top = 2.0 * omega_values.iter().copied().fold(0.0, f64::max);
            (0..SWEEP_POINTS).map(|i| top * i as f64 / (SWEEP_POINTS - 1) as f64).collect()
        }
    });
    let input = pick!(input);
    let forcing = pick!(forcing).or_else(|| match input {
        Some(_) => None,
        None => default_forcing(command).map(String::from),
    });
    let cfg = RunConfig {
        command: command.name().to_string(),
        out: pick!(out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        seed: pick!(seed).unwrap_or(0),
        threads: pick!(threads),
        grid,
        s: pick!(s).unwrap_or(if command == Command::SolveResolvent { ROTATING_S } else { 0.5 }),
        omega,
        period,
        q: pick!(q).unwrap_or_else(|| DEFAULT_Q.to_vec()),
        forcing,
        input,
        s_values,
        omega_values,
        members: pick!(members).unwrap_or(2),
        kind: pick!(kind).unwrap_or(SweepKind::Aux),
        refine: pick!(refine).unwrap_or(false),
        baseline: pick!(baseline),
        freeze_baseline: pick!(freeze_baseline),
    };
    if cfg.threads == Some(0) {
        bail!("--threads must be positive");
    }
    if cfg.q.is_empty() {
        bail!("--q needs at least one exponent");
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arg_parses() {
        let g: GridArg = "16, 8,6.5".parse().unwrap();
        assert_eq!((g.n_space, g.n_time, g.box_len), (16, 8, 6.5));
        assert!("16,8".parse::<GridArg>().is_err());
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 5, "omega": 2.0, "s": 0.1}"#).unwrap();
        let flags = Settings {
            config: Some(path),
            s: Some(0.3),
            ..Settings::default()
        };
        let c = resolve(Command::SolveAux, flags).unwrap();
        assert_eq!((c.seed, c.omega, c.s), (5, 2.0, 0.3));
        assert_eq!(c.period, std::f64::consts::PI);
        assert_eq!(c.q, DEFAULT_Q.to_vec());
        assert_eq!(c.forcing.as_deref(), Some("single-mode:k=1;m=1,0,0;amp=0,1,0"));
    }

    #[test]
    fn sweep_defaults_span_two_omega() {
        let c = resolve(Command::Sweep, Settings::default()).unwrap();
        assert_eq!(c.s_values.len(), SWEEP_POINTS);
        assert_eq!((c.s_values[0], c.s_values[24]), (0.0, 2.0));
        let c = resolve(Command::VerifyMultiplier, Settings::default()).unwrap();
        assert_eq!(c.s_values, vec![0.05, 0.25, 0.5]);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sead": 5}"#).unwrap();
        let flags = Settings {
            config: Some(path),
            ..Settings::default()
        };
        assert!(resolve(Command::SolveAux, flags).is_err());
    }
}
