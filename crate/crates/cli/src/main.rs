//! `strot`: solve, scan and verify from the command line.
//!
//! Exit codes: 0 success, 2 resonant forcing, 1 any other failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod generator;

use config::Settings;

#[derive(Parser)]
#[command(name = "strot", version, about = "Spectral solver and verification harness for rotating time-periodic Stokes flow")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve the auxiliary time-periodic problem on the rotation clock.
    SolveAux(Settings),
    /// Solve the rotating resolvent problem for a localized forcing.
    SolveResolvent(Settings),
    /// Solve the time-periodic rotating problem mode by mode.
    SolveTp(Settings),
    /// Report dist(s, ωℤ), d_{ω,T}, commensurability and the spectrum lines.
    ResonanceScan(Settings),
    /// Scan weighted multiplier derivatives across s.
    VerifyMultiplier(Settings),
    /// Tabulate empirical estimate constants over (s, ω, q) and forcings.
    Sweep(Settings),
    /// Run the closed-form oracle suite.
    OracleSuite(Settings),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SolveAux,
    SolveResolvent,
    SolveTp,
    ResonanceScan,
    VerifyMultiplier,
    Sweep,
    OracleSuite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SolveAux => "solve-aux",
            Command::SolveResolvent => "solve-resolvent",
            Command::SolveTp => "solve-tp",
            Command::ResonanceScan => "resonance-scan",
            Command::VerifyMultiplier => "verify-multiplier",
            Command::Sweep => "sweep",
            Command::OracleSuite => "oracle-suite",
        }
    }
}

impl Sub {
    fn split(self) -> (Command, Settings) {
        match self {
            Sub::SolveAux(s) => (Command::SolveAux, s),
            Sub::SolveResolvent(s) => (Command::SolveResolvent, s),
            Sub::SolveTp(s) => (Command::SolveTp, s),
            Sub::ResonanceScan(s) => (Command::ResonanceScan, s),
            Sub::VerifyMultiplier(s) => (Command::VerifyMultiplier, s),
            Sub::Sweep(s) => (Command::Sweep, s),
            Sub::OracleSuite(s) => (Command::OracleSuite, s),
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let resonant = err
        .chain()
        .filter_map(|e| e.downcast_ref::<strot_core::Error>())
        .any(strot_core::Error::is_resonant);
    if resonant {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STROT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let (command, settings) = Cli::parse().command.split();
    let result = config::resolve(command, settings).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        commands::run(command, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
