//! Command-line front end: `derive`, `figures`, `storage`, `verify`.

pub mod commands;
pub mod config;
pub mod error;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use quasidark_core::dynamics::{Model, RampShape};

pub use commands::{cmd_derive, cmd_figures, cmd_storage, cmd_verify, VerifyHooks, VerifySummary};
pub use config::RunConfig;
pub use error::CliError;
pub use output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "quasidark", version, about = "Qubit storage in a molecular memory through a detuned cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Effective constants over the Omega grid (CSV).
    Derive,
    /// theta, detuning and leakage tables.
    Figures,
    /// Adiabatic storage run, optionally followed by retrieval.
    Storage,
    /// Invariant checks; exits 3 when any check fails.
    Verify,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Largest Rabi frequency of the grid [MHz].
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,
    /// Number of grid intervals.
    #[arg(long, global = true)]
    pub grid_steps: Option<usize>,
    #[arg(long, global = true, value_parser = parse_ramp)]
    pub ramp: Option<RampShape>,
    /// Ramp duration [us].
    #[arg(long, global = true)]
    pub duration_us: Option<f64>,
    #[arg(long, global = true, value_parser = parse_model)]
    pub model: Option<Model>,
    /// Real amplitude of |g> in the stored state.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// |delta|, amplitude of |e>.
    #[arg(long, global = true)]
    pub delta_abs: Option<f64>,
    /// Phase of delta [rad].
    #[arg(long, global = true)]
    pub delta_phase: Option<f64>,
    /// Replace the ramp by a near-instant switch.
    #[arg(long, global = true)]
    pub sudden: bool,
    /// Run the reversed ramp after storage.
    #[arg(long, global = true)]
    pub retrieve: bool,
    #[arg(long, global = true, hide = true)]
    pub inject_eta_error: Option<f64>,
}

fn parse_ramp(s: &str) -> Result<RampShape, String> {
    s.parse().map_err(|e: quasidark_core::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: quasidark_core::Error| e.to_string())
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(x) = self.omega_max {
            cfg.grid.omega_max = x;
        }
        if let Some(n) = self.grid_steps {
            cfg.grid.steps = n;
        }
        if let Some(r) = self.ramp {
            cfg.schedule.ramp = r;
        }
        if let Some(t) = self.duration_us {
            cfg.schedule.duration_us = t;
        }
        if let Some(m) = self.model {
            cfg.storage.model = m;
        }
        if let Some(g) = self.gamma {
            cfg.storage.gamma = Some(g);
            if self.delta_abs.is_none() {
                cfg.storage.delta_abs = (1.0 - g * g).max(0.0).sqrt();
            }
        }
        if let Some(d) = self.delta_abs {
            cfg.storage.delta_abs = d;
        }
        if let Some(phi) = self.delta_phase {
            cfg.storage.delta_phase = phi;
        }
        cfg.storage.sudden |= self.sudden;
        cfg.storage.retrieve |= self.retrieve;
    }
}

/// Resolve the configuration (flag > file > default) and validate it.
pub fn resolve_config(overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Run one subcommand; what it prints goes to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli.overrides)?;
    match cli.command {
        Command::Derive => {
            let text = cmd_derive(&cfg)?;
            if cfg.output.is_none() {
                stdout.write_all(text.as_bytes())?;
            }
        }
        Command::Figures => {
            for path in cmd_figures(&cfg)? {
                writeln!(stdout, "{}", path.display())?;
            }
        }
        Command::Storage => {
            let run = cmd_storage(&cfg)?;
            writeln!(stdout, "{}", run.report_summary()?)?;
        }
        Command::Verify => {
            let hooks = VerifyHooks {
                eta_error: cli.overrides.inject_eta_error.unwrap_or(0.0),
            };
            let summary = cmd_verify(&cfg, hooks)?;
            let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(stdout, "{json}")?;
            if !summary.passed {
                return Err(CliError::VerifyFailed(summary.failed()));
            }
        }
    }
    Ok(())
}
