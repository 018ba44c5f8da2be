//! `solwave`: reproducible solitary-wave experiments from the command line.
//!
//! Exit codes: 0 success, 1 computational failure, 2 usage error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "solwave", version, about = "Solitary waves of the 1D nonlinear Schrodinger equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check hypotheses G1 to G5 over [omega_min, omega_max].
    Check(Overrides),
    /// Build the profile R at --omega on [-length/2, length/2).
    Profile(Overrides),
    /// Tabulate lambda(omega) and lambda'(omega).
    MassCurve(Overrides),
    /// Minimize the energy at mass --lambda.
    Minimize(Overrides),
    /// Minimize over the masses in --lambdas.
    ICurve(Overrides),
    /// Evolve the (perturbed) soliton at --omega.
    Evolve(Overrides),
    /// Run the perturbation sweep kinds x eps around the soliton of mass --lambda.
    Stability(Overrides),
    /// Spectrum of the linearized operator and the non-degeneracy certificate.
    Spectrum(Overrides),
}

impl Command {
    fn split(self) -> (&'static str, Overrides) {
        match self {
            Command::Check(o) => ("check", o),
            Command::Profile(o) => ("profile", o),
            Command::MassCurve(o) => ("mass-curve", o),
            Command::Minimize(o) => ("minimize", o),
            Command::ICurve(o) => ("i-curve", o),
            Command::Evolve(o) => ("evolve", o),
            Command::Stability(o) => ("stability", o),
            Command::Spectrum(o) => ("spectrum", o),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: &'a [String],
    status: &'a str,
    error: Option<String>,
}

fn write_manifest(cfg: &RunConfig, outputs: &[String], status: &str, error: Option<String>) -> std::io::Result<()> {
    let manifest = Manifest { tool: "solwave", version: env!("CARGO_PKG_VERSION"), config: cfg, outputs, status, error };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(cfg.out.join("manifest.json"), text + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = cli.command.split();
    let cfg = match RunConfig::resolve(name, &flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("solwave {name}: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("solwave {name}: cannot create {}: {e}", cfg.out.display());
        return ExitCode::from(1);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("solwave {name}: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| commands::run(&cfg));
    let (outputs, status, error, code) = match result {
        Ok(o) if o.success => (o.outputs, "ok", None, 0),
        Ok(o) => (o.outputs, "failed", None, 1),
        Err(e) => (Vec::new(), "error", Some(e.to_string()), 1),
    };
    if let Some(msg) = &error {
        eprintln!("solwave {name}: {msg}");
    }
    if let Err(e) = write_manifest(&cfg, &outputs, status, error) {
        eprintln!("solwave {name}: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
