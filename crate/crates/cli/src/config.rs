//! Run configuration: defaults, JSON config file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use solwave::evolve::PerturbationKind;
use solwave::{CombinedPower, NonlinearitySpec};

/// A configuration problem, reported as a usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Fields accepted in a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub nonlinearity: Option<NonlinearitySpec>,
    pub nonlinearity_file: Option<PathBuf>,
    pub omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub samples: Option<usize>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub length: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub record_every: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub kinds: Option<Vec<PerturbationKind>>,
    pub k_ratio: Option<f64>,
    pub eigenvalues: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// Flags shared by every command; they override the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inline nonlinearity, e.g. '{"family":"combined_power","a":1,"b":1,"p":3,"q":5}'.
    #[arg(long)]
    pub nl: Option<String>,
    /// Nonlinearity JSON file.
    #[arg(long)]
    pub nl_file: Option<PathBuf>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated masses.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Period of the grid.
    #[arg(long)]
    pub length: Option<f64>,
    /// Grid points (a power of two).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Comma-separated perturbation sizes.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Comma-separated perturbation kinds: amplitude, phase-ramp, noise.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<PerturbationKind>>,
    /// Bound on sup distance over initial distance.
    #[arg(long)]
    pub k_ratio: Option<f64>,
    /// Eigenvalues per parity.
    #[arg(long)]
    pub eigenvalues: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// The fully resolved configuration echoed into `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub nonlinearity: NonlinearitySpec,
    pub omega: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub samples: usize,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub length: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub eps: Vec<f64>,
    pub kinds: Vec<PerturbationKind>,
    pub k_ratio: f64,
    pub eigenvalues: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub jobs: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

fn read_spec(path: &Path) -> Result<NonlinearitySpec, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    NonlinearitySpec::from_json(&text).map_err(|e| usage(format!("malformed nonlinearity in {}: {e}", path.display())))
}

fn default_n(command: &str) -> usize {
    match command {
        "minimize" | "i-curve" => 2048,
        "evolve" | "stability" => 512,
        _ => 4096,
    }
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Overrides) -> Result<Self, UsageError> {
        let file = match &flags.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| usage(format!("malformed config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let nonlinearity = if let Some(text) = &flags.nl {
            NonlinearitySpec::from_json(text).map_err(|e| usage(format!("malformed --nl: {e}")))?
        } else if let Some(path) = &flags.nl_file {
            read_spec(path)?
        } else if let Some(spec) = file.nonlinearity.clone() {
            spec
        } else if let Some(path) = &file.nonlinearity_file {
            read_spec(path)?
        } else {
            CombinedPower::cubic().into()
        };

        macro_rules! pick {
            ($field:ident, $default:expr) => {
                flags.$field.clone().or(file.$field.clone()).unwrap_or($default)
            };
        }
        let omega = pick!(omega, 1.0);
        let length = flags.length.or(file.length).unwrap_or_else(|| match command {
            "profile" | "spectrum" => 2.0 * solwave::profile::default_half_width(omega),
            _ => 40.0,
        });
        let cfg = RunConfig {
            command: command.to_string(),
            nonlinearity,
            omega,
            omega_min: pick!(omega_min, 0.25),
            omega_max: pick!(omega_max, 4.0),
            samples: pick!(samples, 16),
            lambda: pick!(lambda, 4.0),
            lambdas: pick!(lambdas, vec![1.0, 2.0, 4.0, 8.0]),
            length,
            n: pick!(n, default_n(command)),
            dt: pick!(dt, 1e-3),
            t_final: pick!(t_final, if command == "stability" { 50.0 } else { 10.0 }),
            record_every: pick!(record_every, 100),
            eps: pick!(eps, vec![0.0, 0.01]),
            kinds: pick!(kinds, vec![PerturbationKind::Amplitude]),
            k_ratio: pick!(k_ratio, 10.0),
            eigenvalues: pick!(eigenvalues, 3),
            max_iter: pick!(max_iter, 20_000),
            tol: pick!(tol, 1e-8),
            seed: pick!(seed, 0),
            jobs: flags.jobs.unwrap_or(1),
            out: flags.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        self.nonlinearity.combined_power().map_err(|e| usage(format!("invalid nonlinearity: {e}")))?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("omega", self.omega)?;
        positive("omega_min", self.omega_min)?;
        positive("lambda", self.lambda)?;
        positive("length", self.length)?;
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        positive("k_ratio", self.k_ratio)?;
        positive("tol", self.tol)?;
        if !(self.omega_max > self.omega_min) || self.samples == 0 {
            return Err(usage(format!(
                "empty frequency range [{}, {}] with {} samples",
                self.omega_min, self.omega_max, self.samples
            )));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(usage("lambdas must be a non-empty list of positive masses"));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(usage(format!("n must be a power of two ≥ 16, got {}", self.n)));
        }
        if self.t_final < self.dt || self.record_every == 0 {
            return Err(usage("need t_final ≥ dt and record_every ≥ 1"));
        }
        if self.eps.iter().any(|e| !e.is_finite()) || self.kinds.is_empty() {
            return Err(usage("eps must be finite and kinds non-empty"));
        }
        if self.jobs == 0 || self.eigenvalues == 0 || self.max_iter == 0 {
            return Err(usage("jobs, eigenvalues and max_iter must be at least 1"));
        }
        Ok(())
    }

    pub fn combined_power(&self) -> CombinedPower {
        self.nonlinearity.combined_power().expect("validated")
    }

    /// `samples` frequencies, evenly spaced over `[omega_min, omega_max]`.
    pub fn omegas(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.omega_min];
        }
        let step = (self.omega_max - self.omega_min) / (self.samples - 1) as f64;
        (0..self.samples).map(|i| self.omega_min + step * i as f64).collect()
    }
}
