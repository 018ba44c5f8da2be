//! Split-step integration of `iφ_t + φ_xx − G′(|φ|)φ/|φ| = 0`.
//!
//! Strang splitting: half a step of the pointwise phase rotation
//! `u ↦ e^{−i(G′(|u|)/|u|)dt/2}u`, a full exact linear step
//! `û_k ↦ e^{−ik²dt}û_k`, then the second half rotation. Both sub-flows
//! preserve the discrete mass exactly.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{energy, orbit_distance_to, profile_on_grid, random_h1_field, ComplexField, Grid};
use crate::minimize::omega_for_mass;
use crate::nonlinearity::Nonlinearity;
use crate::profile::{build_profile, ProfileSolution};
use crate::Complex64;

pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between trace samples.
    pub record_every: usize,
    /// Steps between stored field snapshots; `None` stores none.
    pub snapshot_every: Option<usize>,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64, record_every: usize) -> Result<Self> {
        let cfg = Self { dt, t_final, record_every, snapshot_every: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_final >= self.dt && self.t_final.is_finite()) || self.record_every == 0 {
            return Err(Error::domain(format!(
                "need dt > 0, T ≥ dt and record_every ≥ 1 (dt = {}, T = {}, record_every = {})",
                self.dt, self.t_final, self.record_every
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// `min(10⁻³, π/(4k_max²))`: the largest linear phase per step stays below
/// `π/4`.
pub fn default_dt(grid: &Grid) -> f64 {
    let k_max = std::f64::consts::PI / grid.spacing();
    f64::min(1e-3, std::f64::consts::FRAC_PI_4 / (k_max * k_max))
}

/// Precomputed linear propagator for a fixed grid and step.
pub struct Stepper<'a, N: ?Sized> {
    nl: &'a N,
    grid: Grid,
    dt: f64,
    linear: Vec<Complex64>,
}

impl<'a, N: Nonlinearity + ?Sized> Stepper<'a, N> {
    pub fn new(nl: &'a N, grid: &Grid, dt: f64) -> Self {
        let linear = grid.wavenumbers().iter().map(|k| Complex64::from_polar(1.0, -k * k * dt)).collect();
        Self { nl, grid: grid.clone(), dt, linear }
    }

    fn rotate(&self, values: &mut [Complex64], dt: f64) {
        for v in values.iter_mut() {
            let phase = self.nl.dg_over_s(v.norm());
            if phase != 0.0 {
                *v *= Complex64::from_polar(1.0, -phase * dt);
            }
        }
    }

    pub fn advance(&self, values: &mut [Complex64]) {
        self.rotate(values, 0.5 * self.dt);
        self.grid.fft(values);
        for (v, p) in values.iter_mut().zip(&self.linear) {
            *v *= p;
        }
        self.grid.ifft(values);
        self.rotate(values, 0.5 * self.dt);
    }
}

/// One Strang step of size `dt`.
pub fn step<N: Nonlinearity + ?Sized>(u: &ComplexField, dt: f64, nl: &N) -> ComplexField {
    let stepper = Stepper::new(nl, u.grid(), dt);
    let mut values = u.values().to_vec();
    stepper.advance(&mut values);
    ComplexField::from_parts_unchecked(u.grid().clone(), values)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub mass: Vec<f64>,
    /// Orbit distance to the reference profile; empty without one.
    pub distance: Vec<f64>,
    pub snapshots: Vec<(f64, ComplexField)>,
    pub final_field: Option<ComplexField>,
}

impl EvolutionTrace {
    pub fn max_mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    pub fn max_energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    pub fn max_distance(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,E,M,dist")?;
        for i in 0..self.times.len() {
            let d = self.distance.get(i).copied().unwrap_or(f64::NAN);
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", self.times[i], self.energy[i], self.mass[i], d)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// `max |q(t) − q(0)| / |q(0)|`, absolute when `q(0) = 0`.
fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else { return 0.0 };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max) / scale
}

/// Evolves `u0` and records `E`, `M` and, with a reference profile, the
/// orbit distance. Fails with [`Error::BlowupDetected`] when `‖u‖_∞`
/// exceeds [`BLOWUP_THRESHOLD`]; [`evolve_partial`] keeps the trace.
pub fn evolve<N: Nonlinearity + ?Sized>(
    u0: &ComplexField,
    nl: &N,
    cfg: &EvolveConfig,
    reference: Option<&ProfileSolution>,
) -> Result<EvolutionTrace> {
    let (trace, failure) = evolve_partial(u0, nl, cfg, reference)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}

pub fn evolve_partial<N: Nonlinearity + ?Sized>(
    u0: &ComplexField,
    nl: &N,
    cfg: &EvolveConfig,
    reference: Option<&ProfileSolution>,
) -> Result<(EvolutionTrace, Option<Error>)> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    let reference = reference.map(|p| profile_on_grid(p, &grid));
    let stepper = Stepper::new(nl, &grid, cfg.dt);
    let mut values = u0.values().to_vec();
    let mut trace = EvolutionTrace::default();
    let record = |trace: &mut EvolutionTrace, values: &[Complex64], t: f64| {
        let u = ComplexField::from_parts_unchecked(grid.clone(), values.to_vec());
        trace.times.push(t);
        trace.energy.push(energy(&u, nl));
        trace.mass.push(u.mass());
        if let Some(r) = &reference {
            trace.distance.push(orbit_distance_to(&u, r).distance);
        }
    };
    record(&mut trace, &values, 0.0);
    if cfg.snapshot_every.is_some() {
        trace.snapshots.push((0.0, u0.clone()));
    }

    let steps = cfg.steps();
    let mut failure = None;
    for i in 1..=steps {
        stepper.advance(&mut values);
        let t = i as f64 * cfg.dt;
        let sup = values.iter().map(|v| v.norm()).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        if !(sup <= BLOWUP_THRESHOLD) {
            failure = Some(Error::BlowupDetected { time: t, sup_norm: sup });
            break;
        }
        if i % cfg.record_every == 0 || i == steps {
            record(&mut trace, &values, t);
        }
        if let Some(every) = cfg.snapshot_every {
            if every > 0 && i % every == 0 {
                trace.snapshots.push((t, ComplexField::from_parts_unchecked(grid.clone(), values.clone())));
            }
        }
    }
    if failure.is_none() {
        trace.final_field = Some(ComplexField::from_parts_unchecked(grid, values));
    }
    Ok((trace, failure))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// `(1 + ε)R`.
    Amplitude,
    /// `e^{iεx}R`, a Galilean boost.
    PhaseRamp,
    /// `R + η` with `η` even, smooth and `‖η‖_{H¹} = ε`.
    Noise,
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(Self::Amplitude),
            "phase-ramp" | "ramp" => Ok(Self::PhaseRamp),
            "noise" => Ok(Self::Noise),
            other => Err(Error::domain(format!("unknown perturbation kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityVerdict {
    Bounded,
    Exceeded,
    /// A boost leaves the orbit by construction; the ratio is not judged.
    ExpectedGrowth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub kind: PerturbationKind,
    pub eps: f64,
    pub initial_distance: f64,
    pub sup_dist: f64,
    /// `sup_dist / initial_distance`, absent when the start is on the orbit.
    pub ratio: Option<f64>,
    pub verdict: StabilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda: f64,
    pub omega: f64,
    pub t_final: f64,
    pub dt: f64,
    pub k: f64,
    pub entries: Vec<StabilityEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
    /// Bound on `sup_dist / initial_distance`.
    pub k: f64,
    /// Bound on `sup_dist` for unperturbed runs.
    pub unperturbed_tol: f64,
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self { t_final: 50.0, dt: 1e-3, record_every: 100, k: 10.0, unperturbed_tol: 1e-3, seed: 0 }
    }
}

/// The soliton of mass `λ` sampled on `grid`.
pub fn reference_profile<N: Nonlinearity + ?Sized>(nl: &N, lambda: f64, grid: &Grid) -> Result<ProfileSolution> {
    let omega = omega_for_mass(nl, lambda)
        .ok_or_else(|| Error::domain(format!("no soliton of mass {lambda} for this nonlinearity")))?;
    build_profile(nl, omega, 0.5 * grid.length(), grid.n())
}

/// The perturbed initial datum for one experiment.
pub fn perturbed_datum(profile: &ProfileSolution, p: Perturbation, seed: u64) -> ComplexField {
    let r = profile.to_field();
    match p.kind {
        PerturbationKind::Amplitude => r.scale(Complex64::new(1.0 + p.eps, 0.0)),
        PerturbationKind::PhaseRamp => {
            let grid = r.grid().clone();
            let values = r.values().iter().zip(grid.points()).map(|(v, x)| v * Complex64::from_polar(1.0, p.eps * x)).collect();
            ComplexField::from_parts_unchecked(grid, values)
        }
        PerturbationKind::Noise => {
            if p.eps == 0.0 {
                return r;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let eta = random_h1_field(r.grid(), &mut rng);
            let n = eta.values().len();
            let even: Vec<Complex64> = (0..n).map(|j| 0.5 * (eta.values()[j] + eta.values()[(n - j) % n])).collect();
            let even = ComplexField::from_parts_unchecked(r.grid().clone(), even);
            let scaled = even.scale(Complex64::new(p.eps / even.h1_norm(), 0.0));
            r.add(&scaled).expect("same grid")
        }
    }
}

/// Evolves one perturbed soliton and classifies the orbit distance.
pub fn run_perturbation<N: Nonlinearity + ?Sized>(
    nl: &N,
    profile: &ProfileSolution,
    p: Perturbation,
    cfg: &StabilityConfig,
) -> Result<StabilityEntry> {
    let u0 = perturbed_datum(profile, p, cfg.seed);
    let evolve_cfg = EvolveConfig::new(cfg.dt, cfg.t_final, cfg.record_every)?;
    let trace = evolve(&u0, nl, &evolve_cfg, Some(profile))?;
    let initial = trace.distance[0];
    let sup = trace.max_distance();
    let ratio = (initial > 1e-12).then(|| sup / initial);
    let verdict = if p.kind == PerturbationKind::PhaseRamp && p.eps != 0.0 {
        StabilityVerdict::ExpectedGrowth
    } else {
        let ok = match ratio {
            Some(r) => r <= cfg.k,
            None => sup < cfg.unperturbed_tol,
        };
        if ok && sup.is_finite() {
            StabilityVerdict::Bounded
        } else {
            StabilityVerdict::Exceeded
        }
    };
    Ok(StabilityEntry { kind: p.kind, eps: p.eps, initial_distance: initial, sup_dist: sup, ratio, verdict })
}

/// Runs every perturbation of the soliton of mass `λ` in turn.
pub fn stability_experiment<N: Nonlinearity + ?Sized>(
    nl: &N,
    lambda: f64,
    perturbations: &[Perturbation],
    grid: &Grid,
    cfg: &StabilityConfig,
) -> Result<StabilityReport> {
    let profile = reference_profile(nl, lambda, grid)?;
    let entries = perturbations.iter().map(|&p| run_perturbation(nl, &profile, p, cfg)).collect::<Result<_>>()?;
    Ok(StabilityReport { lambda, omega: profile.omega, t_final: cfg.t_final, dt: cfg.dt, k: cfg.k, entries })
}
