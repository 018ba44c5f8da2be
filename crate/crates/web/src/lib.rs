//! Browser bindings: a profile plot, a mass curve and a live evolution.
//!
//! The exports compile natively too, so the logic is tested without a browser.

#[cfg(target_arch = "wasm32")]
use wasm_bindgen::prelude::wasm_bindgen;

use solwave::evolve::{perturbed_datum, Perturbation, PerturbationKind, Stepper};
use solwave::field::{energy, mass, orbit_distance_to};
use solwave::profile::{build_profile, default_half_width, MassSample};
use solwave::{CombinedPower, Complex64, ComplexField, Grid};

fn nonlinearity(a: f64, b: f64, p: f64, q: f64) -> Result<CombinedPower, String> {
    CombinedPower::new(a, b, p, q).map_err(|e| e.to_string())
}

/// Interleaved `[x₀, R₀, x₁, R₁, …]` for `G(s) = −a s^p + b s^q` at `omega`.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn profile_curve(a: f64, b: f64, p: f64, q: f64, omega: f64, n: usize) -> Result<Vec<f64>, String> {
    let nl = nonlinearity(a, b, p, q)?;
    let prof = build_profile(&nl, omega, default_half_width(omega), n).map_err(|e| e.to_string())?;
    Ok(prof.csv_rows().flat_map(|row| [row[0], row[1]]).collect())
}

/// Interleaved `[ω, λ, λ′]` triples on `samples` evenly spaced frequencies.
/// Frequencies without a soliton are skipped.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn mass_curve(a: f64, b: f64, p: f64, q: f64, omega_min: f64, omega_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    let nl = nonlinearity(a, b, p, q)?;
    if !(omega_max > omega_min && omega_min > 0.0) || samples < 2 {
        return Err(format!("empty frequency range [{omega_min}, {omega_max}]"));
    }
    let step = (omega_max - omega_min) / (samples - 1) as f64;
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        if let Ok(s) = MassSample::compute(&nl, omega_min + step * i as f64) {
            out.extend([s.omega, s.lambda, s.dlambda]);
        }
    }
    Ok(out)
}

/// A perturbed soliton advanced in place by the split-step flow.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub struct Simulation {
    nl: CombinedPower,
    profile: ComplexField,
    values: Vec<Complex64>,
    grid: Grid,
    dt: f64,
    time: f64,
}

#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
impl Simulation {
    /// `kind` is `amplitude`, `phase-ramp` or `noise`.
    #[cfg_attr(target_arch = "wasm32", wasm_bindgen(constructor))]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        p: f64,
        q: f64,
        omega: f64,
        kind: &str,
        eps: f64,
        length: f64,
        n: usize,
        dt: f64,
    ) -> Result<Simulation, String> {
        let nl = nonlinearity(a, b, p, q)?;
        let kind: PerturbationKind = kind.parse().map_err(|e: solwave::Error| e.to_string())?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(format!("dt must be positive, got {dt}"));
        }
        let prof = build_profile(&nl, omega, 0.5 * length, n).map_err(|e| e.to_string())?;
        let u0 = perturbed_datum(&prof, Perturbation { kind, eps }, 0);
        let grid = u0.grid().clone();
        Ok(Simulation { nl, profile: prof.to_field(), values: u0.into_values(), grid, dt, time: 0.0 })
    }

    /// Advances `steps` steps.
    pub fn step(&mut self, steps: usize) {
        let stepper = Stepper::new(&self.nl, &self.grid, self.dt);
        for _ in 0..steps {
            stepper.advance(&mut self.values);
        }
        self.time += steps as f64 * self.dt;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.points().collect()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    fn field(&self) -> ComplexField {
        ComplexField::new(self.grid.clone(), self.values.clone()).expect("grid length")
    }

    pub fn mass(&self) -> f64 {
        mass(&self.field())
    }

    pub fn energy(&self) -> f64 {
        energy(&self.field(), &self.nl)
    }

    /// `H¹` distance to the soliton orbit.
    pub fn distance(&self) -> f64 {
        orbit_distance_to(&self.field(), &self.profile).distance
    }
}
