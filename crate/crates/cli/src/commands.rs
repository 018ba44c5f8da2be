//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns their names.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use solwave::evolve::{
    evolve_partial, perturbed_datum, reference_profile, run_perturbation, EvolveConfig, Perturbation,
    StabilityConfig, StabilityReport, StabilityVerdict,
};
use solwave::io::{write_csv_file, write_json_file};
use solwave::minimize::{cross_validate, existence_identity_check, i_curve, minimize_energy, ICurve, MinimizeOptions};
use solwave::nonlinearity::check_conditions;
use solwave::profile::{build_profile, MassSample};
use solwave::spectral::{assemble, eigenvector_field, nondegeneracy_certificate, Parity};
use solwave::{Error, Grid, MassCurve, ProfileSolution};

use crate::config::RunConfig;

/// Files written and whether the run met its success condition.
pub struct Outcome {
    pub outputs: Vec<String>,
    pub success: bool,
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<String>,
}

impl Writer<'_> {
    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        write_json_file(&self.dir.join(name), value)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), Error> {
        write_csv_file(&self.dir.join(name), header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn field(&mut self, name: &str, u: &solwave::ComplexField) -> Result<(), Error> {
        u.save(&self.dir.join(name))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn done(self, success: bool) -> Outcome {
        Outcome { outputs: self.outputs, success }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Error> {
    let mut w = Writer { dir: &cfg.out, outputs: Vec::new() };
    match cfg.command.as_str() {
        "check" => check(cfg, &mut w).map(|ok| w.done(ok)),
        "profile" => profile(cfg, &mut w).map(|_| w.done(true)),
        "mass-curve" => mass_curve(cfg, &mut w).map(|_| w.done(true)),
        "minimize" => minimize(cfg, &mut w).map(|_| w.done(true)),
        "i-curve" => curve(cfg, &mut w).map(|ok| w.done(ok)),
        "evolve" => evolve(cfg, &mut w).map(|ok| w.done(ok)),
        "stability" => stability(cfg, &mut w).map(|ok| w.done(ok)),
        "spectrum" => spectrum(cfg, &mut w).map(|_| w.done(true)),
        other => unreachable!("unknown command {other}"),
    }
}

fn check(cfg: &RunConfig, w: &mut Writer) -> Result<bool, Error> {
    let report = check_conditions(&cfg.combined_power(), (cfg.omega_min, cfg.omega_max), cfg.samples.max(2))?;
    w.json("conditions.json", &report)?;
    Ok(!report.any_fail())
}

fn profile(cfg: &RunConfig, w: &mut Writer) -> Result<(), Error> {
    let prof = build_profile(&cfg.combined_power(), cfg.omega, 0.5 * cfg.length, cfg.n)?;
    w.csv("profile.csv", &ProfileSolution::CSV_HEADER, prof.csv_rows())?;
    w.json("profile.json", &prof)
}

fn mass_curve(cfg: &RunConfig, w: &mut Writer) -> Result<(), Error> {
    let nl = cfg.combined_power();
    let samples = cfg.omegas().par_iter().map(|&omega| MassSample::compute(&nl, omega)).collect::<Result<Vec<_>, _>>()?;
    let curve = MassCurve { samples };
    w.csv("mass_curve.csv", &MassCurve::CSV_HEADER, curve.csv_rows())?;
    w.json("mass_curve.json", &curve)
}

fn minimize_options(cfg: &RunConfig) -> MinimizeOptions {
    MinimizeOptions { max_iter: cfg.max_iter, tol: cfg.tol, ..MinimizeOptions::default() }
}

#[derive(Serialize)]
struct MinimizerSummary {
    lambda: f64,
    #[serde(rename = "I")]
    energy: f64,
    omega: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    phase_residual: f64,
    symmetry_defect: f64,
    identity_defect: f64,
    /// `H¹` mismatch with the quadrature profile at the extracted `ω`.
    cross_validation: Option<f64>,
}

fn minimize(cfg: &RunConfig, w: &mut Writer) -> Result<(), Error> {
    let nl = cfg.combined_power();
    let grid = Grid::new(cfg.length, cfg.n)?;
    let res = minimize_energy(&nl, cfg.lambda, &grid, &minimize_options(cfg))?;
    let cross = if res.converged && res.omega > 0.0 { cross_validate(&res, &nl).ok() } else { None };
    let summary = MinimizerSummary {
        lambda: res.lambda,
        energy: res.energy,
        omega: res.omega,
        iterations: res.iterations,
        residual: res.residual,
        converged: res.converged,
        phase_residual: res.phase_residual,
        symmetry_defect: res.symmetry_defect(),
        identity_defect: existence_identity_check(&res),
        cross_validation: cross,
    };
    w.field("minimizer.csv", &res.u)?;
    w.field("minimizer.bin", &res.u)?;
    w.json("minimizer.json", &summary)
}

fn curve(cfg: &RunConfig, w: &mut Writer) -> Result<bool, Error> {
    let grid = Grid::new(cfg.length, cfg.n)?;
    let curve = i_curve(&cfg.combined_power(), &cfg.lambdas, &grid, &minimize_options(cfg))?;
    w.csv("i_curve.csv", &ICurve::CSV_HEADER, curve.csv_rows())?;
    w.json("i_curve.json", &curve)?;
    Ok(curve.rows.iter().all(|r| r.error.is_none()))
}

#[derive(Serialize)]
struct EvolveSummary {
    omega: f64,
    lambda: f64,
    perturbation: Perturbation,
    dt: f64,
    t_final: f64,
    steps: usize,
    max_mass_drift: f64,
    max_energy_drift: f64,
    max_distance: f64,
    error: Option<String>,
}

fn evolve(cfg: &RunConfig, w: &mut Writer) -> Result<bool, Error> {
    let nl = cfg.combined_power();
    let prof = build_profile(&nl, cfg.omega, 0.5 * cfg.length, cfg.n)?;
    let p = Perturbation { kind: cfg.kinds[0], eps: cfg.eps[0] };
    let u0 = perturbed_datum(&prof, p, cfg.seed);
    let ecfg = EvolveConfig::new(cfg.dt, cfg.t_final, cfg.record_every)?;
    let (trace, failure) = evolve_partial(&u0, &nl, &ecfg, Some(&prof))?;
    w.outputs.push("trace.csv".into());
    trace.save_csv(&w.dir.join("trace.csv"))?;
    if let Some(u) = &trace.final_field {
        w.field("final.bin", u)?;
    }
    let summary = EvolveSummary {
        omega: prof.omega,
        lambda: prof.mass(),
        perturbation: p,
        dt: ecfg.dt,
        t_final: ecfg.t_final,
        steps: ecfg.steps(),
        max_mass_drift: trace.max_mass_drift(),
        max_energy_drift: trace.max_energy_drift(),
        max_distance: trace.max_distance(),
        error: failure.as_ref().map(|e| e.to_string()),
    };
    w.json("evolve.json", &summary)?;
    Ok(failure.is_none())
}

fn stability(cfg: &RunConfig, w: &mut Writer) -> Result<bool, Error> {
    let nl = cfg.combined_power();
    let grid = Grid::new(cfg.length, cfg.n)?;
    let prof = reference_profile(&nl, cfg.lambda, &grid)?;
    let scfg = StabilityConfig {
        t_final: cfg.t_final,
        dt: cfg.dt,
        record_every: cfg.record_every,
        k: cfg.k_ratio,
        seed: cfg.seed,
        ..StabilityConfig::default()
    };
    let perturbations: Vec<Perturbation> =
        cfg.kinds.iter().flat_map(|&kind| cfg.eps.iter().map(move |&eps| Perturbation { kind, eps })).collect();
    let entries =
        perturbations.par_iter().map(|&p| run_perturbation(&nl, &prof, p, &scfg)).collect::<Result<Vec<_>, _>>()?;
    let ok = entries.iter().all(|e| e.verdict != StabilityVerdict::Exceeded);
    let report =
        StabilityReport { lambda: cfg.lambda, omega: prof.omega, t_final: scfg.t_final, dt: scfg.dt, k: scfg.k, entries };
    w.json("stability.json", &report)?;
    Ok(ok)
}

fn spectrum(cfg: &RunConfig, w: &mut Writer) -> Result<(), Error> {
    let nl = cfg.combined_power();
    let prof = build_profile(&nl, cfg.omega, 0.5 * cfg.length, cfg.n)?;
    let op = assemble(&prof, &nl)?;
    let report = nondegeneracy_certificate(&op, &prof, &nl, cfg.eigenvalues)?;
    w.json("spectrum.json", &report)?;
    for (parity, name) in [(Parity::Even, "eigen_even_0.csv"), (Parity::Odd, "eigen_odd_0.csv")] {
        let pairs = op.spectrum(1, parity)?;
        w.field(name, &eigenvector_field(&op, &pairs.vectors[0]))?;
    }
    Ok(())
}
