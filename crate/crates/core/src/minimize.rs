//! Energy minimization at fixed mass.
//!
//! Gradient descent on the sphere `{‖u‖² = λ}` in the metric of
//! `(c − ∂²)`, where `c` tracks the current multiplier estimate. Each step
//! is rescaled back onto the sphere and accepted only if it does not raise
//! the energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{energy, energy_gradient, recenter_align, ComplexField, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::profile::{build_profile, mass_of_omega};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Threshold on `‖−u″ + F′(u) + ωu‖₂`.
    pub tol: f64,
    /// Seed with a Gaussian bump of this width.
    pub gaussian_seed: bool,
    pub gaussian_width: f64,
    /// Seed with the quadrature profile whose mass is `λ`, when one exists.
    pub profile_seed: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-8, gaussian_seed: true, gaussian_width: 2.0, profile_seed: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeResult {
    /// The minimizer, recentred and made real.
    pub u: ComplexField,
    pub lambda: f64,
    pub energy: f64,
    pub omega: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// `‖Im‖/‖u‖` left after removing the peak phase.
    pub phase_residual: f64,
}

impl MinimizeResult {
    /// `‖u(x) − u(−x)‖₂/‖u‖₂` of the recentred minimizer.
    pub fn symmetry_defect(&self) -> f64 {
        let v = self.u.values();
        let n = v.len();
        let diff: f64 = (1..n).map(|j| (v[j] - v[n - j]).norm_sqr()).sum();
        (diff * self.u.grid().spacing()).sqrt() / self.u.l2_norm()
    }
}

fn project(u: &ComplexField, lambda: f64) -> ComplexField {
    u.scale(Complex64::new((lambda / u.mass()).sqrt(), 0.0))
}

/// Gaussian `e^{−x²/w²}` scaled to mass `λ`.
pub fn gaussian_seed(grid: &Grid, lambda: f64, width: f64) -> ComplexField {
    let g = ComplexField::from_fn(grid.clone(), |x| Complex64::new((-(x / width).powi(2)).exp(), 0.0));
    project(&g, lambda)
}

/// Frequency whose soliton has mass `λ`, found by bisection in `ln ω` on the
/// quadrature mass. `None` when no admissible frequency brackets `λ`.
pub fn omega_for_mass<N: Nonlinearity + ?Sized>(nl: &N, lambda: f64) -> Option<f64> {
    let mass = |w: f64| mass_of_omega(nl, w).ok();
    let (mut lo, mut hi) = (1e-6f64, 1.0f64);
    // Walk `hi` up while the mass stays below the target; an inadmissible
    // frequency bounds the search from above.
    loop {
        match mass(hi) {
            Some(m) if m < lambda => {
                lo = hi;
                if hi > 1e6 {
                    return None;
                }
                hi *= 4.0;
            }
            Some(_) => break,
            None => {
                let mut probe = hi;
                while mass(probe).is_none() && probe > lo * (1.0 + 1e-9) {
                    probe = (probe * lo).sqrt();
                    if probe - lo < 1e-9 * lo {
                        return None;
                    }
                }
                match mass(probe) {
                    Some(m) if m >= lambda => {
                        hi = probe;
                        break;
                    }
                    Some(_) => {
                        lo = probe;
                    }
                    None => return None,
                }
                if hi / lo < 1.0 + 1e-9 {
                    return None;
                }
            }
        }
    }
    if mass(lo).is_none_or(|m| m > lambda) {
        return None;
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        match mass(mid) {
            Some(m) if m < lambda => lo = mid,
            Some(_) => hi = mid,
            None => hi = mid,
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Some((lo * hi).sqrt())
}

fn profile_seed<N: Nonlinearity + ?Sized>(nl: &N, lambda: f64, grid: &Grid) -> Option<ComplexField> {
    let omega = omega_for_mass(nl, lambda)?;
    let half = 0.5 * grid.length();
    let profile = build_profile(nl, omega, half, grid.n()).ok()?;
    Some(project(&profile.to_field(), lambda))
}

/// One descent run from `start`, without post-processing.
fn descend<N: Nonlinearity + ?Sized>(nl: &N, lambda: f64, start: &ComplexField, opts: &MinimizeOptions) -> Descent {
    let grid = start.grid().clone();
    let h = grid.spacing();
    let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
    let mut u = project(start, lambda);
    let mut e = energy(&u, nl);
    let mut tau = 0.1 * h * h;
    let mut residual = f64::INFINITY;
    let mut omega = 0.0;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let g = energy_gradient(&u, nl);
        omega = -g.l2_inner(&u).expect("same grid").re / lambda;
        let r = g.axpy(Complex64::new(omega, 0.0), &u).expect("same grid");
        residual = r.l2_norm();
        if residual < opts.tol {
            break;
        }
        iterations += 1;

        let c = omega.clamp(0.05, 50.0);
        let gh = g.spectrum();
        let uh = u.spectrum();
        let mut pg_u = 0.0;
        let mut pu_u = 0.0;
        for ((a, b), k2) in gh.iter().zip(&uh).zip(&k2) {
            let w = 1.0 / (c + k2);
            pg_u += w * (a * b.conj()).re;
            pu_u += w * b.norm_sqr();
        }
        let alpha = pg_u / pu_u;
        let dir: Vec<Complex64> = gh.iter().zip(&uh).zip(&k2).map(|((a, b), k2)| (a - alpha * b) / (c + k2)).collect();
        let d = ComplexField::from_spectrum(grid.clone(), dir);

        let slack = 1e-13 * e.abs().max(1.0);
        let mut accepted = false;
        while tau > 1e-30 {
            let trial = project(&u.axpy(Complex64::new(-tau, 0.0), &d).expect("same grid"), lambda);
            let et = energy(&trial, nl);
            if et <= e + slack {
                u = trial;
                e = et;
                tau *= 1.1;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Descent { u, energy: e, omega, residual, iterations }
}

struct Descent {
    u: ComplexField,
    energy: f64,
    omega: f64,
    residual: f64,
    iterations: usize,
}

fn finish(lambda: f64, run: Descent, tol: f64) -> MinimizeResult {
    let aligned = recenter_align(&run.u);
    let u = ComplexField::from_real(run.u.grid().clone(), &aligned.field);
    MinimizeResult {
        u,
        lambda,
        energy: run.energy,
        omega: run.omega,
        iterations: run.iterations,
        residual: run.residual,
        converged: run.residual < tol,
        phase_residual: aligned.residual,
    }
}

/// Minimizes `E` over `{‖u‖² = λ}` on `grid`, starting from each enabled
/// seed and keeping the lowest energy. Fails with [`Error::NoDescent`] when
/// no run reaches negative energy.
pub fn minimize_energy<N: Nonlinearity + ?Sized>(
    nl: &N,
    lambda: f64,
    grid: &Grid,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    minimize_with_seeds(nl, lambda, grid, opts, None)
}

/// As [`minimize_energy`], additionally trying `warm` (rescaled to mass `λ`)
/// first.
pub fn minimize_with_seeds<N: Nonlinearity + ?Sized>(
    nl: &N,
    lambda: f64,
    grid: &Grid,
    opts: &MinimizeOptions,
    warm: Option<&ComplexField>,
) -> Result<MinimizeResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {lambda}")));
    }
    let mut seeds = Vec::new();
    if let Some(w) = warm {
        if w.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if w.mass() > 0.0 {
            seeds.push(w.clone());
        }
    }
    if opts.profile_seed {
        seeds.extend(profile_seed(nl, lambda, grid));
    }
    if opts.gaussian_seed {
        seeds.push(gaussian_seed(grid, lambda, opts.gaussian_width));
    }
    if seeds.is_empty() {
        return Err(Error::domain("no initialization enabled"));
    }

    let mut best: Option<Descent> = None;
    for seed in &seeds {
        let run = descend(nl, lambda, seed, opts);
        let converged_negative = run.residual < opts.tol && run.energy < 0.0;
        if best.as_ref().is_none_or(|b| run.energy < b.energy) {
            best = Some(run);
        }
        if converged_negative && warm.is_some() {
            break;
        }
    }
    let best = best.expect("at least one seed");
    if !(best.energy < -1e-10) {
        return Err(Error::NoDescent { best_energy: best.energy });
    }
    Ok(finish(lambda, best, opts.tol))
}

/// One row of [`i_curve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICurveRow {
    pub lambda: f64,
    pub energy: f64,
    pub omega: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the minimizer failed; `energy` then holds the best value seen.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ICurve {
    pub rows: Vec<ICurveRow>,
    /// Largest sampled `λ` with `|I(λ)| < 10⁻⁶`, or 0.
    pub lambda_star: f64,
}

impl ICurve {
    pub const CSV_HEADER: [&'static str; 5] = ["lambda", "I", "omega", "residual", "iterations"];

    pub fn csv_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.rows.iter().map(|r| vec![r.lambda, r.energy, r.omega, r.residual, r.iterations as f64])
    }
}

/// `I(λ)` on ascending masses, each run warm-started from the previous
/// minimizer.
pub fn i_curve<N: Nonlinearity + ?Sized>(nl: &N, lambdas: &[f64], grid: &Grid, opts: &MinimizeOptions) -> Result<ICurve> {
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::domain("masses must be positive"));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut warm: Option<ComplexField> = None;
    for &lambda in lambdas {
        match minimize_with_seeds(nl, lambda, grid, opts, warm.as_ref()) {
            Ok(res) => {
                rows.push(ICurveRow {
                    lambda,
                    energy: res.energy,
                    omega: res.omega,
                    residual: res.residual,
                    iterations: res.iterations,
                    converged: res.converged,
                    error: None,
                });
                warm = Some(res.u);
            }
            Err(Error::NoDescent { best_energy }) => rows.push(ICurveRow {
                lambda,
                energy: best_energy,
                omega: f64::NAN,
                residual: f64::NAN,
                iterations: 0,
                converged: false,
                error: Some(Error::NoDescent { best_energy }.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let lambda_star = rows.iter().filter(|r| r.energy.abs() < 1e-6).map(|r| r.lambda).fold(0.0, f64::max);
    Ok(ICurve { rows, lambda_star })
}

/// Relative defect in `2(‖u′‖² − I(λ)) = ωλ`.
pub fn existence_identity_check(res: &MinimizeResult) -> f64 {
    let lhs = 2.0 * (res.u.dirichlet() - res.energy);
    let rhs = res.omega * res.lambda;
    (lhs - rhs).abs() / (res.omega.abs() * res.lambda)
}

/// `‖recenter(u) − R_ω‖_{H¹}/‖R_ω‖_{H¹}` against the quadrature profile at
/// the extracted multiplier.
pub fn cross_validate<N: Nonlinearity + ?Sized>(res: &MinimizeResult, nl: &N) -> Result<f64> {
    if !(res.omega > 0.0) {
        return Err(Error::domain(format!("cross-validation needs ω > 0, got {}", res.omega)));
    }
    let grid = res.u.grid();
    let profile = build_profile(nl, res.omega, 0.5 * grid.length(), grid.n())?;
    let r = profile.to_field();
    let aligned = recenter_align(&res.u);
    let u = ComplexField::from_real(grid.clone(), &aligned.field);
    Ok(u.sub(&r)?.h1_norm() / r.h1_norm())
}
