//! Soliton amplitude, profile and mass curve.
//!
//! For `ω` in the admissible set the even positive solution of
//! `−R″ + G′(R) + ωR = 0` is determined by its amplitude `R*(ω)`, the first
//! zero of `Q(ω, ·)`. The first integral `R′² = Q(ω, R)` turns the mass
//! `λ(ω) = ‖R_ω‖²` into a one-dimensional integral over the amplitude, which
//! is what [`mass_of_omega`] and [`mass_derivative`] evaluate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::nonlinearity::{eval_dq, eval_h, eval_q, Nonlinearity};
use crate::quadrature;
use crate::Complex64;

const SCAN_MIN: f64 = 1e-6;
const SCAN_POINTS_PER_DECADE: usize = 64;
const DEGENERATE_SLOPE: f64 = 1e-8;

/// Upper end of the amplitude scan. For `−a s^p + b s^q` the first root lies
/// below the crossover `(a/b)^{1/(q−p)}`.
fn scan_limit<N: Nonlinearity + ?Sized>(nl: &N) -> f64 {
    let h = nl.hypotheses();
    let crossover = if h.s_star > 0.0 { 10.0 * h.s_star } else { 0.0 };
    f64::max(1e3, crossover)
}

/// `ω − V(s) = Q(ω, s)/s²`, whose sign is that of `Q` and which does not
/// underflow near the origin.
fn reduced_q<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, s: f64) -> f64 {
    omega + 2.0 * nl.g(s) / (s * s)
}

/// The soliton amplitude `R*(ω)`: the smallest `s > 0` with `Q(ω, s) = 0`,
/// required to be a transversal crossing (`∂ₛQ < 0`).
pub fn r_star<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    let mut lo = SCAN_MIN;
    while reduced_q(nl, omega, lo) <= 0.0 {
        lo *= 1e-3;
        if lo < 1e-30 {
            return Err(Error::NoRoot { omega });
        }
    }
    let hi_limit = scan_limit(nl);
    let ratio = 10f64.powf(1.0 / SCAN_POINTS_PER_DECADE as f64);
    let mut hi = lo;
    let mut bracket = None;
    while hi < hi_limit {
        let next = (hi * ratio).min(hi_limit);
        if reduced_q(nl, omega, next) <= 0.0 {
            bracket = Some((hi, next));
            break;
        }
        hi = next;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRoot { omega })?;

    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if reduced_q(nl, omega, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Bisection leaves ~1e-12 relative error; a guarded Newton polish brings
    // the root to machine precision, which the endpoint-singular integrals
    // below are sensitive to.
    let mut root = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = eval_dq(nl, omega, root);
        if slope == 0.0 {
            break;
        }
        let next = root - eval_q(nl, omega, root) / slope;
        if next > lo * (1.0 - 1e-12) && next < hi * (1.0 + 1e-12) {
            root = next;
        }
    }

    let slope = eval_dq(nl, omega, root);
    let scale = 2.0 * omega * root + 2.0 * nl.dg(root).abs();
    if !(slope < -DEGENERATE_SLOPE * scale) {
        return Err(Error::Degenerate { omega, amplitude: root, slope });
    }
    Ok(root)
}

/// `R*′(ω) = −R*²/(2G′(R*) + 2ωR*)`, from differentiating `Q(ω, R*(ω)) = 0`.
pub fn r_star_derivative<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    let denom = eval_dq(nl, omega, s);
    let scale = 2.0 * omega * s + 2.0 * nl.dg(s).abs();
    if denom.abs() < DEGENERATE_SLOPE * scale {
        return Err(Error::Degenerate { omega, amplitude: s, slope: denom });
    }
    Ok(-s * s / denom)
}

/// `Ψ(θ, s, ω) = ωθ²s⁻⁴ + 2s⁻⁶G(sθ) = s⁻⁶ Q(ω, sθ)`.
pub fn psi<N: Nonlinearity + ?Sized>(nl: &N, theta: f64, s: f64, omega: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("Ψ requires s > 0, got {s}")));
    }
    let s2 = s * s;
    Ok(omega * theta * theta / (s2 * s2) + 2.0 * nl.g(s * theta) / (s2 * s2 * s2))
}

/// `I(ω, θ) = 2H(R*θ) − 2θ²H(R*)`, which is `∂_ωΨ` rescaled by the positive
/// factor `R*⁷/R*′`.
pub fn capital_i<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, theta: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    Ok(capital_i_at(nl, s, theta))
}

fn capital_i_at<N: Nonlinearity + ?Sized>(nl: &N, s: f64, theta: f64) -> f64 {
    2.0 * eval_h(nl, s * theta) - 2.0 * theta * theta * eval_h(nl, s)
}

/// `∂_ωΨ(θ, R*(ω), ω)` expanded term by term (the uncancelled form).
pub fn psi_omega_derivative<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, theta: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    let ds = r_star_derivative(nl, omega)?;
    let t2 = theta * theta;
    let bracket = -4.0 * omega * t2 * s.powi(-5) - 12.0 * s.powi(-7) * nl.g(s * theta)
        + 2.0 * s.powi(-6) * theta * nl.dg(s * theta);
    Ok(s.powi(-4) * t2 + bracket * ds)
}

/// `∂_ωΨ` through `I(ω, θ) R*′/R*⁷`.
pub fn psi_omega_derivative_cancelled<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, theta: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    let ds = r_star_derivative(nl, omega)?;
    Ok(capital_i_at(nl, s, theta) * ds / s.powi(7))
}

/// `Ψ` at `θ = 1 − τ²`. Near `θ = 1` the value is assembled from
/// `Q(ω, sθ) − Q(ω, s) = −ωs²τ²(2 − τ²) − 2∫_{sθ}^{s} G′`, which keeps full
/// relative precision where the direct formula cancels.
fn psi_at_tau<N: Nonlinearity + ?Sized>(nl: &N, s: f64, omega: f64, tau: f64) -> Result<f64> {
    let u = tau * tau;
    let value = if u < 0.25 {
        let half = 0.5 * s * u;
        let drop = quadrature::gauss_legendre8(|t| nl.dg(t), s - half, half);
        (-omega * s * s * u * (2.0 - u) - 2.0 * drop) / s.powi(6)
    } else {
        psi(nl, 1.0 - u, s, omega)?
    };
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::QuadratureFailure(format!(
            "Ψ({}) = {value:e} ≤ 0 inside (0, 1): R* is not the first zero of Q",
            1.0 - u
        )))
    }
}

/// `I(ω, θ)` at `θ = 1 − τ²`, in the same difference form:
/// `I = −2∫_{sθ}^{s} H′ + 2τ²(2 − τ²)H(s)` with `H′(t) = −5G′(t) + tG″(t)`.
fn i_at_tau<N: Nonlinearity + ?Sized>(nl: &N, s: f64, tau: f64) -> f64 {
    let u = tau * tau;
    if u < 0.25 && nl.d2g(s).is_some() {
        let half = 0.5 * s * u;
        let dh = |t: f64| -5.0 * nl.dg(t) + t * nl.d2g(t).unwrap_or(0.0);
        -2.0 * quadrature::gauss_legendre8(dh, s - half, half) + 2.0 * u * (2.0 - u) * eval_h(nl, s)
    } else {
        capital_i_at(nl, s, 1.0 - u)
    }
}

/// Runs an amplitude-space integral over `τ ∈ (0, 1)` with `θ = 1 − τ²`,
/// propagating the first integrand error instead of a generic NaN failure.
fn integrate_tau<F>(mut integrand: F, scale: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let result = quadrature::integrate(
        |tau| match integrand(tau) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        1e-13 * scale,
        1e-13,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(result?.value)
}

/// `λ(ω) = 2∫₀¹ θ² Ψ(θ)^{−1/2} dθ`. The square-root singularity at `θ = 1`
/// is removed by `θ = 1 − τ²`.
pub fn mass_of_omega<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    // Ψ scale: ω s⁻⁴; λ scale: 2/√(ω s⁻⁴) = 2 s²/√ω.
    let scale = 2.0 * s * s / omega.sqrt();
    integrate_tau(
        |tau| {
            let theta = 1.0 - tau * tau;
            let psi = psi_at_tau(nl, s, omega, tau)?;
            Ok(4.0 * tau * theta * theta / psi.sqrt())
        },
        scale,
    )
}

/// `λ′(ω)` from the quadrature of `−∫₀¹ θ² ∂_ωΨ Ψ^{−3/2} dθ`, evaluated in
/// the cancelled form `∂_ωΨ = I(ω, θ) R*′/R*⁷`, without the finite-difference
/// cross-check.
pub fn mass_derivative_integral<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<f64> {
    let s = r_star(nl, omega)?;
    let ds = r_star_derivative(nl, omega)?;
    let factor = ds / s.powi(7);
    let scale = s * s / omega.sqrt() / omega;
    integrate_tau(
        |tau| {
            let theta = 1.0 - tau * tau;
            let psi = psi_at_tau(nl, s, omega, tau)?;
            let d_psi = i_at_tau(nl, s, tau) * factor;
            Ok(-2.0 * tau * theta * theta * d_psi / (psi * psi.sqrt()))
        },
        scale,
    )
}

/// `λ′(ω)` with a central-difference cross-check against [`mass_of_omega`]
/// whenever both neighbouring frequencies are admissible.
pub fn mass_derivative<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<f64> {
    let integral = mass_derivative_integral(nl, omega)?;
    if let Some(fd) = mass_derivative_fd(nl, omega) {
        let tol = 1e-4 * fd.abs().max(integral.abs()) + 1e-8;
        if (fd - integral).abs() > tol {
            return Err(Error::ConsistencyFailure { integral, finite_difference: fd });
        }
    }
    Ok(integral)
}

/// Central difference of [`mass_of_omega`], `None` when a neighbour is not
/// admissible.
pub fn mass_derivative_fd<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Option<f64> {
    let eps = 1e-3 * omega;
    let up = mass_of_omega(nl, omega + eps).ok()?;
    let down = mass_of_omega(nl, omega - eps).ok()?;
    Some((up - down) / (2.0 * eps))
}

/// Default half-width `max(20, 12/√ω)` of the profile domain.
pub fn default_half_width(omega: f64) -> f64 {
    f64::max(20.0, 12.0 / omega.sqrt())
}

pub const DEFAULT_PROFILE_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions {
    /// Largest accepted `R(X)/R*`.
    pub tail_tol: f64,
    /// Below `clamp·R*` the profile is continued by its exponential tail.
    pub clamp: f64,
    /// Largest internal step in units of the local length `1/√κ`.
    pub max_step: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { tail_tol: 1e-4, clamp: 1e-8, max_step: 0.01 }
    }
}

/// A sampled soliton profile on the periodic grid `x_j = −X + jh`,
/// `h = 2X/n`. The grid contains `x = 0` at `j = n/2`, and `R(x_j) =
/// R(x_{n−j})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub omega: f64,
    pub r_star: f64,
    pub half_width: f64,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub dr: Vec<f64>,
    /// `max_j |R′(x_j)² − Q(ω, R(x_j))| / max_j Q(ω, R(x_j))`.
    pub first_integral_residual: f64,
}

/// Integrates `R″ = G′(R) + ωR`, `R(0) = R*`, `R′(0) = 0` on `[0, X]` and
/// mirrors the result.
///
/// Up to the inflection point the second-order system is advanced with RK4
/// from a fourth-order Taylor start. Past it the trajectory is continued on
/// the first-integral manifold `R′ = −R√(ω − V(R))`, which is contractive;
/// the raw shooting problem is exponentially unstable in the tail. Below
/// `clamp·R*` the exponential tail `R ∝ e^{−√ω x}` is used.
pub fn build_profile<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, half_width: f64, n: usize) -> Result<ProfileSolution> {
    build_profile_with(nl, omega, half_width, n, ProfileOptions::default())
}

pub fn build_profile_with<N: Nonlinearity + ?Sized>(
    nl: &N,
    omega: f64,
    half_width: f64,
    n: usize,
    opts: ProfileOptions,
) -> Result<ProfileSolution> {
    if !(half_width > 0.0) || n < 16 || n % 2 != 0 {
        return Err(Error::domain(format!("profile grid needs X > 0 and even n ≥ 16 (X = {half_width}, n = {n})")));
    }
    let rs = r_star(nl, omega)?;
    let h = 2.0 * half_width / n as f64;
    let half = n / 2;

    let force = |r: f64| nl.dg(r) + omega * r;
    let d2 = |r: f64| nl.d2g(r).unwrap_or_else(|| (nl.dg(r * (1.0 + 1e-6)) - nl.dg(r * (1.0 - 1e-6))) / (2e-6 * r));
    let kappa = f64::max(omega, (d2(rs) + omega).abs());
    let substeps = (h * kappa.sqrt() / opts.max_step).ceil().max(1.0) as usize;
    let dt = h / substeps as f64;
    let decay = omega.sqrt();

    let mut right_r = Vec::with_capacity(half + 1);
    let mut right_dr = Vec::with_capacity(half + 1);
    right_r.push(rs);
    right_dr.push(0.0);

    enum Phase {
        Concave,
        Manifold,
        Tail { x0: f64, r0: f64 },
    }
    let mut phase = Phase::Concave;
    let (mut r, mut p) = (rs, 0.0);
    let mut x = 0.0;
    let slope_at = |r: f64| -> f64 {
        let reduced = omega + 2.0 * nl.g(r) / (r * r);
        if reduced > 0.0 {
            -r * reduced.sqrt()
        } else {
            0.0
        }
    };

    for k in 1..=half {
        for sub in 0..substeps {
            match phase {
                Phase::Concave => {
                    if k == 1 && sub == 0 {
                        let c = force(rs);
                        let c1 = d2(rs) + omega;
                        r = rs + 0.5 * c * dt * dt + c1 * c * dt.powi(4) / 24.0;
                        p = c * dt + c1 * c * dt.powi(3) / 6.0;
                    } else {
                        let (k1r, k1p) = (p, force(r));
                        let (k2r, k2p) = (p + 0.5 * dt * k1p, force(r + 0.5 * dt * k1r));
                        let (k3r, k3p) = (p + 0.5 * dt * k2p, force(r + 0.5 * dt * k2r));
                        let (k4r, k4p) = (p + dt * k3p, force(r + dt * k3r));
                        let nr = r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
                        let np = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                        if np > 0.0 || nr >= r {
                            return Err(Error::TailBlowup { x: x + dt, reason: "slope changed sign before the tail" });
                        }
                        r = nr;
                        p = np;
                    }
                    if force(r) >= 0.0 {
                        phase = Phase::Manifold;
                    }
                }
                Phase::Manifold => {
                    let k1 = slope_at(r);
                    let k2 = slope_at(r + 0.5 * dt * k1);
                    let k3 = slope_at(r + 0.5 * dt * k2);
                    let k4 = slope_at(r + dt * k3);
                    let nr = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    if !(nr < r) || nr <= 0.0 {
                        return Err(Error::TailBlowup { x: x + dt, reason: "profile stalled before reaching the tail" });
                    }
                    r = nr;
                    p = slope_at(r);
                }
                Phase::Tail { x0, r0 } => {
                    r = r0 * (-decay * (x + dt - x0)).exp();
                    p = -decay * r;
                }
            }
            x += dt;
            if !matches!(phase, Phase::Tail { .. }) && r < opts.clamp * rs {
                phase = Phase::Tail { x0: x, r0: r };
            }
        }
        x = k as f64 * h;
        right_r.push(r);
        right_dr.push(p);
    }

    let tail = right_r[half];
    if tail > opts.tail_tol * rs {
        return Err(Error::TruncatedTail { tail, tolerance: opts.tail_tol * rs });
    }

    let mut xs = Vec::with_capacity(n);
    let mut values = vec![0.0; n];
    let mut slopes = vec![0.0; n];
    for j in 0..n {
        xs.push(-half_width + j as f64 * h);
        if j >= half {
            values[j] = right_r[j - half];
            slopes[j] = right_dr[j - half];
        } else {
            values[j] = right_r[half - j];
            slopes[j] = -right_dr[half - j];
        }
    }

    let q_max = values.iter().map(|&v| eval_q(nl, omega, v)).fold(0.0, f64::max);
    let residual = values
        .iter()
        .zip(&slopes)
        .map(|(&v, &d)| (d * d - eval_q(nl, omega, v)).abs())
        .fold(0.0, f64::max);

    Ok(ProfileSolution {
        omega,
        r_star: rs,
        half_width,
        x: xs,
        r: values,
        dr: slopes,
        first_integral_residual: residual / q_max,
    })
}

impl ProfileSolution {
    pub const CSV_HEADER: [&'static str; 3] = ["x", "R", "dR"];

    pub fn csv_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|j| vec![self.x[j], self.r[j], self.dr[j]])
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.r.len() as f64
    }

    /// The periodic grid of period `2X` carrying the samples.
    pub fn grid(&self) -> Grid {
        Grid::new(2.0 * self.half_width, self.r.len()).expect("profile grids are valid periodic grids")
    }

    pub fn to_field(&self) -> ComplexField {
        ComplexField::from_real(self.grid(), &self.r)
    }

    /// Rectangle-rule mass `h Σ R²`.
    pub fn mass(&self) -> f64 {
        self.spacing() * self.r.iter().map(|v| v * v).sum::<f64>()
    }

    /// `R(x)` by cubic Hermite interpolation of the samples, continued by
    /// `R(X) e^{−√ω(|x|−X)}` outside the sampled range.
    pub fn sample(&self, x: f64) -> f64 {
        self.sample_with_derivative(x).0
    }

    pub fn sample_with_derivative(&self, x: f64) -> (f64, f64) {
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let h = self.spacing();
        let half = self.r.len() / 2;
        // Right half nodes: index half + k ↔ x = kh; x = X is node 0 by symmetry.
        let node = |k: usize| -> (f64, f64) {
            if k < half {
                (self.r[half + k], self.dr[half + k])
            } else {
                (self.r[0], -self.dr[0])
            }
        };
        if ax >= self.half_width {
            let (rx, _) = node(half);
            let decay = self.omega.sqrt();
            let v = rx * (-decay * (ax - self.half_width)).exp();
            return (v, -sign * decay * v);
        }
        let k = ((ax / h).floor() as usize).min(half - 1);
        let t = (ax - k as f64 * h) / h;
        let (y0, m0) = node(k);
        let (y1, m1) = node(k + 1);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * h * m0 + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * h * m1)
            / h;
        (value, sign * deriv)
    }

    /// Samples `R(x − shift)` on an arbitrary grid.
    pub fn sample_on(&self, grid: &Grid, shift: f64) -> ComplexField {
        let values: Vec<Complex64> =
            grid.points().map(|x| Complex64::new(self.sample(grid.wrap(x - shift)), 0.0)).collect();
        ComplexField::new(grid.clone(), values).expect("length matches grid")
    }

    /// Largest `|R(x) − R(−x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.r.len();
        (1..n).map(|j| (self.r[j] - self.r[n - j]).abs()).fold(0.0, f64::max)
    }
}

/// One row of the mass-frequency table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassSample {
    pub omega: f64,
    pub lambda: f64,
    pub dlambda: f64,
    /// Central difference of `λ`, when both neighbours are admissible.
    pub dlambda_fd: Option<f64>,
}

impl MassSample {
    pub fn compute<N: Nonlinearity + ?Sized>(nl: &N, omega: f64) -> Result<Self> {
        let lambda = mass_of_omega(nl, omega)?;
        let dlambda = mass_derivative(nl, omega)?;
        Ok(Self { omega, lambda, dlambda, dlambda_fd: mass_derivative_fd(nl, omega) })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MassCurve {
    pub samples: Vec<MassSample>,
}

impl MassCurve {
    pub const CSV_HEADER: [&'static str; 3] = ["omega", "lambda", "dlambda"];

    pub fn csv_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.samples.iter().map(|s| vec![s.omega, s.lambda, s.dlambda])
    }

    /// Evaluates every frequency in order; the first failure aborts.
    pub fn compute<N: Nonlinearity + ?Sized>(nl: &N, omegas: &[f64]) -> Result<Self> {
        let samples = omegas.iter().map(|&w| MassSample::compute(nl, w)).collect::<Result<_>>()?;
        Ok(Self { samples })
    }

    /// Every `λ′ ≥ −tol`.
    pub fn is_non_decreasing(&self, tol: f64) -> bool {
        self.samples.iter().all(|s| s.dlambda >= -tol)
    }

    /// No two samples share a mass: `λ` strictly increasing in `ω`.
    pub fn is_strictly_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].lambda > w[0].lambda)
    }
}
