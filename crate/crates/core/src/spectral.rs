//! The linearized operator `L₊ = −∂² + G″(R₀) + ω₀` around a soliton.
//!
//! `L₊R₀′ = 0` and `L₊(∂_ωR) = −R₀`. Non-degeneracy of the minimizer is
//! certified by positivity of `⟨L₊v, v⟩` on even `v ⊥ R₀` together with
//! `⟨R₀, ∂_ωR⟩ = λ′(ω₀)/2 > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::linalg;
use crate::nonlinearity::Nonlinearity;
use crate::profile::{mass_derivative, ProfileSolution};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Laplacian {
    /// Exact on the trigonometric interpolant.
    Spectral,
    /// Periodic three-point stencil.
    SecondDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
    All,
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Self::Even),
            "odd" => Ok(Self::Odd),
            "all" => Ok(Self::All),
            other => Err(Error::domain(format!("unknown parity {other:?}"))),
        }
    }
}

/// Symmetrizes under `x ↦ −x`, which on the grid is `j ↦ (n − j) mod n`.
pub fn project_parity(v: &mut [f64], parity: Parity) {
    let n = v.len();
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
        Parity::All => return,
    };
    for j in 0..=n / 2 {
        let m = (n - j) % n;
        let a = 0.5 * (v[j] + sign * v[m]);
        v[j] = a;
        v[m] = sign * a;
    }
}

#[derive(Clone, Debug)]
pub struct LPlusOperator {
    grid: Grid,
    omega: f64,
    potential: Vec<f64>,
    laplacian: Laplacian,
}

/// `L₊` with the spectral Laplacian.
pub fn assemble<N: Nonlinearity + ?Sized>(profile: &ProfileSolution, nl: &N) -> Result<LPlusOperator> {
    assemble_with(profile, nl, Laplacian::Spectral)
}

pub fn assemble_with<N: Nonlinearity + ?Sized>(
    profile: &ProfileSolution,
    nl: &N,
    laplacian: Laplacian,
) -> Result<LPlusOperator> {
    let potential = profile
        .r
        .iter()
        .map(|&r| nl.d2g(r).map(|d2| d2 + profile.omega).ok_or(Error::Capability("a second derivative")))
        .collect::<Result<_>>()?;
    Ok(LPlusOperator { grid: profile.grid(), omega: profile.omega, potential, laplacian })
}

impl LPlusOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    pub fn laplacian(&self) -> Laplacian {
        self.laplacian
    }

    /// `G″(R₀(x_j)) + ω₀`.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    fn minus_second_derivative(&self, v: &[f64]) -> Vec<f64> {
        match self.laplacian {
            Laplacian::Spectral => {
                let field = ComplexField::from_real(self.grid.clone(), v);
                field.second_derivative().values().iter().map(|c| -c.re).collect()
            }
            Laplacian::SecondDifference => {
                let n = v.len();
                let h2 = self.grid.spacing().powi(2);
                (0..n).map(|j| (2.0 * v[j] - v[(j + n - 1) % n] - v[(j + 1) % n]) / h2).collect()
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len(), "vector length must match the operator");
        let mut out = self.minus_second_derivative(v);
        for ((o, p), x) in out.iter_mut().zip(&self.potential).zip(v) {
            *o += p * x;
        }
        out
    }

    /// `h Σ v_j (L₊v)_j`.
    pub fn form(&self, v: &[f64]) -> f64 {
        self.grid.spacing() * linalg::dot(v, &self.apply(v))
    }

    /// Lowest `k` eigenvalues on the parity subspace.
    pub fn spectrum(&self, k: usize, parity: Parity) -> Result<Eigenpairs> {
        self.eigen(k, parity, None)
    }

    /// Lowest `k` eigenvalues of `L₊` compressed to `{v ⊥ constraint}` on the
    /// parity subspace.
    pub fn constrained_spectrum(&self, k: usize, parity: Parity, constraint: &[f64]) -> Result<Eigenpairs> {
        self.eigen(k, parity, Some(constraint))
    }

    /// Shift-invert Lanczos: the largest eigenvalues of `(L₊ − σ)⁻¹`, with
    /// `σ` below the potential, are the lowest of `L₊`. Inner solves use CG
    /// preconditioned by the constant-coefficient `(−∂² + ω₀ − σ)⁻¹`.
    fn eigen(&self, k: usize, parity: Parity, constraint: Option<&[f64]>) -> Result<Eigenpairs> {
        if k == 0 {
            return Err(Error::domain("need at least one eigenvalue"));
        }
        let n = self.len();
        let sigma = self.potential.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let unit_constraint = constraint.map(|c| {
            let mut c = c.to_vec();
            project_parity(&mut c, parity);
            let norm = linalg::norm(&c);
            c.iter_mut().for_each(|x| *x /= norm);
            c
        });
        let project = |v: &mut [f64]| {
            project_parity(v, parity);
            if let Some(c) = &unit_constraint {
                let a = linalg::dot(v, c);
                v.iter_mut().zip(c).for_each(|(x, ci)| *x -= a * ci);
            }
        };

        let shifted = |v: &[f64]| -> Vec<f64> {
            let mut w = v.to_vec();
            project(&mut w);
            let mut out = self.apply(&w);
            out.iter_mut().zip(&w).for_each(|(o, x)| *o -= sigma * x);
            project(&mut out);
            out
        };
        let k2: Vec<f64> = self.grid.wavenumbers().iter().map(|k| k * k).collect();
        let shift = match self.laplacian {
            Laplacian::Spectral => k2.clone(),
            Laplacian::SecondDifference => {
                let h = self.grid.spacing();
                k2.iter().map(|k2| (2.0 * (0.5 * k2.sqrt() * h).sin() / h).powi(2)).collect()
            }
        };
        let c0 = self.omega - sigma;
        let precondition = |r: &[f64]| -> Vec<f64> {
            let mut w = r.to_vec();
            project(&mut w);
            let mut spec = ComplexField::from_real(self.grid.clone(), &w).spectrum();
            spec.iter_mut().zip(&shift).for_each(|(s, k2)| *s /= c0 + k2);
            let mut out: Vec<f64> = ComplexField::from_spectrum(self.grid.clone(), spec).values().iter().map(|c| c.re).collect();
            project(&mut out);
            out
        };
        let worst_inner = std::cell::Cell::new(0.0f64);
        let inverse = |b: &[f64]| -> Vec<f64> {
            let mut b = b.to_vec();
            project(&mut b);
            let out = linalg::pcg(shifted, precondition, &b, 1e-12, 500);
            worst_inner.set(worst_inner.get().max(out.relative_residual));
            out.x
        };

        let dim = match parity {
            Parity::Even => n / 2 + 1,
            Parity::Odd => n / 2 - 1,
            Parity::All => n,
        } - usize::from(constraint.is_some());
        let steps = dim.min(40 + 8 * k);
        // A smooth, asymmetric start vector has components along every mode.
        let start: Vec<f64> = self
            .grid
            .points()
            .map(|x| (-(x - 0.3).powi(2) / 8.0).exp() * (1.0 + 0.4 * x + 0.1 * x * x))
            .collect();
        let (thetas, vectors) = linalg::lanczos_largest(inverse, project, &start, steps);
        if !(worst_inner.get() < 1e-8) {
            return Err(Error::EigenConvergence { iterations: steps, residual: worst_inner.get() });
        }
        if thetas.len() < k {
            return Err(Error::EigenConvergence { iterations: thetas.len(), residual: f64::INFINITY });
        }

        let mut values = Vec::with_capacity(k);
        let mut out_vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        for mut v in vectors.into_iter().take(k) {
            project(&mut v);
            let norm = linalg::norm(&v);
            v.iter_mut().for_each(|x| *x /= norm);
            let mut av = self.apply(&v);
            project(&mut av);
            let mu = linalg::dot(&v, &av);
            let res = av.iter().zip(&v).map(|(a, x)| (a - mu * x).powi(2)).sum::<f64>().sqrt();
            values.push(mu);
            out_vectors.push(v);
            residuals.push(res);
        }
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if !(worst < 1e-6 * scale) {
            return Err(Error::EigenConvergence { iterations: steps, residual: worst });
        }
        Ok(Eigenpairs { values, vectors: out_vectors, residuals })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit Euclidean norm.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// `‖L₊R₀′‖₂/‖R₀′‖₂`, with `R₀′` from the profile integrator.
pub fn kernel_residual(op: &LPlusOperator, profile: &ProfileSolution) -> f64 {
    relative_image_norm(op, &profile.dr)
}

/// `‖L₊v‖₂/‖v‖₂`.
pub fn relative_image_norm(op: &LPlusOperator, v: &[f64]) -> f64 {
    linalg::norm(&op.apply(v)) / linalg::norm(v)
}

/// Solves `L₊w = −R₀` on the even subspace, so that `w = ∂_ωR`, with the
/// second-difference Laplacian on the half line `[0, X]`: mirror condition
/// at `x = 0`, `w(X) = 0`.
pub fn omega_derivative_solve<N: Nonlinearity + ?Sized>(profile: &ProfileSolution, nl: &N) -> Result<Vec<f64>> {
    let n = profile.len();
    let half = n / 2;
    let h2 = profile.spacing().powi(2);
    let mut diag = Vec::with_capacity(half);
    let mut rhs = Vec::with_capacity(half);
    for k in 0..half {
        let r = profile.r[half + k];
        let d2 = nl.d2g(r).ok_or(Error::Capability("a second derivative"))?;
        diag.push(2.0 / h2 + d2 + profile.omega);
        rhs.push(-r);
    }
    let off = -1.0 / h2;
    let sub = vec![off; half - 1];
    let mut sup = vec![off; half - 1];
    sup[0] = 2.0 * off;
    let w = linalg::solve_tridiagonal(&sub, &diag, &sup, &rhs)
        .ok_or_else(|| Error::SingularSolve(format!("even-subspace L₊ is singular at ω = {}", profile.omega)))?;
    let mut full = vec![0.0; n];
    for k in 0..half {
        full[half + k] = w[k];
        full[half - k] = w[k];
    }
    full[0] = 0.0;
    Ok(full)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub omega: f64,
    pub lowest_even: Vec<f64>,
    pub lowest_odd: Vec<f64>,
    pub kernel_residual: f64,
    /// `min ⟨L₊v, v⟩` over even `v ⊥ R₀`, `‖v‖ = 1`.
    pub constrained_min: f64,
    /// `⟨R₀, ∂_ωR⟩` from the resolvent solve.
    pub resolvent_pairing: f64,
    /// `λ′(ω₀)/2` from the amplitude quadrature.
    pub half_mass_derivative: f64,
    pub certified: bool,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Eigenvalues, kernel residual, constrained minimum and resolvent pairing
/// for the soliton `profile`.
pub fn nondegeneracy_certificate<N: Nonlinearity + ?Sized>(
    op: &LPlusOperator,
    profile: &ProfileSolution,
    nl: &N,
    k: usize,
) -> Result<SpectrumReport> {
    let even = op.spectrum(k, Parity::Even)?;
    let odd = op.spectrum(k, Parity::Odd)?;
    let constrained = op.constrained_spectrum(1, Parity::Even, &profile.r)?;
    let w = omega_derivative_solve(profile, nl)?;
    let pairing = profile.spacing() * linalg::dot(&profile.r, &w);
    let half_dl = 0.5 * mass_derivative(nl, profile.omega)?;
    let constrained_min = constrained.values[0];
    let certified = constrained_min > 0.0 && pairing > 0.0 && (pairing - half_dl).abs() <= 1e-2 * half_dl.abs();
    Ok(SpectrumReport {
        omega: profile.omega,
        lowest_even: even.values,
        lowest_odd: odd.values,
        kernel_residual: kernel_residual(op, profile),
        constrained_min,
        resolvent_pairing: pairing,
        half_mass_derivative: half_dl,
        certified,
    })
}

/// A unit eigenvector as a field on the operator grid.
pub fn eigenvector_field(op: &LPlusOperator, v: &[f64]) -> ComplexField {
    let values = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    ComplexField::new(op.grid().clone(), values).expect("length matches grid")
}
