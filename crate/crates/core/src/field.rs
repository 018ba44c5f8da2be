//! Complex fields on a uniform periodic grid.
//!
//! Derivatives and the `H¹` inner product are spectral. With the
//! unnormalized transform `û_m = Σ_j u_j e^{−2πijm/n}`, Parseval reads
//! `h Σ|u_j|² = (h/n) Σ|û_m|²`.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{eval_f, eval_f_grad, Nonlinearity};
use crate::profile::ProfileSolution;
use crate::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Periodic grid `x_j = −L/2 + jh`, `h = L/n`, `n` a power of two.
#[derive(Clone)]
pub struct Grid {
    length: f64,
    n: usize,
    wavenumbers: Arc<[f64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("length", &self.length).field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain(format!("grid length must be positive, got {length}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::domain(format!("grid size must be a power of two ≥ 16, got {n}")));
        }
        let mut planner = FftPlanner::new();
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers = (0..n)
            .map(|m| {
                if m < n / 2 {
                    base * m as f64
                } else if m == n / 2 {
                    base * (n / 2) as f64
                } else {
                    base * (m as f64 - n as f64)
                }
            })
            .collect();
        Ok(Self {
            length,
            n,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }

    /// Maps `x` into the fundamental cell `[−L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length;
        (x + 0.5 * l).rem_euclid(l) - 0.5 * l
    }

    /// Angular wavenumber of mode `m`; the Nyquist mode carries `+π/h`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.wavenumbers[m]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wavenumber used for odd derivatives: zero at the Nyquist mode.
    fn odd_wavenumber(&self, m: usize) -> f64 {
        if m == self.n / 2 {
            0.0
        } else {
            self.wavenumbers[m]
        }
    }

    pub fn fft(&self, values: &mut [Complex64]) {
        self.forward.process(values);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn ifft(&self, values: &mut [Complex64]) {
        self.inverse.process(values);
        let scale = 1.0 / self.n as f64;
        values.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Samples of a complex function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::domain(format!("{} samples for a grid of {}", values.len(), grid.n())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::domain("field samples must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n();
        Self { grid, values: vec![ZERO; n] }
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.n(), "sample count must match the grid");
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        self.grid.fft(&mut buf);
        buf
    }

    pub fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Self {
        grid.ifft(&mut spectrum);
        Self { grid, values: spectrum }
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectral first derivative.
    pub fn derivative(&self) -> Self {
        let mut spec = self.spectrum();
        for (m, c) in spec.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, self.grid.odd_wavenumber(m));
        }
        Self::from_spectrum(self.grid.clone(), spec)
    }

    /// Spectral second derivative.
    pub fn second_derivative(&self) -> Self {
        let mut spec = self.spectrum();
        for (c, k) in spec.iter_mut().zip(self.grid.wavenumbers().iter()) {
            *c *= -k * k;
        }
        Self::from_spectrum(self.grid.clone(), spec)
    }

    /// `u(· − y)` by exact trigonometric interpolation.
    pub fn translate(&self, y: f64) -> Self {
        let mut spec = self.spectrum();
        let nyq = self.grid.n() / 2;
        for (m, c) in spec.iter_mut().enumerate() {
            let k = self.grid.wavenumber(m);
            if m == nyq {
                *c *= (k * y).cos();
            } else {
                *c *= Complex64::from_polar(1.0, -k * y);
            }
        }
        Self::from_spectrum(self.grid.clone(), spec)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// `self + factor·other`.
    pub fn axpy(&self, factor: Complex64, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + factor * b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// `h Σ|u_j|²`.
    pub fn mass(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `L²` pairing `h Σ u_j conj(w_j)`.
    pub fn l2_inner(&self, other: &Self) -> Result<Complex64> {
        self.same_grid(other)?;
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(sum * self.grid.spacing())
    }

    /// `‖u‖_d^d = h Σ|u_j|^d`.
    pub fn lp_norm_pow(&self, d: f64) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm().powf(d)).sum::<f64>()
    }

    /// `∫|u′|²` by Parseval.
    pub fn dirichlet(&self) -> f64 {
        let spec = self.spectrum();
        let k = self.grid.wavenumbers();
        let sum: f64 = spec.iter().zip(k.iter()).map(|(c, k)| k * k * c.norm_sqr()).sum();
        sum * self.grid.spacing() / self.grid.n() as f64
    }

    /// `(u, w)_{H¹} = (h/n) Σ (1 + k²) û conj(ŵ)`.
    pub fn h1_inner(&self, other: &Self) -> Result<Complex64> {
        self.same_grid(other)?;
        let a = self.spectrum();
        let b = other.spectrum();
        let k = self.grid.wavenumbers();
        let sum: Complex64 = a.iter().zip(&b).zip(k.iter()).map(|((x, y), k)| (1.0 + k * k) * x * y.conj()).sum();
        Ok(sum * (self.grid.spacing() / self.grid.n() as f64))
    }

    pub fn h1_norm(&self) -> f64 {
        (self.mass() + self.dirichlet()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Writes `x,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.17e},{:.17e},{:.17e}", self.grid.x(j), v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv). The grid is
    /// recovered from the first two abscissae and the row count.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::domain(format!("bad CSV row {}: {e}", i + 1)))?;
            if cols.len() != 3 {
                return Err(Error::domain(format!("CSV row {} has {} columns, expected 3", i + 1, cols.len())));
            }
            xs.push(cols[0]);
            values.push(Complex64::new(cols[1], cols[2]));
        }
        if xs.len() < 2 {
            return Err(Error::domain("CSV field needs at least two rows"));
        }
        let length = (xs[1] - xs[0]) * xs.len() as f64;
        Self::new(Grid::new(length, xs.len())?, values)
    }

    /// Little-endian binary snapshot: `u64 n`, `f64 L`, then `n` pairs
    /// `(re, im)` of `f64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        out.write_all(&self.grid.length().to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let length = f64::from_le_bytes(word);
        let grid = Grid::new(length, n)?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            input.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            input.read_exact(&mut word)?;
            values.push(Complex64::new(re, f64::from_le_bytes(word)));
        }
        Self::new(grid, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path.extension().is_some_and(|e| e == "bin") {
            self.write_binary(file)
        } else {
            self.write_csv(file)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "bin") {
            Self::read_binary(file)
        } else {
            Self::read_csv(file)
        }
    }
}

pub fn mass(u: &ComplexField) -> f64 {
    u.mass()
}

/// `E(u) = ½∫|u′|² + ∫G(|u|)`.
pub fn energy<N: Nonlinearity + ?Sized>(u: &ComplexField, nl: &N) -> f64 {
    let potential: f64 = u.values().iter().map(|&v| eval_f(nl, v)).sum();
    0.5 * u.dirichlet() + u.grid().spacing() * potential
}

/// `−u″ + F′(u)`, the `L²` gradient of [`energy`].
pub fn energy_gradient<N: Nonlinearity + ?Sized>(u: &ComplexField, nl: &N) -> ComplexField {
    let lap = u.second_derivative();
    let values = u.values().iter().zip(lap.values()).map(|(&v, &d2)| -d2 + eval_f_grad(nl, v)).collect();
    ComplexField::from_parts_unchecked(u.grid().clone(), values)
}

/// `ξ(v) = ∫|v′|² + (G″(R₀) + ω₀)v²` on the profile grid.
pub fn hessian_form<N: Nonlinearity + ?Sized>(v: &[f64], profile: &ProfileSolution, nl: &N) -> Result<f64> {
    if v.len() != profile.len() {
        return Err(Error::GridMismatch);
    }
    let field = ComplexField::from_real(profile.grid(), v);
    let mut potential = 0.0;
    for (&vj, &r) in v.iter().zip(&profile.r) {
        let d2 = nl.d2g(r).ok_or(Error::Capability("a second derivative"))?;
        potential += (d2 + profile.omega) * vj * vj;
    }
    Ok(field.dirichlet() + profile.spacing() * potential)
}

/// `sup_k ‖u‖_{L²(k, k+1)}` over the unit intervals inside `[−L/2, L/2]`.
///
/// `|u|²` is integrated as the piecewise-linear interpolant of its samples,
/// so interval endpoints need not be grid points.
pub fn vanishing_sup(u: &ComplexField) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let half = 0.5 * grid.length();
    let w: Vec<f64> = (0..=n).map(|j| u.values()[j % n].norm_sqr()).collect();
    let mut cumulative = vec![0.0; n + 1];
    for j in 0..n {
        cumulative[j + 1] = cumulative[j] + 0.5 * h * (w[j] + w[j + 1]);
    }
    let primitive = |x: f64| -> f64 {
        let t = ((x + half) / h).clamp(0.0, n as f64);
        let j = (t.floor() as usize).min(n - 1);
        let s = t - j as f64;
        cumulative[j] + h * (w[j] * s + 0.5 * (w[j + 1] - w[j]) * s * s)
    };
    let first = (-half).ceil() as i64;
    let last = half.floor() as i64;
    (first..last)
        .map(|k| primitive((k + 1) as f64) - primitive(k as f64))
        .fold(0.0, f64::max)
        .sqrt()
}

/// The constant in `‖u‖_d^d ≤ S^d · A(u)` that the field saturates, where
/// `A = sup^{d−2}‖u‖²_{H¹}` for `d ≥ 6` and `sup^{(d+2)/2}‖u‖_{H¹}^{(d−2)/2}`
/// below. Zero for the zero field.
pub fn vanishing_constant(u: &ComplexField, d: f64) -> f64 {
    let lhs = u.lp_norm_pow(d);
    if lhs == 0.0 {
        return 0.0;
    }
    (lhs / vanishing_bound(u, d)).powf(1.0 / d)
}

fn vanishing_bound(u: &ComplexField, d: f64) -> f64 {
    let sup = vanishing_sup(u);
    let h1 = u.h1_norm();
    if d >= 6.0 {
        sup.powf(d - 2.0) * h1 * h1
    } else {
        sup.powf(0.5 * (d + 2.0)) * h1.powf(0.5 * (d - 2.0))
    }
}

pub fn verify_vanishing_inequality(u: &ComplexField, d: f64, s_const: f64) -> Result<bool> {
    if !(d >= 2.0) {
        return Err(Error::domain(format!("exponent must be at least 2, got {d}")));
    }
    let lhs = u.lp_norm_pow(d);
    Ok(lhs <= s_const.powf(d) * vanishing_bound(u, d))
}

/// Trigonometric interpolant `f(y) = Σ c_m e^{ik_m y}` with derivatives.
/// The Nyquist term is taken as `c cos(k y)`.
struct TrigSeries<'a> {
    grid: &'a Grid,
    coeffs: Vec<Complex64>,
}

impl TrigSeries<'_> {
    fn eval(&self, y: f64) -> [Complex64; 3] {
        let nyq = self.grid.n() / 2;
        let mut out = [ZERO; 3];
        for (m, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(m);
            if m == nyq {
                let (s, co) = (k * y).sin_cos();
                out[0] += c * co;
                out[1] -= c * (k * s);
                out[2] -= c * (k * k * co);
            } else {
                let e = c * Complex64::from_polar(1.0, k * y);
                out[0] += e;
                out[1] += e * Complex64::new(0.0, k);
                out[2] -= e * (k * k);
            }
        }
        out
    }

    /// Maximizes `|f|²` near `y0` by safeguarded Newton steps.
    fn refine_max(&self, y0: f64, start_value: f64) -> (f64, f64) {
        let h = self.grid.spacing();
        let (mut y, mut best) = (y0, start_value);
        for _ in 0..8 {
            let [f, f1, f2] = self.eval(y);
            let d1 = 2.0 * (f1 * f.conj()).re;
            let d2 = 2.0 * (f1.norm_sqr() + (f2 * f.conj()).re);
            if !(d2 < 0.0) {
                break;
            }
            let step = (-d1 / d2).clamp(-h, h);
            let value = self.eval(y + step)[0].norm_sqr();
            if value < best {
                break;
            }
            y += step;
            best = value;
            if step.abs() < 1e-14 * (1.0 + y.abs()) {
                break;
            }
        }
        (y, best)
    }
}

/// Vertex offset of the parabola through `(−1, a), (0, b), (1, c)`.
fn parabola_vertex(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom < 0.0 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitDistanceResult {
    pub distance: f64,
    pub shift: f64,
    pub phase_re: f64,
    pub phase_im: f64,
    /// Set when `|(u, R(·−y))_{H¹}|` is too small to define a phase; the
    /// phase is then reported as 1.
    pub degenerate_phase: bool,
}

impl OrbitDistanceResult {
    pub fn phase(&self) -> Complex64 {
        Complex64::new(self.phase_re, self.phase_im)
    }
}

/// The profile on `grid`, reusing the samples when the grids coincide.
pub fn profile_on_grid(profile: &ProfileSolution, grid: &Grid) -> ComplexField {
    if profile.grid() == *grid {
        profile.to_field()
    } else {
        profile.sample_on(grid, 0.0)
    }
}

/// `inf_{|z|=1, y} ‖u − zR(·−y)‖_{H¹}`.
///
/// The cross-correlation `C(y) = (u, R(·−y))_{H¹}` is evaluated on all grid
/// shifts with one inverse transform, and its modulus is maximized to
/// sub-grid accuracy on the trigonometric interpolant. The optimal phase is
/// `C/|C|`.
pub fn orbit_distance(u: &ComplexField, profile: &ProfileSolution) -> OrbitDistanceResult {
    let r = profile_on_grid(profile, u.grid());
    orbit_distance_to(u, &r)
}

/// [`orbit_distance`] against an already sampled profile on `u`'s grid.
pub fn orbit_distance_to(u: &ComplexField, r: &ComplexField) -> OrbitDistanceResult {
    let grid = u.grid();
    assert!(grid == r.grid(), "orbit distance needs matching grids");
    let n = grid.n();
    let norm = grid.spacing() / n as f64;
    let uh = u.spectrum();
    let rh = r.spectrum();
    let coeffs: Vec<Complex64> = uh
        .iter()
        .zip(&rh)
        .zip(grid.wavenumbers().iter())
        .map(|((a, b), k)| a * b.conj() * ((1.0 + k * k) * norm))
        .collect();
    let u_norm2: f64 = uh.iter().zip(grid.wavenumbers().iter()).map(|(a, k)| (1.0 + k * k) * a.norm_sqr()).sum::<f64>() * norm;
    let r_norm2: f64 = rh.iter().zip(grid.wavenumbers().iter()).map(|(a, k)| (1.0 + k * k) * a.norm_sqr()).sum::<f64>() * norm;

    // Σ_m c_m e^{i k_m (jh)} for every grid shift jh.
    let mut corr = coeffs.clone();
    grid.inverse.process(&mut corr);
    let mags: Vec<f64> = corr.iter().map(|c| c.norm_sqr()).collect();
    let j = (0..n).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap_or(0);
    let h = grid.spacing();
    let offset = parabola_vertex(mags[(j + n - 1) % n], mags[j], mags[(j + 1) % n]);
    let series = TrigSeries { grid, coeffs };
    let y_grid = j as f64 * h;
    let mut y0 = y_grid + offset * h;
    let mut start = series.eval(y0)[0].norm_sqr();
    if start < mags[j] {
        y0 = y_grid;
        start = mags[j];
    }
    let (y, _) = series.refine_max(y0, start);
    let c = series.eval(y)[0];

    let scale = (u_norm2 * r_norm2).sqrt();
    let degenerate = c.norm() < 1e-12 * scale || scale == 0.0;
    let phase = if degenerate { Complex64::new(1.0, 0.0) } else { c / c.norm() };
    // Summed directly rather than as ‖u‖² + ‖R‖² − 2|C|, which cancels near the orbit.
    let nyq = n / 2;
    let d2: f64 = uh
        .iter()
        .zip(&rh)
        .enumerate()
        .map(|(m, (a, b))| {
            let k = grid.wavenumber(m);
            let moved = if m == nyq { b * (k * y).cos() } else { b * Complex64::from_polar(1.0, -k * y) };
            (1.0 + k * k) * (a - phase * moved).norm_sqr()
        })
        .sum::<f64>()
        * norm;
    OrbitDistanceResult {
        distance: d2.max(0.0).sqrt(),
        shift: grid.wrap(y),
        phase_re: phase.re,
        phase_im: phase.im,
        degenerate_phase: degenerate,
    }
}

/// Output of [`recenter_align`].
#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    /// Real part of the aligned field.
    pub field: Vec<f64>,
    /// Location of the peak of `|u|` before translation.
    pub shift: f64,
    /// Unit phase of `u` at the peak.
    pub phase: Complex64,
    /// `‖Im‖₂/‖u‖₂` after alignment.
    pub residual: f64,
}

/// Translates the peak of `|u|` to `x = 0` and removes its phase.
pub fn recenter_align(u: &ComplexField) -> Alignment {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let mags: Vec<f64> = u.values().iter().map(|v| v.norm_sqr()).collect();
    let j = (0..n).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap_or(0);
    let offset = parabola_vertex(mags[(j + n - 1) % n], mags[j], mags[(j + 1) % n]);

    // u(x) = (1/n) Σ û_m e^{ik_m(x + L/2)}.
    let mut coeffs = u.spectrum();
    for (m, c) in coeffs.iter_mut().enumerate() {
        let k = grid.wavenumber(m);
        if m != n / 2 {
            *c *= Complex64::from_polar(1.0 / n as f64, 0.5 * k * grid.length());
        } else {
            // cos(k(x + L/2)) = cos(kx)·(−1)^{n/2}
            *c *= if (n / 2) % 2 == 0 { 1.0 } else { -1.0 } / n as f64;
        }
    }
    let series = TrigSeries { grid, coeffs };
    let x_grid = grid.x(j);
    let mut x0 = x_grid + offset * h;
    let mut start = series.eval(x0)[0].norm_sqr();
    if start < mags[j] {
        x0 = x_grid;
        start = mags[j];
    }
    let (peak, _) = if mags[j] > 0.0 { series.refine_max(x0, start) } else { (x0, start) };

    let centred = u.translate(-peak);
    let at_zero = centred.values()[n / 2];
    let phase = if at_zero.norm() > 0.0 { at_zero / at_zero.norm() } else { Complex64::new(1.0, 0.0) };
    let aligned: Vec<Complex64> = centred.values().iter().map(|v| v * phase.conj()).collect();
    let total = u.l2_norm();
    let imag = (h * aligned.iter().map(|v| v.im * v.im).sum::<f64>()).sqrt();
    Alignment {
        field: aligned.iter().map(|v| v.re).collect(),
        shift: grid.wrap(peak),
        phase,
        residual: if total > 0.0 { imag / total } else { 0.0 },
    }
}

/// A smooth random field: a few Gaussian bumps with random complex
/// amplitudes and carrier frequencies, normalized to unit `H¹` norm.
pub fn random_h1_field<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> ComplexField {
    let quarter = 0.25 * grid.length();
    let bumps: Vec<(f64, f64, f64, Complex64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let centre = rng.random_range(-quarter..quarter);
            let width = rng.random_range(0.5..3.0);
            let carrier = rng.random_range(-2.0..2.0);
            let amp = Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(0.0..std::f64::consts::TAU));
            (centre, width, carrier, amp)
        })
        .collect();
    let field = ComplexField::from_fn(grid.clone(), |x| {
        bumps
            .iter()
            .map(|&(c, w, k, a)| a * (-((x - c) / w).powi(2)).exp() * Complex64::from_polar(1.0, k * x))
            .sum()
    });
    let norm = field.h1_norm();
    field.scale(Complex64::new(1.0 / norm, 0.0))
}

/// `count` fields from [`random_h1_field`] with a seeded generator.
pub fn random_corpus(grid: &Grid, count: usize, seed: u64) -> Vec<ComplexField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_h1_field(grid, &mut rng)).collect()
}
