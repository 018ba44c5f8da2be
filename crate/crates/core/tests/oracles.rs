//! Library routes checked against independent oracles: closed forms for the
//! sech family, a plain Simpson quadrature of the mass integral, and the
//! scaling identities of the energy.

use solwave::field::{energy, random_corpus};
use solwave::minimize::{existence_identity_check, minimize_energy, MinimizeOptions};
use solwave::nonlinearity::{eval_l, eval_v};
use solwave::profile::{build_profile, mass_derivative, mass_of_omega, r_star, MassCurve};
use solwave::{CombinedPower, Complex64, ComplexField, Grid, Nonlinearity};

/// `λ(ω) = 2∫₀^{R*} s/√(ω − V(s)) ds` with `s = R*(1 − t²)` and composite
/// Simpson in `t`. Shares nothing with the library's θ-form except `r_star`.
fn simpson_mass(nl: &CombinedPower, omega: f64) -> f64 {
    let rs = r_star(nl, omega).unwrap();
    let f = |t: f64| {
        if t == 0.0 {
            // ω − V(s) ≈ −V′(R*)·R*·t²·… cancels the Jacobian's t.
            let h = 1e-7 * rs;
            let dv = (eval_v(nl, rs).unwrap() - eval_v(nl, rs - h).unwrap()) / h;
            return 2.0 * rs * 2.0 * rs / (dv * rs).sqrt();
        }
        let s = rs * (1.0 - t * t);
        if s <= 0.0 {
            return 0.0;
        }
        2.0 * s / (omega - eval_v(nl, s).unwrap()).sqrt() * 2.0 * rs * t
    };
    let n = 20_000;
    let h = 1.0 / n as f64;
    let mut sum = f(0.0) + f(1.0);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn cubic_closed_forms() {
    let cubic = CombinedPower::cubic();
    for omega in [0.1, 0.5, 2.0, 9.0] {
        assert!((r_star(&cubic, omega).unwrap() - (2.0 * omega).sqrt()).abs() < 1e-10);
        assert!((mass_of_omega(&cubic, omega).unwrap() - 4.0 * omega.sqrt()).abs() < 1e-6);
        assert!((mass_derivative(&cubic, omega).unwrap() - 2.0 / omega.sqrt()).abs() < 1e-4);
    }
}

#[test]
fn pure_power_scaling_law() {
    // R_ω(x) = ω^{1/(p−2)}R₁(√ω x), so λ(ω) = λ(1)·ω^{2/(p−2) − 1/2}.
    for p in [3.0, 4.0, 5.0] {
        let nl = CombinedPower::pure(1.0, p).unwrap();
        let base = mass_of_omega(&nl, 1.0).unwrap();
        let expo = 2.0 / (p - 2.0) - 0.5;
        for omega in [0.3, 2.5] {
            let m = mass_of_omega(&nl, omega).unwrap();
            assert!((m - base * omega.powf(expo)).abs() < 1e-8 * m, "p = {p}, ω = {omega}");
            let d = mass_derivative(&nl, omega).unwrap();
            let exact = expo * base * omega.powf(expo - 1.0);
            assert!((d - exact).abs() < 1e-5 * exact.abs(), "p = {p}: {d} vs {exact}");
        }
    }
}

#[test]
fn mass_matches_independent_quadrature() {
    let cp = CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap();
    let sup = cp.omega_sup().unwrap();
    for omega in [0.05, 0.2, 0.5 * sup, 0.9 * sup] {
        let lib = mass_of_omega(&cp, omega).unwrap();
        let oracle = simpson_mass(&cp, omega);
        assert!((lib - oracle).abs() < 1e-6 * oracle, "ω = {omega}: {lib} vs {oracle}");
        let eps = 1e-4 * omega;
        let fd = (simpson_mass(&cp, omega + eps) - simpson_mass(&cp, omega - eps)) / (2.0 * eps);
        let d = mass_derivative(&cp, omega).unwrap();
        assert!((d - fd).abs() < 1e-4 * fd.abs(), "ω = {omega}: {d} vs {fd}");
    }
    let cubic = CombinedPower::cubic();
    assert!((simpson_mass(&cubic, 1.0) - 4.0).abs() < 1e-6);
}

#[test]
fn combined_mass_curve_is_increasing() {
    let cp = CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap();
    let sup = cp.omega_sup().unwrap();
    let omegas: Vec<f64> = (1..=12).map(|i| sup * i as f64 / 13.0).collect();
    let curve = MassCurve::compute(&cp, &omegas).unwrap();
    assert!(curve.is_strictly_increasing());
    assert!(curve.samples.iter().all(|s| s.dlambda > 0.0));
}

#[test]
fn euler_operator_for_pure_powers() {
    // For G = −a·s^p, L(s) = a(p − 2)(6 − p)s^p.
    for (a, p) in [(0.25f64, 4.0f64), (1.0, 3.0), (2.0, 5.5), (1.0, 6.0), (0.5, 7.0)] {
        let nl = CombinedPower::pure(a, p).unwrap();
        for s in [0.1f64, 0.7, 1.3, 4.0] {
            let exact = a * (p - 2.0) * (6.0 - p) * s.powf(p);
            let got = eval_l(&nl, s).unwrap();
            assert!((got - exact).abs() < 1e-12 * exact.abs().max(1.0), "p = {p}, s = {s}");
        }
    }
}

#[test]
fn existence_identity_on_the_sech_family() {
    let cubic = CombinedPower::cubic();
    let grid = Grid::new(40.0, 2048).unwrap();
    for lambda in [2.0, 8.0] {
        let res = minimize_energy(&cubic, lambda, &grid, &MinimizeOptions::default()).unwrap();
        let omega = lambda * lambda / 16.0;
        assert!((res.omega - omega).abs() < 1e-3 * omega);
        assert!((res.energy + lambda.powi(3) / 96.0).abs() < 1e-3 * lambda.powi(3) / 96.0);
        assert!(existence_identity_check(&res) < 1e-3);
    }
}

#[test]
fn critical_rescaling_scales_energy_by_eta_squared() {
    // u_η = η^{1/2} u(ηx) keeps the mass and multiplies E by η² for G = −a s⁶.
    let nl = CombinedPower::pure(1.0 / 6.0, 6.0).unwrap();
    let grid = Grid::new(60.0, 4096).unwrap();
    let bump = |x: f64| (-(x * x) / 2.0).exp() * (1.0 + 0.3 * x) + 0.2 * (-(x - 1.0).powi(2)).exp();
    let u = ComplexField::from_fn(grid.clone(), |x| Complex64::new(bump(x), 0.4 * bump(x - 0.5)));
    for eta in [0.5f64, 2.0] {
        let ue = ComplexField::from_fn(grid.clone(), |x| {
            eta.sqrt() * Complex64::new(bump(eta * x), 0.4 * bump(eta * x - 0.5))
        });
        assert!((ue.mass() - u.mass()).abs() < 1e-10 * u.mass());
        let ratio = energy(&ue, &nl) / energy(&u, &nl);
        assert!((ratio - eta * eta).abs() < 1e-8 * eta * eta, "η = {eta}: {ratio}");
    }
}

#[test]
fn energy_is_gauge_and_translation_invariant() {
    let cp = CombinedPower::new(1.0, 0.5, 3.0, 4.5).unwrap();
    let grid = Grid::new(30.0, 512).unwrap();
    for u in random_corpus(&grid, 8, 5) {
        let u = u.scale(Complex64::new(2.0, 0.0));
        let e = energy(&u, &cp);
        let moved = u.translate(4.0 * grid.spacing()).scale(Complex64::from_polar(1.0, 0.9));
        assert!((energy(&moved, &cp) - e).abs() < 1e-12 * e.abs().max(1.0));
    }
}

#[test]
fn profile_satisfies_its_equation() {
    let cp = CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap();
    let omega = 0.5 * cp.omega_sup().unwrap();
    let x = 30.0f64.max(12.0 / omega.sqrt());
    let prof = build_profile(&cp, omega, x, 4096).unwrap();
    let u = prof.to_field();
    let d2 = u.second_derivative();
    // The periodic extension has a kink of size ~R(X) at ±X; stay clear of it.
    let mut worst = 0.0f64;
    for (j, &r) in prof.r.iter().enumerate().filter(|&(j, _)| prof.x[j].abs() < x - 1.0) {
        let res = -d2.values()[j].re + cp.dg(r) + omega * r;
        worst = worst.max(res.abs());
    }
    assert!(worst < 1e-6 * prof.r_star, "{worst}");
    assert!((prof.mass() - mass_of_omega(&cp, omega).unwrap()).abs() < 1e-6);
}
