//! Flow, minimizer and stability behaviour on whole experiments.

use solwave::evolve::{
    evolve, stability_experiment, EvolveConfig, Perturbation, PerturbationKind, StabilityConfig, StabilityVerdict,
};
use solwave::minimize::{cross_validate, i_curve, minimize_energy, MinimizeOptions};
use solwave::profile::build_profile;
use solwave::{CombinedPower, Complex64, Grid};

#[test]
fn soliton_phase_advances_at_omega() {
    let cubic = CombinedPower::cubic();
    for omega in [0.5, 1.0] {
        let prof = build_profile(&cubic, omega, 20.0, 512).unwrap();
        let r = prof.to_field();
        let cfg = EvolveConfig { snapshot_every: None, ..EvolveConfig::new(1e-3, 1.0, 1000).unwrap() };
        let trace = evolve(&r, &cubic, &cfg, None).unwrap();
        let end = trace.final_field.unwrap();
        let pairing = end.l2_inner(&r).unwrap();
        let expected = Complex64::from_polar(1.0, omega);
        assert!((pairing / pairing.norm() - expected).norm() < 1e-3, "ω = {omega}: {pairing}");
    }
}

#[test]
fn stability_experiment_classifies_perturbations() {
    let cubic = CombinedPower::cubic();
    let grid = Grid::new(40.0, 256).unwrap();
    let cfg = StabilityConfig { t_final: 10.0, dt: 2e-3, record_every: 50, ..StabilityConfig::default() };
    let perturbations = [
        Perturbation { kind: PerturbationKind::Amplitude, eps: 0.0 },
        Perturbation { kind: PerturbationKind::Amplitude, eps: 0.01 },
        Perturbation { kind: PerturbationKind::Noise, eps: 0.01 },
        Perturbation { kind: PerturbationKind::PhaseRamp, eps: 0.05 },
    ];
    let report = stability_experiment(&cubic, 4.0, &perturbations, &grid, &cfg).unwrap();
    assert!((report.omega - 1.0).abs() < 1e-6);
    let e = &report.entries;
    assert!(e[0].sup_dist < 1e-3 && e[0].ratio.is_none() && e[0].verdict == StabilityVerdict::Bounded);
    assert_eq!(e[1].verdict, StabilityVerdict::Bounded);
    assert_eq!(e[2].verdict, StabilityVerdict::Bounded);
    assert_eq!(e[3].verdict, StabilityVerdict::ExpectedGrowth);
    // The boosted soliton is a moving copy of the profile, so its distance to the orbit stays put.
    assert!((e[3].ratio.unwrap() - 1.0).abs() < 1e-3);
    let json = serde_json::to_value(&report).unwrap();
    for key in ["eps", "kind", "sup_dist", "ratio"] {
        assert!(json["entries"][1].get(key).is_some(), "{key}");
    }
}

#[test]
fn i_curve_shape() {
    let cubic = CombinedPower::cubic();
    let grid = Grid::new(40.0, 1024).unwrap();
    let lambdas = [1.0, 1.5, 2.0, 3.0, 4.0];
    let curve = i_curve(&cubic, &lambdas, &grid, &MinimizeOptions::default()).unwrap();
    assert_eq!(curve.lambda_star, 0.0);
    assert!(curve.rows.iter().all(|r| r.energy <= 1e-9 && r.error.is_none()));
    let ratios: Vec<f64> = curve.rows.iter().map(|r| r.energy / r.lambda).collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
    // I(θλ) ≤ θ I(λ) for θ ∈ {1.5, 2}.
    let i = |lambda: f64| curve.rows.iter().find(|r| r.lambda == lambda).unwrap().energy;
    for (base, theta) in [(1.0, 1.5), (1.0, 2.0), (2.0, 1.5), (2.0, 2.0)] {
        assert!(i(theta * base) <= theta * i(base) + 1e-6);
    }
}

#[test]
fn combined_power_minimizer_matches_quadrature_profile() {
    let cp = CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap();
    let grid = Grid::new(60.0, 2048).unwrap();
    let res = minimize_energy(&cp, 2.0, &grid, &MinimizeOptions::default()).unwrap();
    assert!(res.converged && res.omega > 0.0 && res.energy < 0.0);
    let mismatch = cross_validate(&res, &cp).unwrap();
    assert!(mismatch < 1e-2, "{mismatch}");
}
