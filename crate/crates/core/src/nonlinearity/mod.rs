//! The nonlinear potential `G` and the scalar functions built from it.
//!
//! Every nonlinearity is evaluated through its even extension,
//! `G(−s) = G(s)`, so `G′` is odd and `G″` is even.

mod conditions;
mod split;

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::conditions::{check_conditions, ConditionEntry, ConditionReport, Verdict};
pub use self::split::{split_g, SplitPart, SplitSide};

/// Exponents and constants entering the growth hypotheses on `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub p: f64,
    pub q: f64,
    pub p_star: f64,
    pub s_star: f64,
    pub c: f64,
}

pub trait Nonlinearity: Send + Sync + fmt::Debug {
    /// `G(s)`, even in `s`, with `G(0) = 0`.
    fn g(&self, s: f64) -> f64;

    /// `G′(s)`, odd in `s`.
    fn dg(&self, s: f64) -> f64;

    /// `G″(s)` when the nonlinearity provides a second derivative.
    fn d2g(&self, s: f64) -> Option<f64>;

    /// `G′(s)/s` for `s ≥ 0`, the pointwise phase velocity of the
    /// nonlinear sub-flow. Zero at the origin since `F′(0) = 0`.
    fn dg_over_s(&self, s: f64) -> f64 {
        let s = s.abs();
        if s < 1e-15 {
            0.0
        } else {
            self.dg(s) / s
        }
    }

    fn hypotheses(&self) -> HypothesisParams;
}

impl<T: Nonlinearity + ?Sized> Nonlinearity for &T {
    fn g(&self, s: f64) -> f64 {
        (**self).g(s)
    }
    fn dg(&self, s: f64) -> f64 {
        (**self).dg(s)
    }
    fn d2g(&self, s: f64) -> Option<f64> {
        (**self).d2g(s)
    }
    fn dg_over_s(&self, s: f64) -> f64 {
        (**self).dg_over_s(s)
    }
    fn hypotheses(&self) -> HypothesisParams {
        (**self).hypotheses()
    }
}

impl<T: Nonlinearity + ?Sized> Nonlinearity for Arc<T> {
    fn g(&self, s: f64) -> f64 {
        (**self).g(s)
    }
    fn dg(&self, s: f64) -> f64 {
        (**self).dg(s)
    }
    fn d2g(&self, s: f64) -> Option<f64> {
        (**self).d2g(s)
    }
    fn dg_over_s(&self, s: f64) -> f64 {
        (**self).dg_over_s(s)
    }
    fn hypotheses(&self) -> HypothesisParams {
        (**self).hypotheses()
    }
}

/// `G(s) = −a|s|^p + b|s|^q`.
///
/// `a = 1/4, b = 0, p = 4` is the cubic NLS (`f(u) = −|u|²u`), whose
/// solitons are `√(2ω) sech(√ω x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedPower {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
}

impl CombinedPower {
    /// Requires `a, b ≥ 0`, `p > 2` and `q ≥ p` (`q > p` when both terms are
    /// present).
    /// Subcriticality `p < 6` is a hypothesis, checked by
    /// [`check_conditions`], not a construction invariant.
    pub fn new(a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        let all_finite = [a, b, p, q].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::domain("combined power coefficients must be finite"));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::domain(format!("coefficients must be non-negative (a = {a}, b = {b})")));
        }
        if p <= 2.0 {
            return Err(Error::domain(format!("exponent p = {p} must exceed 2")));
        }
        if q < p || (a > 0.0 && b > 0.0 && q == p) {
            return Err(Error::domain(format!("exponent q = {q} must exceed p = {p}")));
        }
        Ok(Self { a, b, p, q })
    }

    /// Pure power `−a|s|^p`.
    pub fn pure(a: f64, p: f64) -> Result<Self> {
        Self::new(a, 0.0, p, p)
    }

    /// The cubic NLS, `G(s) = −s⁴/4`.
    pub fn cubic() -> Self {
        Self { a: 0.25, b: 0.0, p: 4.0, q: 4.0 }
    }

    /// Closed form of `L(s) = a(p−2)(6−p)s^p − b(q−2)(6−q)s^q`.
    pub fn l_closed_form(&self, s: f64) -> f64 {
        let s = s.abs();
        let Self { a, b, p, q } = *self;
        a * (p - 2.0) * (6.0 - p) * s.powf(p) - b * (q - 2.0) * (6.0 - q) * s.powf(q)
    }

    /// Location of the maximum of `V(s) = 2a s^{p−2} − 2b s^{q−2}`, when
    /// `b > 0`.
    pub fn v_argmax(&self) -> Option<f64> {
        if self.b > 0.0 && self.a > 0.0 {
            let ratio = self.a * (self.p - 2.0) / (self.b * (self.q - 2.0));
            Some(ratio.powf(1.0 / (self.q - self.p)))
        } else {
            None
        }
    }

    /// Supremum of the admissible frequencies, `sup V`. `None` means
    /// unbounded (pure focusing power), `Some(0)` that no frequency is
    /// admissible.
    pub fn omega_sup(&self) -> Option<f64> {
        if self.a == 0.0 {
            return Some(0.0);
        }
        self.v_argmax().map(|s| -2.0 * self.g(s) / (s * s))
    }
}

impl Nonlinearity for CombinedPower {
    fn g(&self, s: f64) -> f64 {
        let s = s.abs();
        -self.a * s.powf(self.p) + self.b * s.powf(self.q)
    }

    fn dg(&self, s: f64) -> f64 {
        s * self.dg_over_s(s)
    }

    fn d2g(&self, s: f64) -> Option<f64> {
        let s = s.abs();
        let Self { a, b, p, q } = *self;
        Some(-a * p * (p - 1.0) * s.powf(p - 2.0) + b * q * (q - 1.0) * s.powf(q - 2.0))
    }

    fn dg_over_s(&self, s: f64) -> f64 {
        let s = s.abs();
        let Self { a, b, p, q } = *self;
        -a * p * s.powf(p - 2.0) + b * q * s.powf(q - 2.0)
    }

    fn hypotheses(&self) -> HypothesisParams {
        let Self { a, b, p, q } = *self;
        let c = [a * p, b * q, a * p * (p - 1.0), b * q * (q - 1.0)]
            .into_iter()
            .fold(0.0, f64::max);
        // With a defocusing top power G′ ≥ 0 beyond the crossover, so the
        // one-sided bound holds for any p* once s* is past it.
        let (p_star, s_star) = if b > 0.0 && q > p {
            let crossover = if a > 0.0 { (a * p / (b * q)).powf(1.0 / (q - p)) } else { 0.0 };
            (if p < 6.0 { p } else { 4.0 }, crossover)
        } else {
            (p, 0.0)
        };
        HypothesisParams { p, q, p_star, s_star, c }
    }
}

/// On-disk description of a nonlinearity:
/// `{"family":"combined_power","a":…,"b":…,"p":…,"q":…}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    CombinedPower {
        a: f64,
        #[serde(default)]
        b: f64,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
    },
}

impl NonlinearitySpec {
    pub fn combined_power(&self) -> Result<CombinedPower> {
        match *self {
            NonlinearitySpec::CombinedPower { a, b, p, q } => CombinedPower::new(a, b, p, q.unwrap_or(p)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl From<CombinedPower> for NonlinearitySpec {
    fn from(cp: CombinedPower) -> Self {
        NonlinearitySpec::CombinedPower { a: cp.a, b: cp.b, p: cp.p, q: Some(cp.q) }
    }
}

/// `F(s) = G(|s|)` for complex `s`.
pub fn eval_f<N: Nonlinearity + ?Sized>(nl: &N, s: Complex64) -> f64 {
    nl.g(s.norm())
}

/// `V(s) = −2G(s)/s²`.
pub fn eval_v<N: Nonlinearity + ?Sized>(nl: &N, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("V(s) requires s > 0, got {s}")));
    }
    Ok(-2.0 * nl.g(s) / (s * s))
}

/// `V′(s) = −2G′(s)/s² + 4G(s)/s³`.
pub fn eval_dv<N: Nonlinearity + ?Sized>(nl: &N, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("V′(s) requires s > 0, got {s}")));
    }
    Ok(-2.0 * nl.dg(s) / (s * s) + 4.0 * nl.g(s) / (s * s * s))
}

/// `Q(ω, s) = ωs² + 2G(s)`.
pub fn eval_q<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, s: f64) -> f64 {
    omega * s * s + 2.0 * nl.g(s)
}

/// `∂ₛQ(ω, s) = 2ωs + 2G′(s)`.
pub fn eval_dq<N: Nonlinearity + ?Sized>(nl: &N, omega: f64, s: f64) -> f64 {
    2.0 * omega * s + 2.0 * nl.dg(s)
}

/// `L(s) = 12G(s) − 7sG′(s) + s²G″(s)`.
pub fn eval_l<N: Nonlinearity + ?Sized>(nl: &N, s: f64) -> Result<f64> {
    let d2 = nl.d2g(s).ok_or(Error::Capability("a second derivative"))?;
    Ok(12.0 * nl.g(s) - 7.0 * s * nl.dg(s) + s * s * d2)
}

/// `H(s) = −6G(s) + sG′(s)`.
pub fn eval_h<N: Nonlinearity + ?Sized>(nl: &N, s: f64) -> f64 {
    -6.0 * nl.g(s) + s * nl.dg(s)
}

/// `F′(s) = G′(|s|) s/|s|`, with `F′(0) = 0`.
pub fn eval_f_grad<N: Nonlinearity + ?Sized>(nl: &N, s: Complex64) -> Complex64 {
    s * nl.dg_over_s(s.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn corpus() -> Vec<CombinedPower> {
        vec![
            CombinedPower::cubic(),
            CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap(),
            CombinedPower::new(0.7, 0.2, 2.5, 7.0).unwrap(),
            CombinedPower::pure(1.0 / 6.0, 6.0).unwrap(),
            CombinedPower::new(2.0, 0.5, 4.5, 5.5).unwrap(),
        ]
    }

    #[test]
    fn v_examples() {
        let cubic = CombinedPower::cubic();
        assert!((eval_v(&cubic, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((eval_v(&cubic, SQRT2).unwrap() - 1.0).abs() < 1e-15);
        for nl in corpus() {
            let s = 1e-12;
            let v = eval_v(&nl, s).unwrap();
            let bound = 2.0 * (nl.a + nl.b) * s.powf(nl.p - 2.0) * (1.0 + 1e-12);
            assert!(v.abs() <= bound, "{nl:?}: V({s}) = {v}");
        }
        assert!(matches!(eval_v(&cubic, 0.0), Err(Error::Domain(_))));
        assert!(eval_v(&cubic, -1.0).is_err());
    }

    #[test]
    fn q_and_h_examples() {
        let cubic = CombinedPower::cubic();
        assert!(eval_q(&cubic, 1.0, SQRT2).abs() < 1e-15);
        assert_eq!(eval_q(&cubic, 3.0, 0.0), 0.0);
        assert!((eval_q(&cubic, 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((eval_h(&cubic, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(eval_h(&cubic, 0.0), 0.0);
        assert!((eval_h(&cubic, SQRT2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn l_examples() {
        let cubic = CombinedPower::cubic();
        assert!((eval_l(&cubic, 2.0).unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(eval_l(&cubic, 0.0).unwrap(), 0.0);
        let q6 = CombinedPower::new(0.8, 1.3, 3.5, 6.0).unwrap();
        for s in [0.1, 0.5, 1.0, 2.0, 3.7] {
            let expected = 0.8 * 1.5 * 2.5 * f64::powf(s, 3.5);
            let got = eval_l(&q6, s).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "s = {s}");
        }
    }

    #[test]
    fn l_closed_form_matches_generic() {
        for nl in corpus() {
            for i in 1..200 {
                let s = 0.02 * i as f64;
                let generic = eval_l(&nl, s).unwrap();
                let closed = nl.l_closed_form(s);
                // L is a difference of terms of size ~ 12|G| + 7|sG′| + |s²G″|.
                let scale = 12.0 * nl.g(s).abs() + 7.0 * (s * nl.dg(s)).abs() + (s * s * nl.d2g(s).unwrap()).abs();
                assert!((generic - closed).abs() <= 1e-12 * scale.max(1e-300), "{nl:?} s={s}: {generic} vs {closed}");
            }
        }
    }

    #[test]
    fn l_vanishes_for_critical_sextic() {
        let sextic = CombinedPower::pure(0.3, 6.0).unwrap();
        for i in 0..50 {
            let s = 0.1 * i as f64;
            let scale = 1.0 + 12.0 * sextic.g(s).abs();
            assert!(eval_l(&sextic, s).unwrap().abs() < 1e-13 * scale);
        }
    }

    #[test]
    fn f_grad_examples() {
        let cubic = CombinedPower::cubic();
        let one = eval_f_grad(&cubic, Complex64::new(1.0, 0.0));
        assert!((one - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(eval_f_grad(&cubic, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let i = eval_f_grad(&cubic, Complex64::new(0.0, 1.0));
        assert!((i - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn even_extension() {
        for nl in corpus() {
            assert_eq!(nl.g(0.0), 0.0);
            for s in [0.1, 0.7, 1.3, 4.0] {
                assert_eq!(nl.g(s), nl.g(-s));
                assert_eq!(nl.dg(s), -nl.dg(-s));
                assert_eq!(nl.d2g(s), nl.d2g(-s));
            }
        }
    }

    #[test]
    fn derivative_consistency() {
        for nl in corpus() {
            for i in 1..60 {
                let s = 0.05 * i as f64 + 0.013;
                let eps = 1e-5 * s.max(1.0);
                let fd1 = (nl.g(s + eps) - nl.g(s - eps)) / (2.0 * eps);
                let fd2 = (nl.dg(s + eps) - nl.dg(s - eps)) / (2.0 * eps);
                let d1 = nl.dg(s);
                let d2 = nl.d2g(s).unwrap();
                assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-3), "{nl:?} G′({s}): {fd1} vs {d1}");
                assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1e-3), "{nl:?} G″({s}): {fd2} vs {d2}");
            }
        }
    }

    #[test]
    fn q_v_relation() {
        for nl in corpus() {
            for i in 1..40 {
                let s = 0.1 * i as f64;
                for omega in [0.1, 1.0, 3.0] {
                    let q = eval_q(&nl, omega, s);
                    let via_v = s * s * (omega - eval_v(&nl, s).unwrap());
                    let scale = omega * s * s + 2.0 * nl.g(s).abs();
                    assert!((q - via_v).abs() <= 4.0 * f64::EPSILON * scale);
                }
            }
        }
    }

    #[test]
    fn h_l_relation() {
        // H′(s)s − 2H(s) = L(s), with H′ from central differences.
        for nl in corpus() {
            for i in 1..40 {
                let s = 0.07 * i as f64;
                let eps = 1e-5 * s.max(1.0);
                let dh = (eval_h(&nl, s + eps) - eval_h(&nl, s - eps)) / (2.0 * eps);
                let lhs = dh * s - 2.0 * eval_h(&nl, s);
                let l = eval_l(&nl, s).unwrap();
                let scale = 12.0 * nl.g(s).abs() + 7.0 * (s * nl.dg(s)).abs() + 1e-3;
                assert!((lhs - l).abs() <= 1e-6 * scale, "{nl:?} s={s}: {lhs} vs {l}");
            }
        }
    }

    #[test]
    fn growth_bounds_hold() {
        for nl in corpus() {
            let h = nl.hypotheses();
            for i in 0..400 {
                let s = 0.025 * i as f64;
                let bound1 = h.c * (s.powf(h.p - 1.0) + s.powf(h.q - 1.0));
                let bound2 = h.c * (s.powf(h.p - 2.0) + s.powf(h.q - 2.0));
                assert!(nl.dg(s).abs() <= bound1 * (1.0 + 1e-12));
                assert!(nl.d2g(s).unwrap().abs() <= bound2 * (1.0 + 1e-12));
                // |F′(s)| = |G′(|s|)|
                let z = Complex64::from_polar(s, 0.3 * i as f64);
                assert!((eval_f_grad(&nl, z).norm() - nl.dg(s).abs()).abs() <= 1e-12 * bound1.max(1e-300));
            }
        }
    }

    #[test]
    fn rejects_invalid_coefficients() {
        assert!(CombinedPower::new(-1.0, 0.0, 4.0, 4.0).is_err());
        assert!(CombinedPower::new(1.0, 0.0, 2.0, 2.0).is_err());
        assert!(CombinedPower::new(1.0, 1.0, 4.0, 4.0).is_err());
        assert!(CombinedPower::new(1.0, 1.0, 4.0, 3.0).is_err());
        assert!(CombinedPower::new(f64::NAN, 1.0, 4.0, 5.0).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = NonlinearitySpec::from_json(r#"{"family":"combined_power","a":1,"b":1,"p":3,"q":5}"#).unwrap();
        assert_eq!(spec.combined_power().unwrap(), CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap());
        let pure = NonlinearitySpec::from_json(r#"{"family":"combined_power","a":0.25,"p":4}"#).unwrap();
        assert_eq!(pure.combined_power().unwrap(), CombinedPower::cubic());
        assert!(NonlinearitySpec::from_json(r#"{"family":"saturable","a":1}"#).is_err());
    }

    #[test]
    fn omega_sup_for_combined() {
        let nl = CombinedPower::new(1.0, 1.0, 3.0, 5.0).unwrap();
        let s = nl.v_argmax().unwrap();
        assert!((s - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((nl.omega_sup().unwrap() - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-14);
        assert_eq!(CombinedPower::cubic().omega_sup(), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gauge_covariance(re in -3.0..3.0f64, im in -3.0..3.0f64, phase in 0.0..std::f64::consts::TAU,
                                a in 0.1..2.0f64, b in 0.0..2.0f64, p in 2.1..5.9f64, dq in 0.1..3.0f64) {
                let nl = CombinedPower::new(a, b, p, p + dq).unwrap();
                let s = Complex64::new(re, im);
                let z = Complex64::from_polar(1.0, phase);
                let lhs = eval_f_grad(&nl, z * s);
                let rhs = z * eval_f_grad(&nl, s);
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            }
        }
    }
}
