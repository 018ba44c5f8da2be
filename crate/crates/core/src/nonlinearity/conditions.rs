use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{eval_dv, eval_l, CombinedPower, Nonlinearity};
use crate::error::{Error, Result};
use crate::profile::r_star;

const G1_POINTS: usize = 512;
const G3_POINTS: usize = 256;
const G3_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub verdict: Verdict,
    pub witness: BTreeMap<String, f64>,
}

impl ConditionEntry {
    fn new(verdict: Verdict, witness: &[(&str, f64)]) -> Self {
        Self { verdict, witness: witness.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub g1: ConditionEntry,
    pub g2: ConditionEntry,
    pub g3: ConditionEntry,
    pub g4: ConditionEntry,
    pub g5: ConditionEntry,
}

impl ConditionReport {
    pub fn entries(&self) -> [(&'static str, &ConditionEntry); 5] {
        [("G1", &self.g1), ("G2", &self.g2), ("G3", &self.g3), ("G4", &self.g4), ("G5", &self.g5)]
    }

    pub fn any_fail(&self) -> bool {
        self.entries().iter().any(|(_, e)| e.verdict == Verdict::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, e)| e.verdict == Verdict::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Samples the hypotheses on a combined power nonlinearity. G3 and G5 are
/// checked on `n_samples` equally spaced frequencies of `omega_range` that
/// carry a transversal amplitude.
pub fn check_conditions(nl: &CombinedPower, omega_range: (f64, f64), n_samples: usize) -> Result<ConditionReport> {
    let (lo, hi) = omega_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n_samples < 2 {
        return Err(Error::domain(format!(
            "need 0 < ω_lo ≤ ω_hi and at least two samples (got [{lo}, {hi}], {n_samples})"
        )));
    }

    let g1 = {
        let step = 8f64.ln() * std::f64::consts::LN_10 / (G1_POINTS - 1) as f64;
        let witness = (0..G1_POINTS)
            .map(|i| (-4.0 * std::f64::consts::LN_10 + step * i as f64).exp())
            .find(|&s| nl.g(s) < 0.0);
        match witness {
            Some(s0) => ConditionEntry::new(Verdict::Pass, &[("s0", s0), ("g_s0", nl.g(s0))]),
            None => ConditionEntry::new(Verdict::Fail, &[("s_min", 1e-4), ("s_max", 1e4), ("g_s_min", nl.g(1e-4))]),
        }
    };

    let hyp = nl.hypotheses();
    let g2 = if nl.a > 0.0 && hyp.p_star >= 6.0 {
        ConditionEntry::new(Verdict::Fail, &[("exponent", hyp.p_star)])
    } else {
        ConditionEntry::new(
            Verdict::Pass,
            &[("p", hyp.p), ("q", hyp.q), ("p_star", hyp.p_star), ("s_star", hyp.s_star), ("c", hyp.c)],
        )
    };
    // |G″| ≤ C(s^{p−2} + s^{q−2}) holds for every combined power with q ≥ p > 2.
    let g4 = ConditionEntry::new(Verdict::Pass, &[("p", hyp.p), ("q", hyp.q), ("c", hyp.c)]);

    let omegas: Vec<f64> = (0..n_samples).map(|i| lo + (hi - lo) * i as f64 / (n_samples - 1) as f64).collect();
    let amplitudes: Vec<Option<f64>> = omegas.iter().map(|&w| r_star(nl, w).ok()).collect();

    let (g3, g5) = if amplitudes.iter().all(Option::is_none) {
        let w = [("omega_lo", lo), ("omega_hi", hi)];
        (ConditionEntry::new(Verdict::NotChecked, &w), ConditionEntry::new(Verdict::NotChecked, &w))
    } else {
        (check_g3(nl, &omegas, &amplitudes)?, check_g5(nl, &omegas, &amplitudes)?)
    };

    Ok(ConditionReport { g1, g2, g3, g4, g5 })
}

fn check_g3(nl: &CombinedPower, omegas: &[f64], amplitudes: &[Option<f64>]) -> Result<ConditionEntry> {
    let mut min_l = f64::INFINITY;
    let mut arg = (f64::NAN, f64::NAN);
    let mut violation = None;
    for (&omega, amp) in omegas.iter().zip(amplitudes) {
        let Some(rs) = *amp else { continue };
        for k in 1..=G3_POINTS {
            let s = rs * k as f64 / G3_POINTS as f64;
            let l = eval_l(nl, s)?;
            if l < min_l {
                min_l = l;
                arg = (omega, s);
            }
            if violation.is_none() && l < -G3_TOL * (1.0 + s.powf(nl.q)) {
                violation = Some((omega, s, l));
            }
        }
    }
    Ok(match violation {
        Some((omega, s, l)) => ConditionEntry::new(
            Verdict::Fail,
            &[("omega", omega), ("s", s), ("l", l), ("min_l", min_l)],
        ),
        None => ConditionEntry::new(Verdict::Pass, &[("min_l", min_l), ("omega_at_min", arg.0), ("s_at_min", arg.1)]),
    })
}

fn check_g5(nl: &CombinedPower, omegas: &[f64], amplitudes: &[Option<f64>]) -> Result<ConditionEntry> {
    let mut members = Vec::new();
    for (i, amp) in amplitudes.iter().enumerate() {
        if let Some(rs) = *amp {
            if eval_dv(nl, rs)? > 0.0 {
                members.push(i);
            }
        }
    }
    let first = members[0];
    let last = *members.last().unwrap();
    let base = [
        ("omega_lo", omegas[0]),
        ("omega_hi", *omegas.last().unwrap()),
        ("set_lo", omegas[first]),
        ("set_hi", omegas[last]),
    ];
    if let Some(gap) = (first..=last).find(|i| !members.contains(i)) {
        let mut w = base.to_vec();
        w.push(("gap_omega", omegas[gap]));
        Ok(ConditionEntry::new(Verdict::Fail, &w))
    } else {
        Ok(ConditionEntry::new(Verdict::Pass, &base))
    }
}
