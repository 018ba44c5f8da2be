use std::sync::Arc;

use super::{HypothesisParams, Nonlinearity};
use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitSide {
    /// `G₁′ = σG′`, carrying the behaviour near the origin.
    Inner,
    /// `G₂′ = (1 − σ)G′`, carrying the behaviour at infinity.
    Outer,
}

/// One half of the splitting `G = G₁ + G₂` by a piecewise-linear cutoff
/// `σ` equal to 1 on `[−r1, r1]` and 0 outside `[−r2, r2]`.
#[derive(Clone, Debug)]
pub struct SplitPart {
    base: Arc<dyn Nonlinearity>,
    r1: f64,
    r2: f64,
    side: SplitSide,
    /// `∫_{r1}^{r2} G / (r2 − r1)`, the constant value of `G₁` beyond `r2`.
    inner_limit: f64,
}

pub fn split_g(base: Arc<dyn Nonlinearity>, r1: f64, r2: f64) -> Result<(SplitPart, SplitPart)> {
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(Error::domain(format!("split radii must satisfy 0 < r1 < r2, got ({r1}, {r2})")));
    }
    let inner_limit = integrate_g(base.as_ref(), r1, r2) / (r2 - r1);
    let make = |side| SplitPart { base: base.clone(), r1, r2, side, inner_limit };
    Ok((make(SplitSide::Inner), make(SplitSide::Outer)))
}

fn integrate_g(g: &dyn Nonlinearity, lo: f64, hi: f64) -> f64 {
    let scale = g.g(lo).abs().max(g.g(hi).abs()).max(1e-300);
    quadrature::integrate(|t| g.g(t), lo, hi, 1e-15 * scale * (hi - lo), 1e-14)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

impl SplitPart {
    pub fn side(&self) -> SplitSide {
        self.side
    }

    pub fn cutoff(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.r1 {
            1.0
        } else if s >= self.r2 {
            0.0
        } else {
            (self.r2 - s) / (self.r2 - self.r1)
        }
    }

    fn cutoff_slope(&self, s: f64) -> f64 {
        let s = s.abs();
        if s > self.r1 && s < self.r2 {
            -1.0 / (self.r2 - self.r1)
        } else {
            0.0
        }
    }

    fn inner_g(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.r1 {
            self.base.g(s)
        } else if s >= self.r2 {
            self.inner_limit
        } else {
            // ∫_0^s σG′ integrated by parts on (r1, s).
            self.cutoff(s) * self.base.g(s) + integrate_g(self.base.as_ref(), self.r1, s) / (self.r2 - self.r1)
        }
    }
}

impl Nonlinearity for SplitPart {
    fn g(&self, s: f64) -> f64 {
        match self.side {
            SplitSide::Inner => self.inner_g(s),
            SplitSide::Outer => self.base.g(s) - self.inner_g(s),
        }
    }

    fn dg(&self, s: f64) -> f64 {
        let sigma = self.cutoff(s);
        match self.side {
            SplitSide::Inner => sigma * self.base.dg(s),
            SplitSide::Outer => (1.0 - sigma) * self.base.dg(s),
        }
    }

    fn d2g(&self, s: f64) -> Option<f64> {
        let d2 = self.base.d2g(s)?;
        // σ is only piecewise smooth; this is the one-sided value at the kinks.
        let inner = self.cutoff(s) * d2 + self.cutoff_slope(s) * s.signum() * self.base.dg(s);
        Some(match self.side {
            SplitSide::Inner => inner,
            SplitSide::Outer => d2 - inner,
        })
    }

    fn hypotheses(&self) -> HypothesisParams {
        let h = self.base.hypotheses();
        let c = 2f64.powf(h.q - h.p + 1.0) * h.c;
        match self.side {
            SplitSide::Inner => HypothesisParams { q: h.p, c, ..h },
            SplitSide::Outer => HypothesisParams { p: h.q, c, ..h },
        }
    }
}
