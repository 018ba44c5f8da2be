//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        finite &= pair.is_finite();
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{lo}, {hi}]")));
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Integrates `f` over `[lo, hi]` until the estimated error is below
/// `max(abs_tol, rel_tol·|value|)`. The integrand is never evaluated at
/// the endpoints, so integrable endpoint behaviour that is finite in the
/// interior is acceptable.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    if lo == hi {
        return Ok(Integral { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let (value, error) = kronrod15(&mut f, lo, hi)?;
    let mut segments = vec![Segment { lo, hi, value, error }];
    let mut evaluations = 15;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral { value: total, abs_error: total_err, evaluations });
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureFailure(format!(
                "no convergence after {MAX_SEGMENTS} segments (error estimate {total_err:e})"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval exhausted at machine resolution; accept what we have.
            segments.push(seg);
            let total: f64 = segments.iter().map(|s| s.value).sum();
            let total_err: f64 = segments.iter().map(|s| s.error).sum();
            return Ok(Integral { value: total, abs_error: total_err, evaluations });
        }
        let (v1, e1) = kronrod15(&mut f, seg.lo, mid)?;
        let (v2, e2) = kronrod15(&mut f, mid, seg.hi)?;
        evaluations += 30;
        segments.push(Segment { lo: seg.lo, hi: mid, value: v1, error: e1 });
        segments.push(Segment { lo: mid, hi: seg.hi, value: v2, error: e2 });
    }
}

const GL8_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Eight-point Gauss-Legendre rule on `[mid − half, mid + half]`. Taking
/// the midpoint and half-width directly keeps short intervals exact.
pub fn gauss_legendre8<F: Fn(f64) -> f64>(f: F, mid: f64, half: f64) -> f64 {
    let sum: f64 = GL8_X
        .iter()
        .zip(&GL8_W)
        .map(|(&x, &w)| w * (f(mid - half * x) + f(mid + half * x)))
        .sum();
    half * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_polynomials() {
        // The 15-point Kronrod rule integrates degree ≤ 23 exactly; a typo in a
        // node or weight breaks this immediately.
        for degree in 0..=23 {
            let (v, _) = kronrod15(&mut |x: f64| x.powi(degree), 0.0, 1.0).unwrap();
            let exact = 1.0 / (degree as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "degree {degree}: {v} vs {exact}");
        }
        // Gauss 7-point is exact to degree 13, so the error estimate vanishes there.
        let (_, err) = kronrod15(&mut |x: f64| x.powi(13), -1.0, 2.0).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_to_degree_15() {
        for degree in 0..=15 {
            let v = gauss_legendre8(|x| x.powi(degree), 0.5, 0.5);
            assert!((v - 1.0 / (degree as f64 + 1.0)).abs() < 1e-15, "degree {degree}");
        }
        let tiny = gauss_legendre8(|x| x * x, 1.0 - 1e-20, 1e-20);
        assert!((tiny - 2e-20).abs() < 1e-34);
    }

    #[test]
    fn inverse_square_root_endpoint() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn smooth_integrals() {
        let r = integrate(|x| x.cos(), 0.0, std::f64::consts::FRAC_PI_2, 1e-14, 1e-14).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn non_finite_is_reported() {
        assert!(matches!(
            integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-10, 1e-10),
            Err(Error::QuadratureFailure(_))
        ));
    }
}
