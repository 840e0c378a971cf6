//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute tolerance used by the closed-form constants.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::of(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::of(WGK[7]);
    let mut gauss = fc * T::of(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = radius * T::of(x);
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * T::of(w);
        if j % 2 == 1 {
            gauss += pair * T::of(WG[j / 2]);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * radius,
        error: ((kronrod - gauss) * radius).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The tolerance is floored at a few hundred ulps of the running result so the
/// same call is meaningful for `f32`.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        let floor = T::epsilon() * T::of(200.0) * value.abs();
        if error <= tol.max(floor) {
            return Ok(value);
        }
        if segments.len() >= MAX_SEGMENTS || !error.is_finite() {
            return Err(Error::QuadratureFailed {
                tolerance: tol.f64(),
                estimate: error.f64(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = T::of(0.5) * (s.a + s.b);
        segments.push(kronrod(&f, s.a, mid));
        segments.push(kronrod(&f, mid, s.b));
    }
}

/// `∫_0^upper smooth(t) · t^(2H−2) dt` for `H ∈ (1/2, 1)`.
///
/// On `[0, min(1, upper)]` the substitution `u = t^(2H−1)` removes the
/// endpoint singularity (`t^(2H−2) dt = du / (2H−1)`); the remainder is smooth.
pub fn integrate_power_singular<T: Scalar, F: Fn(T) -> T>(
    smooth: F,
    hurst: T,
    upper: T,
    tol: T,
) -> Result<T> {
    let one = T::one();
    let gamma = T::of(2.0) * hurst - one;
    if gamma <= T::zero() {
        return Err(Error::invalid("hurst", "greater than 1/2 for the singular weight", hurst.f64()));
    }
    let split = upper.min(one);
    let inv = one / gamma;
    let head = integrate(
        |u: T| smooth(u.powf(inv)),
        T::zero(),
        split.powf(gamma),
        tol * gamma * T::of(0.5),
    )? * inv;
    let tail = if upper > one {
        let exponent = gamma - one;
        integrate(|t: T| smooth(t) * t.powf(exponent), one, upper, tol * T::of(0.5))?
    } else {
        T::zero()
    };
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!(v.abs() < 1e-11);
        let v = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn singular_weight_matches_incomplete_gamma() {
        // ∫_0^∞ e^{-t} t^{2H-2} dt = Γ(2H-1); truncate far out.
        for &h in &[0.55f64, 0.6, 0.75] {
            let v = integrate_power_singular(|t: f64| (-t).exp(), h, 60.0, 1e-12).unwrap();
            let exact = statrs::function::gamma::gamma(2.0 * h - 1.0);
            assert!((v - exact).abs() < 1e-9, "h={h}: {v} vs {exact}");
        }
    }

    #[test]
    fn singular_weight_below_one() {
        // ∫_0^{1/2} t^{2H-2} dt = (1/2)^{2H-1}/(2H-1)
        let h = 0.6f64;
        let v = integrate_power_singular(|_| 1.0, h, 0.5, 1e-12).unwrap();
        let exact = 0.5f64.powf(0.2) / 0.2;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn rejects_hurst_half() {
        assert!(integrate_power_singular(|t: f64| t, 0.5, 1.0, 1e-10).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let v = integrate(|x: f32| x.exp(), 0.0f32, 1.0, 1e-10).unwrap();
        assert!((v - (1f32.exp() - 1.0)).abs() < 1e-5);
    }
}
