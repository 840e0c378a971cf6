//! Closed-form constants of the fOU least-squares estimator and the
//! Berry–Esséen rate exponents.
//!
//! `H = 1/2` and `H = 3/4` are handled by dedicated branches: at `H = 1/2`
//! every `α_H`-weighted integral degenerates to its Lebesgue form, and at
//! `H = 3/4` the generic `σ²_H` formula diverges.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_power_singular, DEFAULT_TOLERANCE};
use crate::scalar::Scalar;

/// Loss allowed in the `H = 5/8` exponent `3/8 − ε` when the caller has no opinion.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Drift `θ`, Hurst index `H` and horizon `T` of `dX = −θX dt + dB^H`, `X_0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    theta: T,
    hurst: T,
    horizon: T,
}

pub(crate) fn check_hurst<T: Scalar>(hurst: T) -> Result<()> {
    if hurst >= T::of(0.5) && hurst <= T::of(0.75) {
        Ok(())
    } else {
        Err(Error::HurstOutOfRange(hurst.f64()))
    }
}

pub(crate) fn is_half<T: Scalar>(hurst: T) -> bool {
    hurst == T::of(0.5)
}

pub(crate) fn is_three_quarters<T: Scalar>(hurst: T) -> bool {
    hurst == T::of(0.75)
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(theta: T, hurst: T, horizon: T) -> Result<Self> {
        if !(theta > T::zero() && theta.is_finite()) {
            return Err(Error::invalid("theta", "positive and finite", theta.f64()));
        }
        check_hurst(hurst)?;
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::invalid("horizon", "positive and finite", horizon.f64()));
        }
        Ok(Self {
            theta,
            hurst,
            horizon,
        })
    }

    pub fn with_horizon(&self, horizon: T) -> Result<Self> {
        Self::new(self.theta, self.hurst, horizon)
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// `T` for `H < 3/4`, `T ln T` at `H = 3/4`: the variance scale of
    /// `θ̂_T − θ` that the normalized statistic divides out.
    pub fn normalizing_horizon(&self) -> T {
        if is_three_quarters(self.hurst) {
            self.horizon * self.horizon.ln()
        } else {
            self.horizon
        }
    }
}

/// `α_H = H(2H − 1)`.
pub fn alpha_h<T: Scalar>(hurst: T) -> Result<T> {
    check_hurst(hurst)?;
    Ok(hurst * (T::of(2.0) * hurst - T::one()))
}

pub(crate) fn gamma<T: Scalar>(x: T) -> T {
    T::of(libm::tgamma(x.f64()))
}

/// Asymptotic variance factor `σ²_H` of `√T(θ̂_T − θ)/√θ`.
pub fn sigma2_h<T: Scalar>(hurst: T) -> Result<T> {
    check_hurst(hurst)?;
    if is_three_quarters(hurst) {
        return Ok(T::of(4.0) * T::FRAC_1_PI());
    }
    let h = hurst;
    let four_h = T::of(4.0) * h;
    let two_h = T::of(2.0) * h;
    let ratio = gamma(T::of(3.0) - four_h) * gamma(four_h - T::one())
        / (gamma(two_h) * gamma(T::of(2.0) - two_h));
    Ok((four_h - T::one()) * (T::one() + ratio))
}

/// `δ_H`, the limit constant of `T‖g_T‖²` (up to `2θ^{1+4H}`).
pub fn delta_h<T: Scalar>(hurst: T) -> Result<T> {
    check_hurst(hurst)?;
    if is_three_quarters(hurst) {
        return Ok(T::of(9.0 / 16.0));
    }
    let h = hurst;
    let four_h = T::of(4.0) * h;
    let two_h = T::of(2.0) * h;
    let g2h = gamma(two_h);
    let cross = g2h * gamma(T::of(3.0) - four_h) * gamma(four_h - T::one()) / gamma(T::of(2.0) - two_h);
    Ok(h * h * (four_h - T::one()) * (g2h * g2h + cross))
}

/// `a = HΓ(2H)θ^{−2H}`, the stationary variance of the fOU process and the
/// limit of `b_T`.
pub fn stationary_variance<T: Scalar>(params: &ModelParams<T>) -> T {
    let h = params.hurst();
    h * gamma(T::of(2.0) * h) * params.theta().powf(-T::of(2.0) * h)
}

/// Berry–Esséen rate of the normalized estimator: `C/T^β`, or `C/ln T` at `H = 3/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateExponent<T> {
    Power { beta: T, epsilon: T },
    Logarithmic,
}

impl<T: Scalar> RateExponent<T> {
    pub fn beta(&self) -> Option<T> {
        match self {
            RateExponent::Power { beta, .. } => Some(*beta),
            RateExponent::Logarithmic => None,
        }
    }

    pub fn is_log_corrected(&self) -> bool {
        matches!(self, RateExponent::Logarithmic)
    }

    /// `C / T^β` or `C / ln T`.
    pub fn bound(&self, constant: T, horizon: T) -> T {
        match self {
            RateExponent::Power { beta, .. } => constant / horizon.powf(*beta),
            RateExponent::Logarithmic => constant / horizon.ln(),
        }
    }
}

/// `β = 1/2` on `[1/2, 5/8)`, `3/8 − ε` at `5/8`, `3 − 4H` on `(5/8, 3/4)`;
/// logarithmic at `3/4`. `epsilon` is only read at `H = 5/8`.
pub fn rate_exponent<T: Scalar>(hurst: T, epsilon: T) -> Result<RateExponent<T>> {
    check_hurst(hurst)?;
    let three_eighths = T::of(0.375);
    if !(epsilon >= T::zero() && epsilon < three_eighths) {
        return Err(Error::invalid("epsilon", "in [0, 3/8)", epsilon.f64()));
    }
    let five_eighths = T::of(0.625);
    let rate = if is_three_quarters(hurst) {
        RateExponent::Logarithmic
    } else if hurst < five_eighths {
        RateExponent::Power {
            beta: T::of(0.5),
            epsilon: T::zero(),
        }
    } else if hurst == five_eighths {
        RateExponent::Power {
            beta: three_eighths - epsilon,
            epsilon,
        }
    } else {
        RateExponent::Power {
            beta: T::of(3.0) - T::of(4.0) * hurst,
            epsilon: T::zero(),
        }
    };
    Ok(rate)
}

/// `b_T = (1/T) ∫_0^T ‖e^{−θ(t−·)} 1_{[0,t]}‖²_ℍ dt` in closed form.
///
/// For `H > 1/2` this is
/// `(α_H/θ) ∫_0^T t^{2H−2} [e^{−θt}(1 − (1+2θt)/(2θT)) + e^{−θ(2T−t)}/(2θT)] dt`,
/// evaluated by adaptive quadrature with the `t^{2H−2}` endpoint singularity
/// removed by substitution.
pub fn b_t_closed_form<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let theta = params.theta();
    let horizon = params.horizon();
    let two = T::of(2.0);
    if is_half(params.hurst()) {
        let decay = -(-two * theta * horizon).exp_m1();
        return Ok(T::one() / (two * theta) - decay / (T::of(4.0) * theta * theta * horizon));
    }
    let alpha = alpha_h(params.hurst())?;
    let two_theta_t = two * theta * horizon;
    let integrand = |t: T| {
        (-theta * t).exp() * (T::one() - (T::one() + two * theta * t) / two_theta_t)
            + (-theta * (two * horizon - t)).exp() / two_theta_t
    };
    let tol = T::of(DEFAULT_TOLERANCE) * theta / alpha;
    let integral = integrate_power_singular(integrand, params.hurst(), horizon, tol)?;
    Ok(alpha / theta * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma as gamma_oracle;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_h(0.5f64).unwrap(), 0.0);
        assert_relative_eq!(alpha_h(0.75f64).unwrap(), 0.375, epsilon = 1e-15);
        assert_relative_eq!(alpha_h(0.6f64).unwrap(), 0.12, epsilon = 1e-15);
        assert!(matches!(alpha_h(0.8f64), Err(Error::HurstOutOfRange(_))));
        assert!(alpha_h(0.49f64).is_err());
    }

    #[test]
    fn gamma_binding_reference_points() {
        assert_relative_eq!(gamma(1.0f64), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5f64), std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(2.0f64), 1.0, max_relative = 1e-14);
        for i in 1..=300 {
            let x = i as f64 * 0.01;
            assert_relative_eq!(gamma(x), gamma_oracle(x), max_relative = 1e-12);
        }
    }

    fn sigma2_oracle(h: f64) -> f64 {
        let g = gamma_oracle;
        (4.0 * h - 1.0) * (1.0 + g(3.0 - 4.0 * h) * g(4.0 * h - 1.0) / (g(2.0 * h) * g(2.0 - 2.0 * h)))
    }

    #[test]
    fn sigma2_examples() {
        assert_relative_eq!(sigma2_h(0.5f64).unwrap(), 2.0, max_relative = 1e-13);
        assert_relative_eq!(sigma2_h(0.75f64).unwrap(), 4.0 / std::f64::consts::PI, max_relative = 1e-15);
        // mpmath, 30 digits
        assert_relative_eq!(sigma2_h(0.6f64).unwrap(), 3.130_495_168_499_705_6, max_relative = 1e-12);
        assert_relative_eq!(sigma2_h(0.6f64).unwrap(), sigma2_oracle(0.6), max_relative = 1e-12);
        assert!(sigma2_h(0.76f64).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_relative_eq!(delta_h(0.5f64).unwrap(), 0.5, max_relative = 1e-13);
        assert_relative_eq!(delta_h(0.75f64).unwrap(), 0.5625, max_relative = 1e-15);
        assert_relative_eq!(delta_h(0.6f64).unwrap(), 0.950_080_810_139_634_4, max_relative = 1e-12);
        // shared-Γ identity at H = 1/2
        assert_relative_eq!(delta_h(0.5f64).unwrap(), sigma2_h(0.5f64).unwrap() / 4.0, max_relative = 1e-13);
    }

    #[test]
    fn stationary_variance_examples() {
        let p = |theta, h| ModelParams::new(theta, h, 1.0f64).unwrap();
        assert_relative_eq!(stationary_variance(&p(1.0, 0.5)), 0.5, max_relative = 1e-14);
        assert_relative_eq!(stationary_variance(&p(2.0, 0.75)), 0.234_996_400_746_656_3, max_relative = 1e-12);
        assert_relative_eq!(stationary_variance(&p(1.0, 0.75)), 0.664_670_194_089_568_5, max_relative = 1e-12);
        let oracle = 0.75 * gamma_oracle(1.5) * 2f64.powf(-1.5);
        assert_relative_eq!(stationary_variance(&p(2.0, 0.75)), oracle, max_relative = 1e-12);
    }

    #[test]
    fn rate_exponent_branches() {
        let r = rate_exponent(0.55f64, 0.01).unwrap();
        assert_eq!(r.beta(), Some(0.5));
        assert!(!r.is_log_corrected());
        let r = rate_exponent(0.7f64, 0.01).unwrap();
        assert_relative_eq!(r.beta().unwrap(), 0.2, epsilon = 1e-14);
        let r = rate_exponent(0.625f64, 0.01).unwrap();
        assert_relative_eq!(r.beta().unwrap(), 0.365, epsilon = 1e-15);
        let r = rate_exponent(0.75f64, 0.01).unwrap();
        assert!(r.is_log_corrected());
        assert_eq!(r.beta(), None);
        assert!(rate_exponent(0.9f64, 0.01).is_err());
        assert!(rate_exponent(0.6f64, -0.1).is_err());
    }

    #[test]
    fn rate_exponent_monotone_on_upper_branch() {
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let h = 0.625 + 0.125 * i as f64 / 50.0;
            let beta = rate_exponent(h, DEFAULT_EPSILON).unwrap().beta().unwrap();
            assert!(beta > 0.0 && beta <= 0.5);
            assert!(beta <= last);
            last = beta;
        }
    }

    #[test]
    fn b_t_elementary_branch() {
        let p = ModelParams::new(1.0f64, 0.5, 10.0).unwrap();
        assert_relative_eq!(b_t_closed_form(&p).unwrap(), 0.475_000_000_051_528_84, max_relative = 1e-13);
        let p = ModelParams::new(1.0f64, 0.5, 1e9).unwrap();
        assert_relative_eq!(b_t_closed_form(&p).unwrap(), 0.5, max_relative = 1e-9);
    }

    #[test]
    fn b_t_general_branch_against_mpmath() {
        // mpmath, 30 digits, with u = t^{2H−1} on [0, 1]
        let frozen = [
            (50.0, 0.543_188_628_003_698_4),
            (100.0, 0.547_044_936_721_777_4),
            (200.0, 0.548_973_091_080_816_9),
        ];
        for (t, expected) in frozen {
            let p = ModelParams::new(1.0f64, 0.6, t).unwrap();
            assert_relative_eq!(b_t_closed_form(&p).unwrap(), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn b_t_rate_is_one_over_t() {
        for &h in &[0.5f64, 0.6, 0.7, 0.75] {
            let scaled: Vec<f64> = [50.0, 100.0, 200.0]
                .iter()
                .map(|&t| {
                    let p = ModelParams::new(1.0f64, h, t).unwrap();
                    t * (b_t_closed_form(&p).unwrap() - stationary_variance(&p)).abs()
                })
                .collect();
            let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
            let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min < 2.0, "h={h}: {scaled:?}");
        }
    }

    #[test]
    fn constants_positive_on_open_range() {
        for i in 1..=25 {
            let h = 0.5 + 0.01 * i as f64;
            assert!(alpha_h(h).unwrap() > 0.0);
            assert!(sigma2_h(h).unwrap() > 0.0);
            assert!(delta_h(h).unwrap() > 0.0);
        }
    }

    #[test]
    fn single_precision_constants() {
        assert!((sigma2_h(0.6f32).unwrap() - 3.130_495).abs() < 1e-5);
        let p = ModelParams::new(1.0f32, 0.6, 50.0).unwrap();
        assert!((b_t_closed_form(&p).unwrap() - 0.543_188_5).abs() < 1e-5);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0f64, 0.6, 1.0).is_err());
        assert!(ModelParams::new(1.0f64, 0.6, -1.0).is_err());
        assert!(ModelParams::new(1.0f64, 0.4, 1.0).is_err());
        let p = ModelParams::new(1.0f64, 0.75, 100.0).unwrap();
        assert_relative_eq!(p.normalizing_horizon(), 100.0 * 100f64.ln());
    }
}
