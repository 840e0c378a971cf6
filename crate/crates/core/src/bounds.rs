//! The three bound terms of the Kolmogorov-distance estimate for a ratio of
//! second-chaos variables, `−I₂(φ_T)/(I₂(ψ_T) + b_T)`, and a report of how
//! their ingredients approach their large-`T` limits.
//!
//! ```text
//! Ψ₁ = (1/b²) √((b² − 2‖φ‖²)² + 8‖φ⊗₁φ‖²)
//! Ψ₂ = (2/b²) √(2‖φ⊗₁ψ‖² + ⟨φ,ψ⟩²)
//! Ψ₃ = (2/b²) √(‖ψ‖⁴ + 2‖ψ⊗₁ψ‖²)
//! ```
//!
//! Here `φ_T = f_T` and `ψ_T = g_T`. At `H = 3/4` the statistic carries the
//! extra `1/√ln T`, so `φ_T = f_T/√ln T`.

use crate::constants::{
    b_t_closed_form, delta_h, is_three_quarters, rate_exponent, sigma2_h, stationary_variance, ModelParams,
    RateExponent,
};
use crate::error::{Error, Result};
use crate::fgn::{gram_weights, Discretization, Grid};
use crate::hilbert::{PaperKernels, Weighted};
use crate::scalar::Scalar;

/// `b_T` and the `ℍ⊗²` quantities of `φ_T` and `ψ_T` entering `Ψ₁..Ψ₃`.
///
/// `norm_f2` and `norm_g2` are squared norms; the contraction norms are not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ingredients<T> {
    pub b_t: T,
    pub norm_f2: T,
    pub norm_f1f: T,
    pub norm_f1g: T,
    pub inner_fg: T,
    pub norm_g2: T,
    pub norm_g1g: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms<T> {
    pub psi1: T,
    pub psi2: T,
    pub psi3: T,
    pub max_psi: T,
    pub ingredients: Ingredients<T>,
}

pub fn psi_from_ingredients<T: Scalar>(ing: &Ingredients<T>) -> Result<BoundTerms<T>> {
    let b = ing.b_t;
    if !(b > T::zero()) {
        return Err(Error::invalid("b_T", "positive", b.f64()));
    }
    let two = T::of(2.0);
    let b2 = b * b;
    let gap = b2 - two * ing.norm_f2;
    let psi1 = (gap * gap + T::of(8.0) * ing.norm_f1f * ing.norm_f1f).sqrt() / b2;
    let psi2 = two / b2 * (two * ing.norm_f1g * ing.norm_f1g + ing.inner_fg * ing.inner_fg).sqrt();
    let psi3 = two / b2 * (ing.norm_g2 * ing.norm_g2 + two * ing.norm_g1g * ing.norm_g1g).sqrt();
    Ok(BoundTerms {
        psi1,
        psi2,
        psi3,
        max_psi: psi1.max(psi2).max(psi3),
        ingredients: *ing,
    })
}

struct Measured<T> {
    raw: Ingredients<T>,
    norm_h2: T,
}

/// Ingredients of the unscaled kernels `f_T`, `g_T`, plus `‖h_T‖²`.
fn measure<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<Measured<T>> {
    let kernels = PaperKernels::new(params, grid)?;
    let w = gram_weights(grid, params.hurst())?;
    let f = Weighted::new(&kernels.f, &w)?;
    let g = Weighted::new(&kernels.g, &w)?;
    let raw = Ingredients {
        b_t: b_t_closed_form(params)?,
        norm_f2: f.norm2()?,
        norm_f1f: f.contraction_norm2(&f)?.sqrt(),
        norm_f1g: f.contraction_norm2(&g)?.sqrt(),
        inner_fg: f.inner(&g)?,
        norm_g2: g.norm2()?,
        norm_g1g: g.contraction_norm2(&g)?.sqrt(),
    };
    drop((f, g));
    let norm_h2 = Weighted::new(&kernels.h, &w)?.norm2()?;
    Ok(Measured { raw, norm_h2 })
}

/// `1/√ln T` at `H = 3/4`, otherwise 1.
fn phi_scale<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    if !is_three_quarters(params.hurst()) {
        return Ok(T::one());
    }
    let log = params.horizon().ln();
    if !(log > T::zero()) {
        return Err(Error::invalid("horizon", "greater than 1 at H = 3/4", params.horizon().f64()));
    }
    Ok(log.sqrt().recip())
}

fn scale_phi<T: Scalar>(raw: &Ingredients<T>, s: T) -> Ingredients<T> {
    Ingredients {
        b_t: raw.b_t,
        norm_f2: raw.norm_f2 * s * s,
        norm_f1f: raw.norm_f1f * s * s,
        norm_f1g: raw.norm_f1g * s,
        inner_fg: raw.inner_fg * s,
        norm_g2: raw.norm_g2,
        norm_g1g: raw.norm_g1g,
    }
}

pub fn psi_terms<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<BoundTerms<T>> {
    let s = phi_scale(params)?;
    let m = measure(params, grid)?;
    psi_from_ingredients(&scale_phi(&m.raw, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `b_T → HΓ(2H)θ^{−2H}`.
    BT,
    /// `T |b_T − a|`, bounded.
    BTGapScaled,
    /// `2‖f_T‖²` (divided by `ln T` at `H = 3/4`) `→ a²` (`9π/(64θ³)` at `3/4`).
    TwoNormF2,
    /// `|2‖f_T‖² − a²| T^{3−4H}` (`× ln T` at `3/4`), bounded.
    TwoNormF2GapScaled,
    /// `‖f_T⊗₁f_T‖ → 0`.
    NormF1F,
    /// `‖f_T⊗₁f_T‖` divided by the rate `T^{−β}` (`1/ln T` at `3/4`), bounded.
    NormF1FScaled,
    /// `T‖g_T‖²` (`/ ln T` at `3/4`) `→ δ_H/(2θ^{1+4H})`.
    TNormG2,
    /// `√T⟨f_T, g_T⟩` (`/ ln T` at `3/4`) `→ √(θ/σ²_H) δ_H/(2θ^{1+4H})`.
    SqrtTInnerFG,
    /// `√T‖f_T⊗₁g_T‖ → 0`.
    SqrtTNormF1G,
    /// `√T‖g_T⊗₁g_T‖ → 0`.
    SqrtTNormG1G,
    /// `‖h_T‖²/T → 0`.
    NormH2OverT,
    /// `max(Ψ₁, Ψ₂, Ψ₃) → 0`.
    MaxPsi,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::BT,
        Quantity::BTGapScaled,
        Quantity::TwoNormF2,
        Quantity::TwoNormF2GapScaled,
        Quantity::NormF1F,
        Quantity::NormF1FScaled,
        Quantity::TNormG2,
        Quantity::SqrtTInnerFG,
        Quantity::SqrtTNormF1G,
        Quantity::SqrtTNormG1G,
        Quantity::NormH2OverT,
        Quantity::MaxPsi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::BT => "b_T",
            Quantity::BTGapScaled => "T*|b_T-a|",
            Quantity::TwoNormF2 => "2*norm_f2",
            Quantity::TwoNormF2GapScaled => "|2*norm_f2-a^2|*rate",
            Quantity::NormF1F => "norm_f1f",
            Quantity::NormF1FScaled => "norm_f1f*rate",
            Quantity::TNormG2 => "T*norm_g2",
            Quantity::SqrtTInnerFG => "sqrt(T)*inner_fg",
            Quantity::SqrtTNormF1G => "sqrt(T)*norm_f1g",
            Quantity::SqrtTNormG1G => "sqrt(T)*norm_g1g",
            Quantity::NormH2OverT => "norm_h2/T",
            Quantity::MaxPsi => "max_psi",
        }
    }
}

/// One measured quantity at one horizon. `ratio = measured / paper_limit`
/// when the limit is finite and nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsRow<T> {
    pub horizon: T,
    pub quantity: Quantity,
    pub measured: T,
    pub paper_limit: Option<T>,
    pub ratio: Option<T>,
}

fn row<T: Scalar>(horizon: T, quantity: Quantity, measured: T, limit: Option<T>) -> AsymptoticsRow<T> {
    let ratio = limit.filter(|l| *l != T::zero()).map(|l| measured / l);
    AsymptoticsRow {
        horizon,
        quantity,
        measured,
        paper_limit: limit,
        ratio,
    }
}

/// Rows for every horizon in `t_list` (strictly increasing), twelve per horizon
/// in the order of [`Quantity::ALL`].
pub fn asymptotics_report<T: Scalar>(
    params: &ModelParams<T>,
    t_list: &[T],
    discretization: Discretization<T>,
) -> Result<Vec<AsymptoticsRow<T>>> {
    if t_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("t_list", "strictly increasing", f64::NAN));
    }
    let hurst = params.hurst();
    let theta = params.theta();
    let log_case = is_three_quarters(hurst);
    let sigma2 = sigma2_h(hurst)?;
    let delta = delta_h(hurst)?;
    let a = stationary_variance(params);
    let f2_limit = if log_case {
        T::of(9.0) * T::PI() / (T::of(64.0) * theta.powi(3))
    } else {
        a * a
    };
    let g2_limit = delta / (T::of(2.0) * theta.powf(T::one() + T::of(4.0) * hurst));
    let fg_limit = (theta / sigma2).sqrt() * g2_limit;
    let zhou = rate_exponent(hurst, T::of(crate::constants::DEFAULT_EPSILON))?;

    let mut rows = Vec::with_capacity(t_list.len() * Quantity::ALL.len());
    for &horizon in t_list {
        let p = params.with_horizon(horizon)?;
        let grid = discretization.grid(horizon)?;
        let m = measure(&p, &grid)?;
        let psi = psi_from_ingredients(&scale_phi(&m.raw, phi_scale(&p)?))?;
        let raw = m.raw;
        let log = horizon.ln();
        let sqrt_t = horizon.sqrt();
        let (f2, f2_rate) = if log_case {
            (T::of(2.0) * raw.norm_f2 / log, log)
        } else {
            (T::of(2.0) * raw.norm_f2, horizon.powf(T::of(3.0) - T::of(4.0) * hurst))
        };
        let zhou_rate = match zhou {
            RateExponent::Power { beta, .. } => horizon.powf(beta),
            RateExponent::Logarithmic => log,
        };
        let log_div = if log_case { log } else { T::one() };
        let values = [
            (Quantity::BT, raw.b_t, Some(a)),
            (Quantity::BTGapScaled, horizon * (raw.b_t - a).abs(), None),
            (Quantity::TwoNormF2, f2, Some(f2_limit)),
            (Quantity::TwoNormF2GapScaled, (f2 - f2_limit).abs() * f2_rate, None),
            (Quantity::NormF1F, raw.norm_f1f, Some(T::zero())),
            (Quantity::NormF1FScaled, raw.norm_f1f * zhou_rate, None),
            (Quantity::TNormG2, horizon * raw.norm_g2 / log_div, Some(g2_limit)),
            (Quantity::SqrtTInnerFG, sqrt_t * raw.inner_fg / log_div, Some(fg_limit)),
            (Quantity::SqrtTNormF1G, sqrt_t * raw.norm_f1g, Some(T::zero())),
            (Quantity::SqrtTNormG1G, sqrt_t * raw.norm_g1g, Some(T::zero())),
            (Quantity::NormH2OverT, m.norm_h2 / horizon, Some(T::zero())),
            (Quantity::MaxPsi, psi.max_psi, Some(T::zero())),
        ];
        rows.extend(values.into_iter().map(|(q, v, l)| row(horizon, q, v, l)));
    }
    Ok(rows)
}

/// `C/T^β`, or `C/ln T` at `H = 3/4`, at each horizon.
pub fn theoretical_rate_curve<T: Scalar>(
    params: &ModelParams<T>,
    t_list: &[T],
    constant: T,
    epsilon: T,
) -> Result<Vec<(T, T)>> {
    if !(constant > T::zero()) {
        return Err(Error::invalid("C", "positive", constant.f64()));
    }
    let rate = rate_exponent(params.hurst(), epsilon)?;
    Ok(t_list.iter().map(|&t| (t, rate.bound(constant, t))).collect())
}
