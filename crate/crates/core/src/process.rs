//! The fOU path on a grid and the drift estimator in pathwise and chaos form.
//!
//! The path is propagated with the exact integrating factor and the noise of
//! each cell damped to its midpoint,
//! `x_{k+1} = e^{−θΔ} x_k + e^{−θΔ/2} ξ_k`, so that
//! `x_k = Σ_{j<k} e^{−θ(t_k − t*_j)} ξ_j` is the midpoint rule for
//! `∫_0^{t_k} e^{−θ(t_k−s)} dB^H_s`, the same rule the chaos kernels use.

use crate::constants::{alpha_h, is_half, sigma2_h, stationary_variance, b_t_closed_form, ModelParams};
use crate::error::{Error, Result};
use crate::fgn::{gram_weights, GramWeights, Grid, NoisePath};
use crate::hilbert::{Kernel, PaperKernels};
use crate::quadrature::{integrate_power_singular, DEFAULT_TOLERANCE};
use crate::scalar::Scalar;

/// `X` at the grid nodes, replayable from its noise.
#[derive(Debug, Clone, PartialEq)]
pub struct FouPath<T: Scalar> {
    pub grid: Grid<T>,
    pub params: ModelParams<T>,
    pub x: Vec<T>,
    pub noise: NoisePath<T>,
}

impl<T: Scalar> FouPath<T> {
    pub fn terminal(&self) -> T {
        self.x[self.x.len() - 1]
    }

    /// `∫_0^T X_t² dt` by the trapezoid rule on the nodes.
    pub fn square_integral(&self) -> T {
        let n = self.x.len() - 1;
        let ends = T::of(0.5) * (self.x[0] * self.x[0] + self.x[n] * self.x[n]);
        let inner: T = self.x[1..n].iter().map(|&v| v * v).sum();
        self.grid.step() * (inner + ends)
    }
}

fn ensure_params_grid<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<()> {
    grid.ensure_same(&Grid::new(params.horizon(), grid.n())?)
}

pub fn simulate_fou<T: Scalar>(grid: &Grid<T>, params: &ModelParams<T>, noise: &NoisePath<T>) -> Result<FouPath<T>> {
    ensure_params_grid(params, grid)?;
    grid.ensure_same(&noise.grid)?;
    if noise.hurst != params.hurst() {
        return Err(Error::Mismatch("noise Hurst index differs from the model"));
    }
    let decay = (-params.theta() * grid.step()).exp();
    let half = (-params.theta() * grid.step() * T::of(0.5)).exp();
    let mut x = Vec::with_capacity(grid.n() + 1);
    let mut state = T::zero();
    x.push(state);
    for &xi in &noise.xi {
        state = decay * state + half * xi;
        x.push(state);
    }
    Ok(FouPath {
        grid: *grid,
        params: *params,
        x,
        noise: noise.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMethod {
    PathwiseIto,
    SkorohodOracle,
    ChaosRatio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult<T> {
    pub theta_hat: T,
    pub numerator: T,
    pub denominator: T,
    pub method: EstimatorMethod,
}

/// `c_T = α_H ∫_0^T (T−u) e^{−θu} u^{2H−2} du`, the gap between the Young
/// and Skorohod integrals `∫X dX`. At `H = 1/2` this is the Itô correction `T/2`.
pub fn skorohod_correction<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let horizon = params.horizon();
    if is_half(params.hurst()) {
        return Ok(T::of(0.5) * horizon);
    }
    let theta = params.theta();
    let alpha = alpha_h(params.hurst())?;
    let tol = T::of(DEFAULT_TOLERANCE) * horizon / alpha;
    let integral = integrate_power_singular(
        |u: T| (horizon - u) * (-theta * u).exp(),
        params.hurst(),
        horizon,
        tol,
    )?;
    Ok(alpha * integral)
}

/// `θ̂ = (c_T − X_T²/2) / ∫X²`.
///
/// The Young integral `∫X dX` is the trapezoid sum
/// `Σ ½(X_k + X_{k+1})(X_{k+1} − X_k)`, which telescopes to `X_T²/2`.
/// For `H > 1/2` the correction needs the true `θ`, so this is an oracle.
pub fn estimate_pathwise<T: Scalar>(path: &FouPath<T>) -> Result<EstimatorResult<T>> {
    let params = &path.params;
    let denominator = path.square_integral();
    let floor = T::of(1e-12) * params.horizon() * stationary_variance(params);
    if !(denominator >= floor) {
        return Err(Error::DegeneratePath(denominator.f64()));
    }
    let xt = path.terminal();
    let numerator = skorohod_correction(params)? - T::of(0.5) * xt * xt;
    let method = if is_half(params.hurst()) {
        EstimatorMethod::PathwiseIto
    } else {
        EstimatorMethod::SkorohodOracle
    };
    Ok(EstimatorResult {
        theta_hat: numerator / denominator,
        numerator,
        denominator,
        method,
    })
}

/// `Σ_ij K_ij (ξ_i ξ_j − w_ij)`.
pub fn i2<T: Scalar, K: Kernel<T> + ?Sized>(kernel: &K, noise: &NoisePath<T>, w: &GramWeights<T>) -> Result<T> {
    w.ensure_compatible(&noise.grid, noise.hurst)?;
    w.grid().ensure_same(kernel.grid())?;
    Ok(kernel.quad_form(&noise.xi) - kernel.weighted_trace(w))
}

/// `√(T/(θσ²_H))` when `H < 3/4`, `√(T/(θσ²_H ln T))` at `H = 3/4`.
pub fn statistic_scale<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let sigma2 = sigma2_h(params.hurst())?;
    Ok((params.normalizing_horizon() / (params.theta() * sigma2)).sqrt())
}

fn ratio<T: Scalar>(numerator: T, denominator: T) -> Result<T> {
    if !(denominator.abs() >= T::of(1e-9)) {
        return Err(Error::NearZeroDenominator(denominator.f64()));
    }
    Ok(numerator / denominator)
}

/// `√(T/(θσ²_H))(θ̂_T − θ) = −I₂(f_T) / (I₂(g_T) + b_T)` evaluated on the path's noise.
pub fn normalized_statistic<T, F, G>(
    path: &FouPath<T>,
    f: &F,
    g: &G,
    b_t: T,
    w: &GramWeights<T>,
) -> Result<T>
where
    T: Scalar,
    F: Kernel<T> + ?Sized,
    G: Kernel<T> + ?Sized,
{
    if !(b_t > T::zero()) {
        return Err(Error::invalid("b_T", "positive", b_t.f64()));
    }
    let num = -i2(f, &path.noise, w)?;
    ratio(num, i2(g, &path.noise, w)? + b_t)
}

/// The chaos-ratio statistic with the kernel traces and `b_T` computed once,
/// so each replication costs `O(n)`.
pub struct ChaosRatio<T: Scalar> {
    params: ModelParams<T>,
    weights: GramWeights<T>,
    kernels: PaperKernels<T>,
    trace_f: T,
    trace_g: T,
    b_t: T,
}

impl<T: Scalar> ChaosRatio<T> {
    pub fn new(params: &ModelParams<T>, grid: &Grid<T>) -> Result<Self> {
        let weights = gram_weights(grid, params.hurst())?;
        let kernels = PaperKernels::new(params, grid)?;
        let trace_f = kernels.f.weighted_trace(&weights);
        let trace_g = kernels.g.weighted_trace(&weights);
        let b_t = b_t_closed_form(params)?;
        Ok(Self {
            params: *params,
            weights,
            kernels,
            trace_f,
            trace_g,
            b_t,
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn weights(&self) -> &GramWeights<T> {
        &self.weights
    }

    pub fn kernels(&self) -> &PaperKernels<T> {
        &self.kernels
    }

    pub fn b_t(&self) -> T {
        self.b_t
    }

    /// `(−I₂(f_T), I₂(g_T) + b_T)`.
    pub fn parts(&self, noise: &NoisePath<T>) -> Result<(T, T)> {
        self.weights.ensure_compatible(&noise.grid, noise.hurst)?;
        let num = self.trace_f - self.kernels.f.quad_form(&noise.xi);
        let den = self.kernels.g.quad_form(&noise.xi) - self.trace_g + self.b_t;
        Ok((num, den))
    }

    /// `−I₂(f_T) / (I₂(g_T) + b_T)`.
    pub fn statistic(&self, noise: &NoisePath<T>) -> Result<T> {
        let (num, den) = self.parts(noise)?;
        ratio(num, den)
    }

    /// The statistic inverted to a drift estimate.
    pub fn estimate(&self, noise: &NoisePath<T>) -> Result<EstimatorResult<T>> {
        let (num, den) = self.parts(noise)?;
        let stat = ratio(num, den)?;
        let sigma2 = sigma2_h(self.params.hurst())?;
        let theta = self.params.theta();
        Ok(EstimatorResult {
            theta_hat: theta + stat * (theta * sigma2 / self.params.horizon()).sqrt(),
            numerator: num,
            denominator: den,
            method: EstimatorMethod::ChaosRatio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::FgnSampler;
    use crate::hilbert::{kernel_f, norm2_h2, KernelMatrix};
    use approx::assert_relative_eq;
    use ndarray::Array2;

    fn setup(theta: f64, hurst: f64, horizon: f64, n: usize) -> (ModelParams<f64>, Grid<f64>) {
        (
            ModelParams::new(theta, hurst, horizon).unwrap(),
            Grid::new(horizon, n).unwrap(),
        )
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn zero_noise_gives_zero_path() {
        let (p, g) = setup(1.0, 0.6, 5.0, 50);
        let noise = NoisePath { grid: g, hurst: 0.6, xi: vec![0.0; 50], seed: 0 };
        let path = simulate_fou(&g, &p, &noise).unwrap();
        assert_eq!(path.x.len(), 51);
        assert!(path.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vanishing_drift_integrates_the_noise() {
        let (p, g) = setup(1e-12, 0.7, 3.0, 30);
        let noise = sample_fgn_for(&g, 0.7, 5);
        let path = simulate_fou(&g, &p, &noise).unwrap();
        let mut acc = 0.0;
        for k in 0..30 {
            assert_relative_eq!(path.x[k], acc, epsilon = 1e-10);
            acc += noise.xi[k];
        }
    }

    fn sample_fgn_for(g: &Grid<f64>, h: f64, seed: u64) -> NoisePath<f64> {
        crate::fgn::sample_fgn(g, h, seed).unwrap()
    }

    #[test]
    fn replay_is_bitwise() {
        let (p, g) = setup(0.8, 0.65, 10.0, 200);
        let noise = sample_fgn_for(&g, 0.65, 11);
        let a = simulate_fou(&g, &p, &noise).unwrap();
        let b = simulate_fou(&g, &p, &a.noise).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let (p, g) = setup(1.0, 0.6, 5.0, 50);
        let noise = sample_fgn_for(&g, 0.7, 1);
        assert!(simulate_fou(&g, &p, &noise).is_err());
        let other = Grid::new(5.0, 40).unwrap();
        let noise = sample_fgn_for(&other, 0.6, 1);
        assert!(simulate_fou(&g, &p, &noise).is_err());
        let longer = Grid::new(6.0, 50).unwrap();
        let noise = sample_fgn_for(&longer, 0.6, 1);
        assert!(simulate_fou(&longer, &p, &noise).is_err());
    }

    #[test]
    fn terminal_variance_matches_stationary_variance() {
        let (p, g) = setup(1.0, 0.5, 20.0, 2000);
        let sampler = FgnSampler::new(&g, 0.5).unwrap();
        let ends: Vec<f64> = (0..10_000u64)
            .map(|r| simulate_fou(&g, &p, &sampler.sample(r)).unwrap().terminal())
            .collect();
        let (_, var) = mean_var(&ends);
        assert!((var - 0.5).abs() < 0.025, "{var}");
    }

    #[test]
    fn ito_branch_algebra() {
        let (p, g) = setup(1.0, 0.5, 4.0, 8);
        // X_T = 0 and trapezoid ∫X² = T/2.
        let c = (4.0 / (2.0 * g.step() * 7.0)).sqrt();
        let mut x = vec![c; 9];
        x[0] = 0.0;
        x[8] = 0.0;
        let path = FouPath {
            grid: g,
            params: p,
            x,
            noise: NoisePath { grid: g, hurst: 0.5, xi: vec![0.0; 8], seed: 0 },
        };
        let est = estimate_pathwise(&path).unwrap();
        assert_relative_eq!(est.theta_hat, 1.0, epsilon = 1e-14);
        assert_eq!(est.method, EstimatorMethod::PathwiseIto);
    }

    #[test]
    fn degenerate_path_is_flagged() {
        let (p, g) = setup(1.0, 0.6, 5.0, 50);
        let noise = NoisePath { grid: g, hurst: 0.6, xi: vec![0.0; 50], seed: 0 };
        let path = simulate_fou(&g, &p, &noise).unwrap();
        let err = estimate_pathwise(&path).unwrap_err();
        assert!(err.is_degenerate_sample());
    }

    #[test]
    fn skorohod_correction_closed_forms() {
        let p = ModelParams::new(1.0, 0.5, 7.0).unwrap();
        assert_eq!(skorohod_correction(&p).unwrap(), 3.5);
        // α∫_0^T (T−u) e^{−θu} u^{2H−2} du against a brute midpoint sum after u = v^5.
        let p = ModelParams::new(1.0, 0.6, 3.0).unwrap();
        let n = 200_000;
        let top = 3f64.powf(0.2);
        let h = top / n as f64;
        let brute: f64 = (0..n)
            .map(|k| {
                let v = (k as f64 + 0.5) * h;
                let u = v.powi(5);
                (3.0 - u) * (-u).exp() * 5.0 * h
            })
            .sum::<f64>()
            * 0.12;
        assert_relative_eq!(skorohod_correction(&p).unwrap(), brute, max_relative = 1e-8);
    }

    fn theta_hat_mean(hurst: f64, seed0: u64) -> f64 {
        let (p, g) = setup(1.0, hurst, 500.0, 10_000);
        let sampler = FgnSampler::new(&g, hurst).unwrap();
        let est: Vec<f64> = (0..1000u64)
            .map(|r| {
                let path = simulate_fou(&g, &p, &sampler.sample(seed0 + r)).unwrap();
                estimate_pathwise(&path).unwrap().theta_hat
            })
            .collect();
        mean_var(&est).0
    }

    #[test]
    fn pathwise_estimator_is_consistent() {
        let m = theta_hat_mean(0.5, 100);
        assert!((m - 1.0).abs() < 0.02, "H=0.5 mean {m}");
        let m = theta_hat_mean(0.7, 200);
        assert!((m - 1.0).abs() < 0.03, "H=0.7 mean {m}");
    }

    #[test]
    fn i2_is_centered_with_isometric_variance() {
        let (p, g) = setup(1.0, 0.6, 4.0, 32);
        let w = gram_weights(&g, 0.6).unwrap();
        let f = kernel_f(&p, &g).unwrap();
        let zero = KernelMatrix::zeros(g);
        let sampler = FgnSampler::new(&g, 0.6).unwrap();
        let noise = sampler.sample(3);
        assert_eq!(i2(&zero, &noise, &w).unwrap(), 0.0);
        let draws: Vec<f64> = (0..100_000u64).map(|r| i2(&f, &sampler.sample(r), &w).unwrap()).collect();
        let (m, v) = mean_var(&draws);
        let target = 2.0 * norm2_h2(&f, &w).unwrap();
        assert!(m.abs() < 3.0 * (v / 1e5).sqrt(), "mean {m}");
        assert!((v / target - 1.0).abs() < 0.05, "{v} vs {target}");
    }

    #[test]
    fn i2_checks_compatibility() {
        let (_, g) = setup(1.0, 0.6, 4.0, 32);
        let w = gram_weights(&g, 0.6).unwrap();
        let noise = sample_fgn_for(&g, 0.7, 0);
        let k = KernelMatrix::zeros(g);
        assert!(i2(&k, &noise, &w).is_err());
        let small = Grid::new(4.0, 16).unwrap();
        let k = KernelMatrix::zeros(small);
        assert!(i2(&k, &sample_fgn_for(&g, 0.6, 0), &w).is_err());
    }

    #[test]
    fn cached_ratio_matches_direct_formula() {
        let (p, g) = setup(1.3, 0.65, 8.0, 64);
        let chaos = ChaosRatio::new(&p, &g).unwrap();
        let noise = sample_fgn_for(&g, 0.65, 9);
        let path = simulate_fou(&g, &p, &noise).unwrap();
        let k = chaos.kernels();
        let direct = normalized_statistic(&path, &k.f, &k.g, chaos.b_t(), chaos.weights()).unwrap();
        assert_relative_eq!(chaos.statistic(&noise).unwrap(), direct, max_relative = 1e-12);
        let dense_f = k.f.to_matrix();
        let dense_g = k.g.to_matrix();
        let dense = normalized_statistic(&path, &dense_f, &dense_g, chaos.b_t(), chaos.weights()).unwrap();
        assert_relative_eq!(dense, direct, max_relative = 1e-10);
        let zero_f = KernelMatrix::new(g, Array2::zeros((64, 64))).unwrap();
        assert_eq!(normalized_statistic(&path, &zero_f, &dense_g, chaos.b_t(), chaos.weights()).unwrap(), 0.0);
        assert!(normalized_statistic(&path, &dense_f, &dense_g, 0.0, chaos.weights()).is_err());
    }

    #[test]
    fn chaos_statistic_has_unit_variance() {
        let (p, g) = setup(1.0, 0.5, 200.0, 4000);
        let chaos = ChaosRatio::new(&p, &g).unwrap();
        let sampler = FgnSampler::new(&g, 0.5).unwrap();
        let stats: Vec<f64> = (0..5000u64).map(|r| chaos.statistic(&sampler.sample(r)).unwrap()).collect();
        let (m, v) = mean_var(&stats);
        // The ratio carries the O(1/T) estimator bias 2/T, i.e. √(2/T) after scaling.
        let bias = (2.0f64 / 200.0).sqrt();
        assert!((m - bias).abs() < 4.0 / (5000f64).sqrt(), "mean {m}");
        assert!((v - 1.0).abs() < 0.1, "var {v}");
    }

    #[test]
    fn chaos_and_pathwise_agree_per_path() {
        let (p, g) = setup(1.0, 0.5, 50.0, 1 << 13);
        let chaos = ChaosRatio::new(&p, &g).unwrap();
        let scale = statistic_scale(&p).unwrap();
        for seed in 0..5u64 {
            let noise = sample_fgn_for(&g, 0.5, seed);
            let path = simulate_fou(&g, &p, &noise).unwrap();
            let pathwise = scale * (estimate_pathwise(&path).unwrap().theta_hat - 1.0);
            let chaos_est = chaos.estimate(&noise).unwrap();
            let stat = chaos.statistic(&noise).unwrap();
            assert_relative_eq!(scale * (chaos_est.theta_hat - 1.0), stat, max_relative = 1e-10);
            let gap = (pathwise - stat).abs() / stat.abs().max(1.0);
            assert!(gap < 0.05, "seed {seed}: {pathwise} vs {stat}");
        }
    }
}
