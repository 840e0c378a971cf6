//! Replications of the normalized statistic, one-sample Kolmogorov distances
//! to `N(0, 1)` and log-log fits of their decay in `T`.
//!
//! Replication `r` at horizon index `i` draws its noise from the stream
//! `stream_seed(master_seed, [i, r])` (see [`crate::rng`]), and results are
//! collected by index, so a report depends only on its configuration.

use rayon::prelude::*;

use crate::constants::{is_three_quarters, ModelParams};
use crate::error::{Error, Result};
use crate::fgn::{Discretization, FgnSampler, Grid};
use crate::process::{estimate_pathwise, simulate_fou, statistic_scale, ChaosRatio};
use crate::rng::stream_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticMethod {
    /// `−I₂(f_T)/(I₂(g_T) + b_T)` from the noise.
    ChaosRatio,
    /// The scaled error of the pathwise estimator.
    Pathwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCConfig<T> {
    pub theta: T,
    pub hurst: T,
    pub t_list: Vec<T>,
    pub discretization: Discretization<T>,
    pub replications: usize,
    pub master_seed: u64,
    pub method: StatisticMethod,
}

/// Replications at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MCRecord<T> {
    pub horizon: T,
    pub samples: Vec<T>,
    pub ks_distance: T,
    pub sample_mean: T,
    pub sample_var: T,
    /// Replications dropped as degenerate (at most 0.1%).
    pub degenerate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    pub beta_hat: T,
    pub c_hat: T,
    pub r_squared: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCReport<T> {
    pub records: Vec<MCRecord<T>>,
    /// Present when there are at least three horizons and every distance is positive.
    pub fitted: Option<RateFit<T>>,
}

/// Minimum replications for a meaningful distance estimate.
pub const MIN_REPLICATIONS: usize = 100;

impl<T: Scalar> MCConfig<T> {
    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.theta, self.hurst, T::one())?;
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::invalid("replications", "at least 100", self.replications as f64));
        }
        if self.t_list.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("t_list", "strictly increasing", f64::NAN));
        }
        if is_three_quarters(self.hurst) {
            if let Some(&t) = self.t_list.iter().find(|&&t| !(t > T::one())) {
                return Err(Error::invalid("horizon", "greater than 1 at H = 3/4", t.f64()));
            }
        }
        match self.discretization {
            Discretization::Step(dt) if !(dt > T::zero() && dt.is_finite()) => {
                Err(Error::invalid("dt", "positive and finite", dt.f64()))
            }
            Discretization::Cells(n) if n < 2 => Err(Error::invalid("n", "at least 2", n as f64)),
            _ => Ok(()),
        }
    }
}

/// The per-horizon statistic, built once and evaluated per replication.
enum Statistic<T: Scalar> {
    Chaos { ratio: ChaosRatio<T>, factor: T },
    Pathwise { params: ModelParams<T>, grid: Grid<T>, scale: T },
}

impl<T: Scalar> Statistic<T> {
    fn new(method: StatisticMethod, params: &ModelParams<T>, grid: &Grid<T>) -> Result<Self> {
        let scale = statistic_scale(params)?;
        Ok(match method {
            StatisticMethod::ChaosRatio => {
                // The ratio already carries √(T/(θσ²_H)); only the log factor is left.
                let factor = if is_three_quarters(params.hurst()) {
                    params.horizon().ln().sqrt().recip()
                } else {
                    T::one()
                };
                Statistic::Chaos {
                    ratio: ChaosRatio::new(params, grid)?,
                    factor,
                }
            }
            StatisticMethod::Pathwise => Statistic::Pathwise {
                params: *params,
                grid: *grid,
                scale,
            },
        })
    }

    fn eval(&self, sampler: &FgnSampler<T>, seed: u64) -> Result<T> {
        let noise = sampler.sample(seed);
        match self {
            Statistic::Chaos { ratio, factor } => Ok(ratio.statistic(&noise)? * *factor),
            Statistic::Pathwise { params, grid, scale } => {
                let path = simulate_fou(grid, params, &noise)?;
                Ok(*scale * (estimate_pathwise(&path)?.theta_hat - params.theta()))
            }
        }
    }
}

fn mean_and_variance<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let var = if xs.len() > 1 { ss / (n - T::one()) } else { T::zero() };
    (mean, var)
}

fn run_horizon<T: Scalar>(config: &MCConfig<T>, index: usize, horizon: T) -> Result<MCRecord<T>> {
    let params = ModelParams::new(config.theta, config.hurst, horizon)?;
    let grid = config.discretization.grid(horizon)?;
    let sampler = FgnSampler::new(&grid, config.hurst)?;
    let statistic = Statistic::new(config.method, &params, &grid)?;
    let results: Vec<Result<T>> = (0..config.replications)
        .into_par_iter()
        .map(|r| statistic.eval(&sampler, stream_seed(config.master_seed, &[index as u64, r as u64])))
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut degenerate = 0;
    for result in results {
        match result {
            Ok(v) => samples.push(v),
            Err(e) if e.is_degenerate_sample() => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    if degenerate * 1000 > config.replications {
        return Err(Error::TooManyFailures {
            failed: degenerate,
            total: config.replications,
        });
    }
    let ks = ks_distance(&samples)?;
    let (mean, var) = mean_and_variance(&samples);
    Ok(MCRecord {
        horizon,
        samples,
        ks_distance: ks,
        sample_mean: mean,
        sample_var: var,
        degenerate,
    })
}

pub fn run<T: Scalar>(config: &MCConfig<T>) -> Result<MCReport<T>> {
    config.validate()?;
    let records = config
        .t_list
        .iter()
        .enumerate()
        .map(|(i, &t)| run_horizon(config, i, t))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(T, T)> = records.iter().map(|r| (r.horizon, r.ks_distance)).collect();
    let fitted = if rows.len() >= 3 && rows.iter().all(|r| r.1 > T::zero()) {
        Some(rate_fit(&rows)?)
    } else {
        None
    };
    Ok(MCReport { records, fitted })
}

/// `Φ(z) = ½ erfc(−z/√2)`.
pub fn standard_normal_cdf<T: Scalar>(z: T) -> T {
    T::of(0.5 * libm::erfc(-z.f64() * std::f64::consts::FRAC_1_SQRT_2))
}

/// `max_i max(i/N − Φ(z_(i)), Φ(z_(i)) − (i−1)/N)` over the sorted sample.
pub fn ks_distance<T: Scalar>(samples: &[T]) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let mut sorted: Vec<f64> = samples.iter().map(|v| v.f64()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &z)| {
        let cdf = standard_normal_cdf(z);
        let above = (i + 1) as f64 / n - cdf;
        let below = cdf - i as f64 / n;
        acc.max(above).max(below)
    });
    Ok(T::of(d))
}

/// Least squares of `ln d` on `ln T`: `d ≈ ĉ T^{−β̂}`.
pub fn rate_fit<T: Scalar>(rows: &[(T, T)]) -> Result<RateFit<T>> {
    if rows.len() < 3 {
        return Err(Error::invalid("rows", "at least 3", rows.len() as f64));
    }
    if let Some(&(_, d)) = rows.iter().find(|r| !(r.1 > T::zero() && r.0 > T::zero())) {
        return Err(Error::invalid("distance", "positive", d.f64()));
    }
    let n = T::of_usize(rows.len());
    let xs: Vec<T> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<T> = rows.iter().map(|r| r.1.ln()).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: T = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    if !(sxx > T::epsilon() * T::of(16.0) * (mx * mx).max(T::one())) {
        return Err(Error::SingularFit("all horizons are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy > T::zero() { T::one() - ss_res / syy } else { T::one() };
    Ok(RateFit {
        beta_hat: -slope,
        c_hat: intercept.exp(),
        r_squared,
    })
}
