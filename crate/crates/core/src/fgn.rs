//! Fractional Gaussian noise on a uniform grid.
//!
//! fBm is normalized so that `E[B^H_t B^H_s] = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
//! The covariance of the increments over two grid cells is simultaneously the
//! exact `ℍ`-inner product of the two cell indicators, which is why
//! [`GramWeights`] serves as the quadrature weight in [`crate::hilbert`].

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::constants::check_hurst;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymmetricToeplitz};
use crate::rng::{standard_normal, stream_rng};
use crate::scalar::Scalar;

/// Uniform partition of `[0, horizon]` into `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    horizon: T,
    n: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(horizon: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "at least 2", n as f64));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::invalid("horizon", "positive and finite", horizon.f64()));
        }
        Ok(Self { horizon, n })
    }

    /// Grid whose step is as close as possible to `step` (`n = round(T/step)`).
    pub fn with_step(horizon: T, step: T) -> Result<Self> {
        if !(step > T::zero() && step.is_finite()) {
            return Err(Error::invalid("dt", "positive and finite", step.f64()));
        }
        let n = (horizon / step).round().to_usize().unwrap_or(0);
        Self::new(horizon, n)
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> T {
        self.horizon / T::of_usize(self.n)
    }

    /// `t_k = kΔ`; `t_n` is the horizon exactly.
    pub fn node(&self, k: usize) -> T {
        if k == self.n {
            self.horizon
        } else {
            T::of_usize(k) * self.step()
        }
    }

    /// `t*_k = (k + ½)Δ`, the sampling point of cell `k`.
    pub fn midpoint(&self, k: usize) -> T {
        (T::of_usize(k) + T::of(0.5)) * self.step()
    }

    pub fn midpoints(&self) -> Vec<T> {
        (0..self.n).map(|k| self.midpoint(k)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid<T>) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let tol = T::epsilon() * T::of(16.0) * self.horizon;
        if (self.horizon - other.horizon).abs() > tol {
            return Err(Error::Mismatch("grids cover different horizons"));
        }
        Ok(())
    }
}

/// How a grid is chosen for each horizon of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discretization<T> {
    /// Fixed step; `n = round(T/Δ)` varies with `T`.
    Step(T),
    /// Fixed number of cells; the step varies with `T`.
    Cells(usize),
}

impl<T: Scalar> Discretization<T> {
    pub fn grid(&self, horizon: T) -> Result<Grid<T>> {
        match *self {
            Discretization::Step(step) => Grid::with_step(horizon, step),
            Discretization::Cells(n) => Grid::new(horizon, n),
        }
    }
}

/// `E[B^H_t B^H_s] = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_cov<T: Scalar>(t: T, s: T, hurst: T) -> Result<T> {
    if t < T::zero() || s < T::zero() {
        return Err(Error::invalid("time", "nonnegative", t.min(s).f64()));
    }
    if !(hurst > T::zero() && hurst < T::one()) {
        return Err(Error::invalid("hurst", "in (0, 1)", hurst.f64()));
    }
    let e = T::of(2.0) * hurst;
    Ok(T::of(0.5) * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)))
}

/// Lag-`k` autocovariance of fGn with step `Δ`:
/// `γ(k) = ½Δ^{2H}(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocov<T: Scalar>(k: usize, step: T, hurst: T) -> T {
    let e = T::of(2.0) * hurst;
    let scale = step.powf(e);
    match k {
        0 => scale,
        1 => T::of(0.5) * scale * (T::of(2.0).powf(e) - T::of(2.0)),
        _ => {
            // k^{2H}[(1+1/k)^{2H} − 1 + (1−1/k)^{2H} − 1] cancels far less
            // than the raw second difference at large lags.
            let kf = T::of_usize(k);
            let x = kf.recip();
            let up = (e * x.ln_1p()).exp_m1();
            let down = (e * (-x).ln_1p()).exp_m1();
            T::of(0.5) * scale * kf.powf(e) * (up + down)
        }
    }
}

/// Exact covariances `w[i][j] = E[ΔB_i ΔB_j]` of the grid's fGn increments.
#[derive(Debug, Clone)]
pub struct GramWeights<T: Scalar> {
    grid: Grid<T>,
    hurst: T,
    toeplitz: SymmetricToeplitz<T>,
}

impl<T: Scalar> GramWeights<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.toeplitz.get(i, j)
    }

    /// `γ(0), …, γ(n−1)`.
    pub fn autocov(&self) -> &[T] {
        self.toeplitz.first_row()
    }

    pub fn toeplitz(&self) -> &SymmetricToeplitz<T> {
        &self.toeplitz
    }

    pub fn to_dense(&self) -> Array2<T> {
        self.toeplitz.to_dense()
    }

    /// `Σ_ij w_ij`, which equals `Var B^H_T = T^{2H}`.
    pub fn total(&self) -> T {
        let row = self.autocov();
        let n = row.len();
        let off: T = row
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &g)| T::of_usize(n - k) * g)
            .sum();
        T::of_usize(n) * row[0] + T::of(2.0) * off
    }

    pub(crate) fn ensure_compatible(&self, grid: &Grid<T>, hurst: T) -> Result<()> {
        self.grid.ensure_same(grid)?;
        if self.hurst != hurst {
            return Err(Error::Mismatch("Hurst index differs from the Gram weights"));
        }
        Ok(())
    }
}

pub fn gram_weights<T: Scalar>(grid: &Grid<T>, hurst: T) -> Result<GramWeights<T>> {
    check_hurst(hurst)?;
    let step = grid.step();
    let row = (0..grid.n()).map(|k| fgn_autocov(k, step, hurst)).collect();
    Ok(GramWeights {
        grid: *grid,
        hurst,
        toeplitz: SymmetricToeplitz::new(row),
    })
}

/// One draw of the increments `ΔB_k = B^H_{t_{k+1}} − B^H_{t_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath<T> {
    pub grid: Grid<T>,
    pub hurst: T,
    pub xi: Vec<T>,
    pub seed: u64,
}

impl<T: Scalar> NoisePath<T> {
    /// Sums consecutive blocks of `factor` increments, which is an exact fGn
    /// draw on the grid with `n / factor` cells.
    pub fn coarsen(&self, factor: usize) -> Result<NoisePath<T>> {
        if factor == 0 || self.xi.len() % factor != 0 {
            return Err(Error::invalid("factor", "a divisor of n", factor as f64));
        }
        let grid = Grid::new(self.grid.horizon(), self.grid.n() / factor)?;
        let xi = self.xi.chunks(factor).map(|c| c.iter().copied().sum()).collect();
        Ok(NoisePath {
            grid,
            hurst: self.hurst,
            xi,
            seed: self.seed,
        })
    }
}

/// Eigenvalues below this are treated as a failed embedding.
pub const EMBEDDING_TOLERANCE: f64 = -1e-9;

/// Davies–Harte sampler: circulant embedding of size `2n`, one FFT per draw.
pub struct CirculantSampler<T: Scalar> {
    grid: Grid<T>,
    hurst: T,
    // sqrt(λ_k / m) for k ∈ {0, n}, sqrt(λ_k / 2m) otherwise.
    scale: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> CirculantSampler<T> {
    /// Returns `Ok(None)` when the embedding has an eigenvalue below
    /// [`EMBEDDING_TOLERANCE`].
    pub fn new(grid: &Grid<T>, hurst: T) -> Result<Option<Self>> {
        check_hurst(hurst)?;
        let n = grid.n();
        let m = 2 * n;
        let step = grid.step();
        let mut embed = vec![Complex::new(T::zero(), T::zero()); m];
        for k in 0..=n {
            let g = fgn_autocov(k, step, hurst);
            embed[k].re = g;
            if k > 0 && k < n {
                embed[m - k].re = g;
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut embed);
        let floor = T::of(EMBEDDING_TOLERANCE) * step.powf(T::of(2.0) * hurst);
        if embed.iter().any(|c| c.re < floor) {
            return Ok(None);
        }
        let mf = T::of_usize(m);
        let scale = (0..=n)
            .map(|k| {
                let lam = embed[k].re.max(T::zero());
                let denom = if k == 0 || k == n { mf } else { T::of(2.0) * mf };
                (lam / denom).sqrt()
            })
            .collect();
        Ok(Some(Self {
            grid: *grid,
            hurst,
            scale,
            fft,
        }))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let n = self.grid.n();
        let m = 2 * n;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
        buf[0] = Complex::new(self.scale[0] * standard_normal::<T, _>(rng), T::zero());
        buf[n] = Complex::new(self.scale[n] * standard_normal::<T, _>(rng), T::zero());
        for k in 1..n {
            let a: T = standard_normal(rng);
            let b: T = standard_normal(rng);
            let s = self.scale[k];
            buf[k] = Complex::new(s * a, s * b);
            buf[m - k] = Complex::new(s * a, -s * b);
        }
        self.fft.process(&mut buf);
        for (o, c) in out.iter_mut().zip(buf.iter()) {
            *o = c.re;
        }
    }
}

/// Dense sampler `ξ = L z` with `W = L Lᵀ`. `O(n²)` per draw.
pub struct CholeskySampler<T: Scalar> {
    factor: Array2<T>,
}

impl<T: Scalar> CholeskySampler<T> {
    pub fn new(grid: &Grid<T>, hurst: T) -> Result<Self> {
        let w = gram_weights(grid, hurst)?;
        Ok(Self {
            factor: cholesky(&w.to_dense())?,
        })
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let n = self.factor.nrows();
        let z: Vec<T> = (0..n).map(|_| standard_normal(rng)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.factor.row(i);
            *o = row.iter().zip(z.iter()).take(i + 1).map(|(&l, &zj)| l * zj).sum();
        }
    }
}

enum Method<T: Scalar> {
    Circulant(CirculantSampler<T>),
    Cholesky(CholeskySampler<T>),
}

/// Exact fGn sampler; circulant embedding with a dense-Cholesky fallback.
pub struct FgnSampler<T: Scalar> {
    grid: Grid<T>,
    hurst: T,
    method: Method<T>,
}

impl<T: Scalar> FgnSampler<T> {
    pub fn new(grid: &Grid<T>, hurst: T) -> Result<Self> {
        let method = match CirculantSampler::new(grid, hurst)? {
            Some(c) => Method::Circulant(c),
            None => Method::Cholesky(CholeskySampler::new(grid, hurst)?),
        };
        Ok(Self {
            grid: *grid,
            hurst,
            method,
        })
    }

    pub fn cholesky(grid: &Grid<T>, hurst: T) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            hurst,
            method: Method::Cholesky(CholeskySampler::new(grid, hurst)?),
        })
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant(_))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        match &self.method {
            Method::Circulant(c) => c.fill(rng, out),
            Method::Cholesky(c) => c.fill(rng, out),
        }
    }

    pub fn sample(&self, seed: u64) -> NoisePath<T> {
        let mut xi = vec![T::zero(); self.grid.n()];
        self.fill(&mut stream_rng(seed), &mut xi);
        NoisePath {
            grid: self.grid,
            hurst: self.hurst,
            xi,
            seed,
        }
    }
}

/// One fGn draw keyed by `seed`. Build an [`FgnSampler`] once when drawing
/// repeatedly on the same grid.
pub fn sample_fgn<T: Scalar>(grid: &Grid<T>, hurst: T, seed: u64) -> Result<NoisePath<T>> {
    Ok(FgnSampler::new(grid, hurst)?.sample(seed))
}
