//! `ℍ` and `ℍ⊗²` geometry reduced to matrix algebra.
//!
//! A step function on the grid is a vector of cell values, a two-variable
//! kernel is an `n×n` matrix of midpoint samples, and the singular weight
//! `α_H|u−v|^{2H−2}` only ever enters through [`GramWeights`], whose entries
//! are its exact integrals over pairs of cells. With `W` the Gram matrix:
//!
//! | quantity                  | matrix form               |
//! |---------------------------|---------------------------|
//! | `⟨φ, ψ⟩_ℍ`                | `φᵀ W ψ`                  |
//! | `⟨K1, K2⟩_{ℍ⊗²}`          | `tr(W K1 W K2ᵀ)`          |
//! | `K1 ⊗₁ K2`                | `K1 W K2`                 |
//! | `‖K1 ⊗₁ K2‖²` (symmetric) | `tr((W K1)² (W K2)²)`     |
//!
//! At `H = 1/2`, `W = Δ·I` and everything reduces to plain `L²` sums.
//!
//! The paper kernels have structure that the [`Kernel`] trait exploits:
//! `f_T` is an exponential Toeplitz matrix ([`ExpKernel`]), `h_T` is rank one
//! ([`OuterKernel`]) and `g_T` is a combination of the two ([`KernelSum`]).
//! Products with them cost `O(n²)` instead of `O(n³)`.

use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView2, Zip};

use crate::constants::{sigma2_h, ModelParams};
use crate::error::{Error, Result};
use crate::fgn::{GramWeights, Grid};
use crate::linalg::trace_product;
use crate::scalar::Scalar;

/// A two-variable kernel sampled at cell midpoints.
pub trait Kernel<T: Scalar>: Sync {
    fn grid(&self) -> &Grid<T>;

    fn is_symmetric(&self) -> bool;

    /// `K M`.
    fn left_mul(&self, m: ArrayView2<T>) -> Result<Array2<T>>;

    /// `ξᵀ K ξ`.
    fn quad_form(&self, xi: &[T]) -> T;

    /// `Σ_ij k_ij w_ij`, the expectation of `ξᵀ K ξ`.
    fn weighted_trace(&self, w: &GramWeights<T>) -> T;

    fn to_matrix(&self) -> KernelMatrix<T>;

    /// `W K`.
    fn gram_product(&self, w: &GramWeights<T>) -> Result<Array2<T>> {
        w.toeplitz().apply_matrix(self.to_matrix().k.view())
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Dense midpoint samples `k[i][j] = κ(t*_i, t*_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T> {
    pub grid: Grid<T>,
    pub k: Array2<T>,
    pub symmetric: bool,
}

impl<T: Scalar> KernelMatrix<T> {
    pub fn new(grid: Grid<T>, k: Array2<T>) -> Result<Self> {
        check_len(grid.n(), k.nrows())?;
        check_len(grid.n(), k.ncols())?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let symmetric = (0..k.nrows()).all(|i| (0..i).all(|j| k[[i, j]] == k[[j, i]]));
        Ok(Self { grid, k, symmetric })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.n();
        Self {
            grid,
            k: Array2::zeros((n, n)),
            symmetric: true,
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            grid: self.grid,
            k: &self.k * c,
            symmetric: self.symmetric,
        }
    }
}

impl<T: Scalar> Kernel<T> for KernelMatrix<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn left_mul(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        check_len(self.k.ncols(), m.nrows())?;
        Ok(self.k.dot(&m))
    }

    fn quad_form(&self, xi: &[T]) -> T {
        let x = ndarray::ArrayView1::from(xi);
        x.dot(&self.k.dot(&x))
    }

    fn weighted_trace(&self, w: &GramWeights<T>) -> T {
        w.toeplitz().frobenius_inner(self.k.view())
    }

    fn to_matrix(&self) -> KernelMatrix<T> {
        self.clone()
    }
}

/// `scale · e^{−decay|t−s|}` at midpoints, i.e. `scale · ρ^{|i−j|}` with `ρ = e^{−decay·Δ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernel<T> {
    grid: Grid<T>,
    scale: T,
    rho: T,
}

impl<T: Scalar> ExpKernel<T> {
    pub fn new(grid: Grid<T>, scale: T, decay: T) -> Self {
        Self {
            grid,
            scale,
            rho: (-decay * grid.step()).exp(),
        }
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn rho(&self) -> T {
        self.rho
    }
}

impl<T: Scalar> Kernel<T> for ExpKernel<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    // Two first-order recursions: y = s·(F + B − m) with F_i = m_i + ρF_{i−1},
    // B_i = m_i + ρB_{i+1}.
    fn left_mul(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        let n = self.grid.n();
        check_len(n, m.nrows())?;
        let rho = self.rho;
        let mut forward = m.to_owned();
        for i in 1..n {
            let (prev, mut cur) = forward.multi_slice_mut((ndarray::s![i - 1, ..], ndarray::s![i, ..]));
            Zip::from(&mut cur).and(&prev).for_each(|c, &p| *c += rho * p);
        }
        let mut backward = m.to_owned();
        for i in (0..n - 1).rev() {
            let (mut cur, next) = backward.multi_slice_mut((ndarray::s![i, ..], ndarray::s![i + 1, ..]));
            Zip::from(&mut cur).and(&next).for_each(|c, &p| *c += rho * p);
        }
        let s = self.scale;
        Zip::from(&mut forward)
            .and(&backward)
            .and(&m)
            .for_each(|f, &b, &x| *f = s * (*f + b - x));
        Ok(forward)
    }

    fn quad_form(&self, xi: &[T]) -> T {
        let rho = self.rho;
        let mut carry = T::zero();
        let mut diag = T::zero();
        let mut cross = T::zero();
        let mut prev = T::zero();
        for &x in xi {
            carry = rho * (carry + prev);
            diag += x * x;
            cross += x * carry;
            prev = x;
        }
        self.scale * (diag + T::of(2.0) * cross)
    }

    fn weighted_trace(&self, w: &GramWeights<T>) -> T {
        let gamma = w.autocov();
        let n = gamma.len();
        let mut power = T::one();
        let mut off = T::zero();
        for (k, &g) in gamma.iter().enumerate().skip(1) {
            power *= self.rho;
            off += T::of_usize(n - k) * power * g;
        }
        self.scale * (T::of_usize(n) * gamma[0] + T::of(2.0) * off)
    }

    fn to_matrix(&self) -> KernelMatrix<T> {
        let n = self.grid.n();
        let powers: Vec<T> = std::iter::successors(Some(T::one()), |p| Some(*p * self.rho))
            .take(n)
            .collect();
        KernelMatrix {
            grid: self.grid,
            k: Array2::from_shape_fn((n, n), |(i, j)| self.scale * powers[i.abs_diff(j)]),
            symmetric: true,
        }
    }

    fn gram_product(&self, w: &GramWeights<T>) -> Result<Array2<T>> {
        // W K = (K W)ᵀ for symmetric K and W.
        Ok(self.left_mul(w.to_dense().view())?.reversed_axes())
    }
}

/// Rank-one kernel `scale · v vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterKernel<T> {
    grid: Grid<T>,
    scale: T,
    v: Array1<T>,
}

impl<T: Scalar> OuterKernel<T> {
    pub fn new(grid: Grid<T>, scale: T, v: Vec<T>) -> Result<Self> {
        check_len(grid.n(), v.len())?;
        Ok(Self {
            grid,
            scale,
            v: Array1::from(v),
        })
    }

    pub fn vector(&self) -> &Array1<T> {
        &self.v
    }
}

impl<T: Scalar> Kernel<T> for OuterKernel<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn left_mul(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        check_len(self.v.len(), m.nrows())?;
        let row = self.v.dot(&m) * self.scale;
        let col = self.v.view().insert_axis(ndarray::Axis(1));
        let row = row.insert_axis(ndarray::Axis(0));
        Ok(col.dot(&row))
    }

    fn quad_form(&self, xi: &[T]) -> T {
        let p = self.v.dot(&ndarray::ArrayView1::from(xi));
        self.scale * p * p
    }

    fn weighted_trace(&self, w: &GramWeights<T>) -> T {
        let v = self.v.as_slice().expect("owned vector is contiguous");
        self.scale * w.toeplitz().bilinear(v, v)
    }

    fn to_matrix(&self) -> KernelMatrix<T> {
        let n = self.v.len();
        KernelMatrix {
            grid: self.grid,
            k: Array2::from_shape_fn((n, n), |(i, j)| self.scale * self.v[i] * self.v[j]),
            symmetric: true,
        }
    }

    fn gram_product(&self, w: &GramWeights<T>) -> Result<Array2<T>> {
        let v = self.v.as_slice().expect("owned vector is contiguous");
        let wv = Array1::from(w.toeplitz().apply(v));
        let col = wv.insert_axis(ndarray::Axis(1));
        let row = (&self.v * self.scale).insert_axis(ndarray::Axis(0));
        Ok(col.dot(&row))
    }
}

/// `a·A + b·B`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSum<T, A, B> {
    pub a: T,
    pub first: A,
    pub b: T,
    pub second: B,
}

impl<T: Scalar, A: Kernel<T>, B: Kernel<T>> Kernel<T> for KernelSum<T, A, B> {
    fn grid(&self) -> &Grid<T> {
        self.first.grid()
    }

    fn is_symmetric(&self) -> bool {
        self.first.is_symmetric() && self.second.is_symmetric()
    }

    fn left_mul(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        let mut out = self.first.left_mul(m)?;
        out *= self.a;
        out.scaled_add(self.b, &self.second.left_mul(m)?);
        Ok(out)
    }

    fn quad_form(&self, xi: &[T]) -> T {
        self.a * self.first.quad_form(xi) + self.b * self.second.quad_form(xi)
    }

    fn weighted_trace(&self, w: &GramWeights<T>) -> T {
        self.a * self.first.weighted_trace(w) + self.b * self.second.weighted_trace(w)
    }

    fn to_matrix(&self) -> KernelMatrix<T> {
        let first = self.first.to_matrix();
        let mut k = first.k * self.a;
        k.scaled_add(self.b, &self.second.to_matrix().k);
        KernelMatrix {
            grid: *self.grid(),
            k,
            symmetric: self.is_symmetric(),
        }
    }

    fn gram_product(&self, w: &GramWeights<T>) -> Result<Array2<T>> {
        let mut out = self.first.gram_product(w)?;
        out *= self.a;
        out.scaled_add(self.b, &self.second.gram_product(w)?);
        Ok(out)
    }
}

pub type GKernel<T> = KernelSum<T, ExpKernel<T>, OuterKernel<T>>;

/// The kernels `f_T`, `g_T`, `h_T` of the chaos decomposition
/// `√(T/(θσ²_H))(θ̂_T − θ) = −I₂(f_T)/(I₂(g_T) + b_T)`:
///
/// * `f_T(t,s) = e^{−θ|t−s|} / (2√(θσ²_H T))`
/// * `h_T(t,s) = e^{−θ(T−t)−θ(T−s)}`
/// * `g_T = √(σ²_H/(θT)) f_T − h_T/(2θT)`
#[derive(Debug, Clone)]
pub struct PaperKernels<T: Scalar> {
    pub f: ExpKernel<T>,
    pub g: GKernel<T>,
    pub h: OuterKernel<T>,
}

fn ensure_horizon<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<()> {
    let tol = T::epsilon() * T::of(16.0) * params.horizon();
    if (params.horizon() - grid.horizon()).abs() > tol {
        Err(Error::Mismatch("grid horizon differs from the model horizon"))
    } else {
        Ok(())
    }
}

impl<T: Scalar> PaperKernels<T> {
    pub fn new(params: &ModelParams<T>, grid: &Grid<T>) -> Result<Self> {
        ensure_horizon(params, grid)?;
        let theta = params.theta();
        let horizon = params.horizon();
        let sigma2 = sigma2_h(params.hurst())?;
        let two = T::of(2.0);
        let f = ExpKernel::new(*grid, T::one() / (two * (theta * sigma2 * horizon).sqrt()), theta);
        let v = grid
            .midpoints()
            .into_iter()
            .map(|t| (-theta * (horizon - t)).exp())
            .collect();
        let h = OuterKernel::new(*grid, T::one(), v)?;
        let g = KernelSum {
            a: (sigma2 / (theta * horizon)).sqrt(),
            first: f,
            b: -T::one() / (two * theta * horizon),
            second: h.clone(),
        };
        Ok(Self { f, g, h })
    }
}

pub fn kernel_f<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<KernelMatrix<T>> {
    Ok(PaperKernels::new(params, grid)?.f.to_matrix())
}

pub fn kernel_g<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<KernelMatrix<T>> {
    Ok(PaperKernels::new(params, grid)?.g.to_matrix())
}

pub fn kernel_h<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> Result<KernelMatrix<T>> {
    Ok(PaperKernels::new(params, grid)?.h.to_matrix())
}

/// `⟨φ, ψ⟩_ℍ = φᵀ W ψ` for step functions given by their cell values.
pub fn inner_h<T: Scalar>(phi: &[T], psi: &[T], w: &GramWeights<T>) -> Result<T> {
    check_len(w.n(), phi.len())?;
    check_len(w.n(), psi.len())?;
    Ok(w.toeplitz().bilinear(phi, psi))
}

fn nonnegative<T: Scalar>(value: T, scale: T) -> Result<T> {
    if value < -T::of(1e-12) * scale {
        Err(Error::NotPositiveSemidefinite {
            pivot: 0,
            value: value.f64(),
        })
    } else {
        Ok(value.max(T::zero()))
    }
}

fn sum_squares<T: Scalar>(m: &Array2<T>) -> T {
    m.iter().map(|&x| x * x).sum()
}

/// A kernel together with its Gram product `W K` and, on demand, `(W K)²`.
///
/// Building this once lets norms, inner products and contraction norms of
/// the same kernel share the expensive products.
pub struct Weighted<'a, T: Scalar, K: Kernel<T> + ?Sized> {
    kernel: &'a K,
    weights: &'a GramWeights<T>,
    wk: Array2<T>,
    squared: OnceLock<Result<Array2<T>>>,
}

impl<'a, T: Scalar, K: Kernel<T> + ?Sized> Weighted<'a, T, K> {
    pub fn new(kernel: &'a K, weights: &'a GramWeights<T>) -> Result<Self> {
        weights.grid().ensure_same(kernel.grid())?;
        if !kernel.is_symmetric() {
            return Err(Error::Mismatch("weighted products need a symmetric kernel"));
        }
        Ok(Self {
            kernel,
            weights,
            wk: kernel.gram_product(weights)?,
            squared: OnceLock::new(),
        })
    }

    pub fn gram_product(&self) -> &Array2<T> {
        &self.wk
    }

    /// `(W K)² = W (K (W K))`.
    pub fn squared(&self) -> Result<&Array2<T>> {
        self.squared
            .get_or_init(|| {
                let kwk = self.kernel.left_mul(self.wk.view())?;
                self.weights.toeplitz().apply_matrix(kwk.view())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `‖K‖²_{ℍ⊗²} = tr(W K W K)`.
    pub fn norm2(&self) -> Result<T> {
        let v = trace_product(self.wk.view(), self.wk.view())?;
        nonnegative(v, sum_squares(&self.wk))
    }

    /// `⟨K, L⟩_{ℍ⊗²} = tr(W K W L)`.
    pub fn inner(&self, other: &Weighted<'_, T, impl Kernel<T> + ?Sized>) -> Result<T> {
        self.weights.grid().ensure_same(other.weights.grid())?;
        trace_product(self.wk.view(), other.wk.view())
    }

    /// `‖K ⊗₁ L‖²_{ℍ⊗²} = tr((W K)² (W L)²)`.
    pub fn contraction_norm2(&self, other: &Weighted<'_, T, impl Kernel<T> + ?Sized>) -> Result<T> {
        self.weights.grid().ensure_same(other.weights.grid())?;
        let a = self.squared()?;
        let b = other.squared()?;
        let v = trace_product(a.view(), b.view())?;
        nonnegative(v, (sum_squares(a) * sum_squares(b)).sqrt())
    }
}

/// `‖K‖²_{ℍ⊗²} = tr(W K W Kᵀ)`; non-symmetric kernels (contractions) allowed.
pub fn norm2_h2<T: Scalar, K: Kernel<T> + ?Sized>(kernel: &K, w: &GramWeights<T>) -> Result<T> {
    if kernel.is_symmetric() {
        return Weighted::new(kernel, w)?.norm2();
    }
    w.grid().ensure_same(kernel.grid())?;
    let m = kernel.to_matrix();
    let wk = w.toeplitz().apply_matrix(m.k.view())?;
    let wkt = w.toeplitz().apply_matrix(m.k.t())?;
    let v = trace_product(wk.view(), wkt.view())?;
    nonnegative(v, (sum_squares(&wk) * sum_squares(&wkt)).sqrt())
}

/// `⟨K1, K2⟩_{ℍ⊗²} = tr(W K1 W K2)` for symmetric kernels.
pub fn inner_h2<T: Scalar, A: Kernel<T> + ?Sized, B: Kernel<T> + ?Sized>(
    k1: &A,
    k2: &B,
    w: &GramWeights<T>,
) -> Result<T> {
    Weighted::new(k1, w)?.inner(&Weighted::new(k2, w)?)
}

/// The 1-contraction `K1 ⊗₁ K2 = K1 W K2` as a (generally non-symmetric) kernel.
pub fn contract1<T: Scalar, A: Kernel<T> + ?Sized, B: Kernel<T> + ?Sized>(
    k1: &A,
    k2: &B,
    w: &GramWeights<T>,
) -> Result<KernelMatrix<T>> {
    w.grid().ensure_same(k1.grid())?;
    w.grid().ensure_same(k2.grid())?;
    let wk2 = k2.gram_product(w)?;
    Ok(KernelMatrix {
        grid: *k1.grid(),
        k: k1.left_mul(wk2.view())?,
        symmetric: false,
    })
}

/// `‖K1 ⊗₁ K2‖²_{ℍ⊗²}` for symmetric kernels, without forming the contraction.
pub fn contraction_norm2<T: Scalar, A: Kernel<T> + ?Sized, B: Kernel<T> + ?Sized>(
    k1: &A,
    k2: &B,
    w: &GramWeights<T>,
) -> Result<T> {
    Weighted::new(k1, w)?.contraction_norm2(&Weighted::new(k2, w)?)
}

/// `b_T` from its defining double integral, `(1/T) Σ_ij w_ij B_ij` with
/// `B(s1,s2) = ∫_0^T k_t(s1) k_t(s2) dt = (e^{−θ|s1−s2|} − e^{−θ(2T−s1−s2)})/(2θ)`.
pub fn b_t_quadrature<T: Scalar>(params: &ModelParams<T>, w: &GramWeights<T>) -> Result<T> {
    let grid = w.grid();
    let kernels = PaperKernels::new(params, grid)?;
    let theta = params.theta();
    let exp = ExpKernel::new(*grid, T::one(), theta);
    let total = exp.weighted_trace(w) - kernels.h.weighted_trace(w);
    Ok(total / (T::of(2.0) * theta * params.horizon()))
}
