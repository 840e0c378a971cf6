//! Dense and Toeplitz matrix helpers.
//!
//! Every routine here has a fixed reduction order: parallel work is split by
//! column pair or row and reassembled by index, so results do not depend on the
//! number of worker threads.

use std::sync::{Arc, OnceLock};

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Σ_ij a_ij b_ji = tr(ab)`.
pub fn trace_product<T: Scalar>(a: ArrayView2<T>, b: ArrayView2<T>) -> Result<T> {
    if a.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.ncols(),
        });
    }
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            actual: b.nrows(),
        });
    }
    let rows: Vec<T> = (0..a.nrows())
        .into_par_iter()
        .map(|i| a.row(i).dot(&b.column(i)))
        .collect();
    Ok(rows.into_iter().sum())
}

/// Lower Cholesky factor of a symmetric positive semidefinite matrix.
///
/// Zero pivots (exactly singular directions) are allowed; a pivot below
/// `-tol · max diagonal` is rejected.
pub fn cholesky<T: Scalar>(a: &Array2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let scale = a.diag().iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = T::epsilon() * T::of(64.0) * T::of_usize(n.max(1)) * scale;
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d < -tol {
            return Err(Error::NotPositiveSemidefinite {
                pivot: j,
                value: d.f64(),
            });
        }
        let pivot = d.max(T::zero()).sqrt();
        l[[j, j]] = pivot;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = if pivot > T::zero() { s / pivot } else { T::zero() };
        }
    }
    Ok(l)
}

struct Spectrum<T: Scalar> {
    size: usize,
    eigenvalues: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

/// Symmetric Toeplitz matrix stored by its first row.
pub struct SymmetricToeplitz<T: Scalar> {
    row: Vec<T>,
    spectrum: OnceLock<Spectrum<T>>,
}

impl<T: Scalar> Clone for SymmetricToeplitz<T> {
    fn clone(&self) -> Self {
        Self::new(self.row.clone())
    }
}

impl<T: Scalar> std::fmt::Debug for SymmetricToeplitz<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetricToeplitz").field("row", &self.row).finish()
    }
}

impl<T: Scalar> SymmetricToeplitz<T> {
    pub fn new(row: Vec<T>) -> Self {
        Self {
            row,
            spectrum: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    pub fn first_row(&self) -> &[T] {
        &self.row
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.row[i.abs_diff(j)]
    }

    pub fn to_dense(&self) -> Array2<T> {
        let n = self.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.get(i, j))
    }

    /// `xᵀ A y`, summed directly in `O(n²)` without transforms.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let n = self.len();
        let rows: Vec<T> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = T::zero();
                for (j, &yj) in y.iter().enumerate() {
                    acc += self.row[i.abs_diff(j)] * yj;
                }
                x[i] * acc
            })
            .collect();
        rows.into_iter().sum()
    }

    /// `Σ_ij a_ij m_ij`.
    pub fn frobenius_inner(&self, m: ArrayView2<T>) -> T {
        let rows: Vec<T> = (0..m.nrows())
            .into_par_iter()
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (j, &v)| acc + self.row[i.abs_diff(j)] * v)
            })
            .collect();
        rows.into_iter().sum()
    }

    fn spectrum(&self) -> &Spectrum<T> {
        self.spectrum.get_or_init(|| {
            let n = self.len();
            let size = (2 * n).next_power_of_two().max(2);
            let mut embed = vec![Complex::new(T::zero(), T::zero()); size];
            for (k, &v) in self.row.iter().enumerate() {
                embed[k].re = v;
                if k > 0 {
                    embed[size - k].re = v;
                }
            }
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            forward.process(&mut embed);
            let norm = T::one() / T::of_usize(size);
            let eigenvalues = embed.iter().map(|c| c.re * norm).collect();
            Spectrum {
                size,
                eigenvalues,
                forward,
                inverse,
            }
        })
    }

    fn convolve_pair(&self, a: &[T], b: Option<&[T]>) -> (Vec<T>, Vec<T>) {
        let spec = self.spectrum();
        let n = self.len();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); spec.size];
        for k in 0..n {
            buf[k] = Complex::new(a[k], b.map_or(T::zero(), |b| b[k]));
        }
        spec.forward.process(&mut buf);
        for (c, &lam) in buf.iter_mut().zip(spec.eigenvalues.iter()) {
            *c = *c * lam;
        }
        spec.inverse.process(&mut buf);
        let re = buf[..n].iter().map(|c| c.re).collect();
        let im = buf[..n].iter().map(|c| c.im).collect();
        (re, im)
    }

    /// `A x` by FFT convolution.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len(), "vector length must match the Toeplitz order");
        self.convolve_pair(x, None).0
    }

    /// `A M`, column by column; two real columns share one complex transform.
    pub fn apply_matrix(&self, m: ArrayView2<T>) -> Result<Array2<T>> {
        let n = self.len();
        if m.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.nrows(),
            });
        }
        let cols = m.ncols();
        let columns: Vec<Vec<T>> = (0..cols).map(|j| m.column(j).to_vec()).collect();
        let pairs: Vec<(Vec<T>, Vec<T>)> = (0..cols.div_ceil(2))
            .into_par_iter()
            .map(|p| {
                let j = 2 * p;
                self.convolve_pair(&columns[j], columns.get(j + 1).map(|c| c.as_slice()))
            })
            .collect();
        let mut out = Array2::<T>::zeros((n, cols));
        for (p, (re, im)) in pairs.into_iter().enumerate() {
            let j = 2 * p;
            for i in 0..n {
                out[[i, j]] = re[i];
            }
            if j + 1 < cols {
                for i in 0..n {
                    out[[i, j + 1]] = im[i];
                }
            }
        }
        Ok(out)
    }
}
