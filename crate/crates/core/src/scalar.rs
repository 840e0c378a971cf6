//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point type the library computes in: `f32` or `f64`.
///
/// Special functions (Γ, erfc) are evaluated in `f64` through `libm` and cast
/// back, so `f32` results carry `f32` precision at best.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + LinalgScalar
    + ScalarOperand
    + FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless for `f64`, rounding for `f32`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("float conversion from f64 is total")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("float conversion from usize is total")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("float conversion to f64 is total")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
