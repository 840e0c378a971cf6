//! Simulation and Wiener-chaos numerics for the least-squares drift estimator
//! of the fractional Ornstein–Uhlenbeck process
//! `dX_t = −θ X_t dt + dB^H_t`, `X_0 = 0`, `H ∈ [1/2, 3/4]`.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision types used by the CLI.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod fgn;
pub mod hilbert;
pub mod linalg;
pub mod montecarlo;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelParams64 = constants::ModelParams<f64>;
pub type Grid64 = fgn::Grid<f64>;
pub type GramWeights64 = fgn::GramWeights<f64>;
pub type NoisePath64 = fgn::NoisePath<f64>;
pub type KernelMatrix64 = hilbert::KernelMatrix<f64>;
pub type FouPath64 = process::FouPath<f64>;
pub type ChaosRatio64 = process::ChaosRatio<f64>;
pub type BoundTerms64 = bounds::BoundTerms<f64>;
pub type AsymptoticsRow64 = bounds::AsymptoticsRow<f64>;
pub type MCConfig64 = montecarlo::MCConfig<f64>;
pub type MCReport64 = montecarlo::MCReport<f64>;
