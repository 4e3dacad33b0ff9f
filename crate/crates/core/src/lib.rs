//! Monte Carlo laboratory for the concentration of empirical moment tensors
//! of subgaussian random vectors.
//!
//! The estimation error `sup_{v in T} |(1/N) sum_i <X_i, v>^p - E <X, v>^p|`
//! is computed lazily from an `N x d` sample, compared against the
//! `gamma(T)^p + sqrt(N) gamma(T) rad(T)^{p-1}` rate, and the probabilistic
//! ingredients behind that rate (order statistics of subgaussian samples,
//! the l^p matrix deviation process, symmetrization) are verified
//! empirically with fitted constants.

pub mod complexity;
pub mod deviation;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod order_stats;
pub mod seed;
pub mod sphere_norm;
pub mod stats;
pub mod tensor_moments;

pub use error::{LabError, Result};
