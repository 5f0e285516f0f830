//! Random-sample-size limit theorems, checked numerically.
//!
//! The crate builds the count family `s^j φ((1 - s^k)/θ)` from a Laplace
//! transform `φ`, simulates random sums and bivariate random maxima with such
//! counts, and measures how far the simulated or analytically composed laws are
//! from the `φ(ψ)` and `φ(T)` limits as `θ ↓ 0`.
//!
//! Module map:
//!
//! * [`transforms`]: Laplace transforms, characteristic exponents, exponent
//!   measures and the compositions built from them.
//! * [`pgf_family`]: the count family, its mass function and sampler, and the
//!   scaling-law diagnostics.
//! * [`sum_limits`]: random sums, the `(1 - h_θ)/θ → ψ` criterion and attraction.
//! * [`max_limits`]: random maxima, subordination and max-attraction.
//! * [`convergence_stats`]: empirical transforms, distances, trend verdicts and
//!   reproducible random streams.
//! * [`cli`]: configuration-driven experiment runner behind the `philab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convergence_stats;
pub mod error;
pub mod max_limits;
pub mod pgf_family;
pub mod sum_limits;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64 as ComplexValue;
