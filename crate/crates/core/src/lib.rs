//! Hybrid Poisson-Gaussian noise on a unity-envelope channel.
//!
//! The received signal is `Y = X + Z` with `Z = N1 + N2`, a Poisson shot-noise
//! count plus Gaussian thermal noise. The crate evaluates the density of `Z`,
//! differential entropies of `Z` and `Y`, the mutual information between the
//! transmit point estimate and the output, and the capacity obtained by
//! maximizing that information over the point estimate. A seeded Monte-Carlo
//! sampler backs every analytic quantity with an independent check.

pub mod capacity;
pub mod cli;
pub mod error;
pub mod mc_oracle;
pub mod noise_model;
pub mod quadrature;
pub mod signal_model;

pub use error::{Error, Result};
