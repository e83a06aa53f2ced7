//! Numerical library and benchmark components for learning option prices
//! and implied volatilities with small feed-forward, highway and DGM-style
//! networks.
//!
//! The crate is organized along the pipeline:
//!
//! * [`mathcore`] - dense linear algebra on `f64`, activations, the standard
//!   normal CDF, weight initializers and a reproducible RNG stream.
//! * [`pricing`] - Black-Scholes scaled call prices, implied volatility
//!   inversion, the time-value transform, the Heston characteristic function
//!   with a COS pricer, and a Monte Carlo validation oracle.
//! * [`sampling`] - Latin hypercube sampling over the problem parameter
//!   boxes, dataset construction with ground-truth labels, splitting, and a
//!   plain-text serialization format.
//! * [`nn`] - seven layer architectures with hand-derived backward passes,
//!   network assembly and parameter counting.
//! * [`optim`] - MSE loss, SGD/Adam steps, the mini-batch training loop and
//!   evaluation.

pub mod mathcore;
pub mod nn;
pub mod optim;
pub mod pricing;
pub mod sampling;
