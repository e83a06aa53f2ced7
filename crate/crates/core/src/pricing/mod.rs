//! Ground-truth label generators: the strike-scaled Black-Scholes call
//! price, implied-volatility inversion, the time-value/log transform, the
//! Heston characteristic function with a COS pricer, and a Monte Carlo
//! validation oracle.

mod black_scholes;
mod heston;
mod monte_carlo;

pub use black_scholes::{
    bs_scaled_call, bs_vega_scaled, implied_vol, intrinsic_value, time_value_forward,
    time_value_inverse, BsInputs, TIME_VALUE_FLOOR,
};
pub use heston::{heston_char_fn, heston_cos_call, heston_cos_scaled_call, CosSettings, HestonParams};
pub use monte_carlo::{default_steps, mc_heston_oracle, McEstimate, STEPS_PER_YEAR};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PriceError {
    #[error("input outside pricing domain: {0}")]
    Domain(&'static str),
    #[error("price {price} lies outside the no-arbitrage band ({lo}, {hi})")]
    NoSolution { price: f64, lo: f64, hi: f64 },
    #[error("implied volatility solver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("COS truncation interval is degenerate")]
    Truncation,
}
