//! Strike-scaled Black-Scholes pricing, vega, implied-volatility inversion
//! and the time-value transform.
//!
//! Everything works per unit strike: with moneyness m = S0/K, the scaled
//! call price is pi/K = m Phi(d1) - e^{-r tau} Phi(d2) with
//! d1 = [log m + (r + sigma^2/2) tau] / (sigma sqrt(tau)), d2 = d1 - sigma sqrt(tau).

use super::PriceError;
use crate::mathcore::{std_normal_cdf, std_normal_pdf};

/// Inputs for one scaled Black-Scholes evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsInputs {
    /// Moneyness S0/K.
    pub m: f64,
    /// Time to maturity in years.
    pub tau: f64,
    /// Risk-free rate per year.
    pub r: f64,
    /// Volatility per sqrt(year).
    pub sigma: f64,
}

impl BsInputs {
    pub fn new(m: f64, tau: f64, r: f64, sigma: f64) -> Self {
        BsInputs { m, tau, r, sigma }
    }

    fn validate(&self) -> Result<(), PriceError> {
        if !(self.m.is_finite() && self.tau.is_finite() && self.r.is_finite() && self.sigma.is_finite()) {
            return Err(PriceError::Domain("non-finite input"));
        }
        if self.m <= 0.0 {
            return Err(PriceError::Domain("moneyness must be positive"));
        }
        if self.tau <= 0.0 {
            return Err(PriceError::Domain("maturity must be positive"));
        }
        if self.sigma <= 0.0 {
            return Err(PriceError::Domain("volatility must be positive"));
        }
        if self.r < 0.0 {
            return Err(PriceError::Domain("rate must be nonnegative"));
        }
        Ok(())
    }
}

/// Scaled intrinsic value (m - e^{-r tau})^+.
pub fn intrinsic_value(m: f64, tau: f64, r: f64) -> f64 {
    (m - (-r * tau).exp()).max(0.0)
}

/// Scaled call price pi/K.
pub fn bs_scaled_call(inputs: &BsInputs) -> Result<f64, PriceError> {
    inputs.validate()?;
    let BsInputs { m, tau, r, sigma } = *inputs;
    let st = sigma * tau.sqrt();
    let d1 = (m.ln() + (r + 0.5 * sigma * sigma) * tau) / st;
    let d2 = d1 - st;
    let price = m * std_normal_cdf(d1) - (-r * tau).exp() * std_normal_cdf(d2);
    // cancellation can land 1 ulp below the no-arbitrage floor when the
    // time value is smaller than the rounding of the subtraction
    Ok(price.max(intrinsic_value(m, tau, r)))
}

/// Scaled vega d(pi/K)/d(sigma) = m phi(d1) sqrt(tau).
pub fn bs_vega_scaled(inputs: &BsInputs) -> Result<f64, PriceError> {
    inputs.validate()?;
    let BsInputs { m, tau, r, sigma } = *inputs;
    let st = sigma * tau.sqrt();
    let d1 = (m.ln() + (r + 0.5 * sigma * sigma) * tau) / st;
    Ok(m * std_normal_pdf(d1) * tau.sqrt())
}

const IV_SIGMA_LO: f64 = 1e-6;
const IV_SIGMA_HI: f64 = 5.0;
const IV_MAX_ITER: usize = 100;
const IV_PRICE_TOL: f64 = 1e-12;

/// Inverts the scaled call price to the volatility: Newton iteration seeded
/// at sigma = 0.5 using the analytic vega, safeguarded by bisection on
/// [1e-6, 5] whenever a Newton step leaves the bracket.
pub fn implied_vol(price: f64, m: f64, tau: f64, r: f64) -> Result<f64, PriceError> {
    let lo_band = intrinsic_value(m, tau, r);
    let hi_band = m;
    if !(price > lo_band && price < hi_band) {
        return Err(PriceError::NoSolution {
            price,
            lo: lo_band,
            hi: hi_band,
        });
    }

    let f = |sigma: f64| -> Result<f64, PriceError> {
        Ok(bs_scaled_call(&BsInputs::new(m, tau, r, sigma))? - price)
    };

    let mut lo = IV_SIGMA_LO;
    let mut hi = IV_SIGMA_HI;
    let f_lo = f(lo)?;
    if f_lo > 0.0 {
        // price below the value reachable at the smallest bracket vol; the
        // closest admissible answer is the bracket edge
        return if f_lo.abs() <= IV_PRICE_TOL {
            Ok(lo)
        } else {
            Err(PriceError::NoSolution {
                price,
                lo: lo_band,
                hi: hi_band,
            })
        };
    }
    if f(hi)? < 0.0 {
        return Err(PriceError::NoSolution {
            price,
            lo: lo_band,
            hi: hi_band,
        });
    }

    let mut sigma = 0.5;
    for _ in 0..IV_MAX_ITER {
        let fv = f(sigma)?;
        if fv.abs() <= IV_PRICE_TOL {
            return Ok(sigma);
        }
        if fv > 0.0 {
            hi = sigma;
        } else {
            lo = sigma;
        }
        let vega = bs_vega_scaled(&BsInputs::new(m, tau, r, sigma))?;
        let newton = sigma - fv / vega;
        sigma = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let fv = f(sigma)?;
    if fv.abs() <= IV_PRICE_TOL {
        Ok(sigma)
    } else {
        Err(PriceError::NoConvergence(IV_MAX_ITER))
    }
}

/// Floor applied to the scaled time value before the log transform;
/// log(1e-8) = -18.4207... is the lower edge of the transformed input range.
pub const TIME_VALUE_FLOOR: f64 = 1e-8;

/// Maps a scaled price to the log of its scaled time value,
/// log(max(price - intrinsic, 1e-8)). Prices below intrinsic by more than
/// 1e-12 are rejected; underflowing time values clamp to the floor.
pub fn time_value_forward(price: f64, m: f64, tau: f64, r: f64) -> Result<f64, PriceError> {
    let intrinsic = intrinsic_value(m, tau, r);
    if price < intrinsic - 1e-12 {
        return Err(PriceError::Domain("price below intrinsic value"));
    }
    Ok((price - intrinsic).max(TIME_VALUE_FLOOR).ln())
}

/// Inverse of [`time_value_forward`]: exp(logtv) + (m - e^{-r tau})^+.
pub fn time_value_inverse(logtv: f64, m: f64, tau: f64, r: f64) -> f64 {
    logtv.exp() + intrinsic_value(m, tau, r)
}
