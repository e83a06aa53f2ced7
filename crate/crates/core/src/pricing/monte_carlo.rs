//! Monte Carlo validation oracle for the COS pricer.
//!
//! Full-truncation Euler on the Heston SDE with antithetic variates. The
//! oracle is only used to validate labels, never to generate them. Paths are
//! simulated in fixed-size blocks with per-block child streams, so the
//! result is deterministic for a given seed regardless of worker count.

use super::heston::HestonParams;
use super::PriceError;
use crate::mathcore::RngStream;
use rayon::prelude::*;

/// Default time resolution of the Euler scheme.
pub const STEPS_PER_YEAR: f64 = 250.0;

const N_BLOCKS: usize = 32;

/// A Monte Carlo price estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Estimates the call price (S0 = 1, K = 1/m) with `n_paths` full-truncation
/// Euler paths of `n_steps` steps. Paths are drawn as antithetic pairs, so
/// `n_paths` is rounded up to even.
pub fn mc_heston_oracle(
    p: &HestonParams,
    n_paths: usize,
    n_steps: usize,
    rng: &RngStream,
) -> Result<McEstimate, PriceError> {
    p.validate()?;
    if n_paths < 2 || n_steps == 0 {
        return Err(PriceError::Domain("need at least 2 paths and 1 step"));
    }
    let n_pairs = n_paths.div_ceil(2);
    let pairs_per_block = n_pairs.div_ceil(N_BLOCKS);

    let block_sums: Vec<(f64, f64, usize)> = (0..N_BLOCKS)
        .into_par_iter()
        .map(|b| {
            let lo = b * pairs_per_block;
            let hi = ((b + 1) * pairs_per_block).min(n_pairs);
            if lo >= hi {
                return (0.0, 0.0, 0);
            }
            let mut stream = rng.child(b as u64);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in lo..hi {
                let est = simulate_pair(p, n_steps, &mut stream);
                sum += est;
                sumsq += est * est;
            }
            (sum, sumsq, hi - lo)
        })
        .collect();

    let (sum, sumsq, count) = block_sums
        .iter()
        .fold((0.0, 0.0, 0usize), |(s, sq, c), &(bs, bsq, bc)| {
            (s + bs, sq + bsq, c + bc)
        });
    let n = count as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(McEstimate {
        price: mean,
        std_error: (var / n).sqrt(),
        n_paths: count * 2,
    })
}

/// Simulates one antithetic pair and returns the average discounted payoff.
fn simulate_pair(p: &HestonParams, n_steps: usize, rng: &mut RngStream) -> f64 {
    let dt = p.tau / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let rho_c = (1.0 - p.rho * p.rho).sqrt();
    let strike = 1.0 / p.m;
    let disc = (-p.r * p.tau).exp();

    let mut x = [0.0f64; 2];
    let mut v = [p.v0; 2];
    for _ in 0..n_steps {
        let n1 = rng.standard_normal();
        let n2 = rng.standard_normal();
        for (side, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let z1 = sign * n1;
            let z2 = p.rho * z1 + rho_c * sign * n2;
            let vp = v[side].max(0.0);
            let vol = vp.sqrt();
            x[side] += (p.r - 0.5 * vp) * dt + vol * sqrt_dt * z1;
            v[side] += p.kappa * (p.vbar - vp) * dt + p.gamma * vol * sqrt_dt * z2;
        }
    }
    let payoff = |lx: f64| disc * (lx.exp() - strike).max(0.0);
    0.5 * (payoff(x[0]) + payoff(x[1]))
}

/// Number of Euler steps at the default resolution for maturity `tau`.
pub fn default_steps(tau: f64) -> usize {
    (STEPS_PER_YEAR * tau).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{bs_scaled_call, BsInputs};

    #[test]
    fn deterministic_under_fixed_seed() {
        let p = HestonParams {
            m: 1.0,
            tau: 0.5,
            r: 0.02,
            rho: -0.5,
            kappa: 1.0,
            vbar: 0.1,
            gamma: 0.3,
            v0: 0.1,
        };
        let rng = RngStream::new(31);
        let a = mc_heston_oracle(&p, 20_000, 50, &rng).unwrap();
        let b = mc_heston_oracle(&p, 20_000, 50, &rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_limit_within_three_se() {
        let sigma = 0.2;
        let p = HestonParams {
            m: 1.0,
            tau: 0.5,
            r: 0.02,
            rho: -0.3,
            kappa: 1.0,
            vbar: sigma * sigma,
            gamma: 1e-8,
            v0: sigma * sigma,
        };
        let rng = RngStream::new(77);
        let est = mc_heston_oracle(&p, 200_000, default_steps(p.tau), &rng).unwrap();
        let bs = bs_scaled_call(&BsInputs::new(p.m, p.tau, p.r, sigma)).unwrap() / p.m;
        assert!(
            (est.price - bs).abs() <= 3.0 * est.std_error,
            "mc {} vs bs {bs}, se {}",
            est.price,
            est.std_error
        );
    }

    #[test]
    fn standard_error_scales_with_paths() {
        let p = HestonParams {
            m: 1.1,
            tau: 0.4,
            r: 0.05,
            rho: -0.6,
            kappa: 1.2,
            vbar: 0.2,
            gamma: 0.3,
            v0: 0.15,
        };
        let rng = RngStream::new(101);
        let small = mc_heston_oracle(&p, 40_000, 40, &rng).unwrap();
        let big = mc_heston_oracle(&p, 80_000, 40, &rng.child(1)).unwrap();
        let ratio = big.std_error / small.std_error;
        let expect = 1.0 / 2.0f64.sqrt();
        assert!(
            (ratio - expect).abs() <= 0.2 * expect,
            "se ratio {ratio} vs {expect}"
        );
    }
}
