//! Independent reference implementations used to cross-check the main
//! library. Nothing here shares code with `pricenet`: the error function is
//! evaluated from its power series and Laplace continued fraction rather
//! than a rational approximation, and the Black-Scholes reference price is
//! assembled from those primitives alone.

const FRAC_2_SQRT_PI: f64 = 1.1283791670955126;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// erf(x) from the confluent-hypergeometric series
/// erf(x) = (2/sqrt(pi)) x e^{-x^2} sum_{n>=0} (2x^2)^n / (1*3*...*(2n+1)).
/// All terms are positive, so there is no cancellation; used for |x| < 3.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / (2.0 * f64::from(n) + 1.0);
        sum += term;
        if term < 1e-18 * sum || n > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x2).exp() * sum
}

/// erfc(x) for x >= 3 from the Laplace continued fraction
/// erfc(x) = e^{-x^2}/(x sqrt(pi)) * 1/(1 + q/(1 + 2q/(1 + 3q/(1 + ...))))
/// with q = 1/(2x^2), evaluated bottom-up.
fn erfc_cf(x: f64) -> f64 {
    let q = 0.5 / (x * x);
    let mut f = 1.0;
    for k in (1..=60).rev() {
        f = 1.0 + f64::from(k) * q / f;
    }
    (-x * x).exp() / (x * std::f64::consts::PI.sqrt() * f)
}

/// Complementary error function, accurate to ~1e-15 relative over the real line.
pub fn erfc_ref(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_ref(-x)
    } else if x < 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Error function companion to [`erfc_ref`].
pub fn erf_ref(x: f64) -> f64 {
    if x.abs() < 3.0 {
        erf_series(x)
    } else {
        1.0 - erfc_ref(x)
    }
}

/// Standard normal CDF built on the reference erfc.
pub fn norm_cdf_ref(x: f64) -> f64 {
    0.5 * erfc_ref(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf_ref(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Strike-scaled Black-Scholes call price pi/K for spot-to-strike ratio `m`,
/// maturity `tau` (years), rate `r` and volatility `sigma`.
pub fn bs_scaled_call_ref(m: f64, tau: f64, r: f64, sigma: f64) -> f64 {
    let st = sigma * tau.sqrt();
    let d1 = (m.ln() + (r + 0.5 * sigma * sigma) * tau) / st;
    let d2 = d1 - st;
    m * norm_cdf_ref(d1) - (-r * tau).exp() * norm_cdf_ref(d2)
}

/// Strike-scaled Black-Scholes vega d(pi/K)/d(sigma).
pub fn bs_vega_scaled_ref(m: f64, tau: f64, r: f64, sigma: f64) -> f64 {
    let st = sigma * tau.sqrt();
    let d1 = (m.ln() + (r + 0.5 * sigma * sigma) * tau) / st;
    m * norm_pdf_ref(d1) * tau.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_known_values() {
        // Abramowitz & Stegun 7.1; 16-digit values.
        assert!((erf_ref(0.5) - 0.5204998778130465).abs() < 1e-15);
        assert!((erf_ref(1.0) - 0.8427007929497149).abs() < 1e-15);
        assert!((erf_ref(2.0) - 0.9953222650189527).abs() < 1e-15);
        assert!((erfc_ref(4.0) - 1.541725790028002e-8).abs() < 1e-22);
    }

    #[test]
    fn cdf_symmetry_and_tail() {
        for &x in &[0.0, 0.3, 1.0, 2.5, 5.0] {
            assert!((norm_cdf_ref(x) + norm_cdf_ref(-x) - 1.0).abs() < 1e-15);
        }
        // Phi(-8) = 6.22096e-16
        assert!(norm_cdf_ref(-8.0) < 1e-15);
        assert!(norm_cdf_ref(-8.0) > 0.0);
    }

    #[test]
    fn series_cf_crossover_is_smooth() {
        let below = erfc_ref(3.0 - 1e-12);
        let above = erfc_ref(3.0 + 1e-12);
        assert!((below - above).abs() / below < 1e-12);
    }
}
