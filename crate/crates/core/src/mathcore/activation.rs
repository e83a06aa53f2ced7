//! Activation functions, their derivatives, and the standard normal CDF.

use super::{MathError, Vec64};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// The activation functions used across the architectures. Softmax is a
/// whole-vector transform; all other kinds act elementwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Relu,
    Gelu,
    Softmax,
    Identity,
}

impl ActivationKind {
    /// Elementwise evaluation. Not defined for Softmax.
    #[inline]
    pub(crate) fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Gelu => x * std_normal_cdf(x),
            ActivationKind::Identity => x,
            ActivationKind::Softmax => unreachable!("softmax is not elementwise"),
        }
    }

    /// Elementwise derivative at the pre-activation `x`. ReLU uses the
    /// subgradient 0 at the kink. Not defined for Softmax.
    #[inline]
    pub(crate) fn deriv(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => {
                let s = 1.0 / (1.0 + (-x).exp());
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Gelu => std_normal_cdf(x) + x * std_normal_pdf(x),
            ActivationKind::Identity => 1.0,
            ActivationKind::Softmax => unreachable!("softmax derivative unsupported"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Relu => "relu",
            ActivationKind::Gelu => "gelu",
            ActivationKind::Softmax => "softmax",
            ActivationKind::Identity => "identity",
        }
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "relu" => Ok(ActivationKind::Relu),
            "gelu" => Ok(ActivationKind::Gelu),
            "softmax" => Ok(ActivationKind::Softmax),
            "identity" => Ok(ActivationKind::Identity),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

/// Standard normal cumulative distribution function, accurate to ~1 ulp via
/// the complementary error function; saturates cleanly in the tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Applies `kind` to `x`: elementwise for all kinds except Softmax, which
/// maps the whole vector to a probability vector (max-shifted for stability).
pub fn apply_activation(kind: ActivationKind, x: &Vec64) -> Result<Vec64, MathError> {
    if !x.all_finite() {
        return Err(MathError::NonFinite("apply_activation input"));
    }
    match kind {
        ActivationKind::Softmax => {
            let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            Ok(exps.into_iter().map(|e| e / sum).collect())
        }
        _ => Ok(x.iter().map(|&v| kind.eval(v)).collect()),
    }
}

/// Elementwise derivative of `kind` at the pre-activations `x`. Softmax is
/// not elementwise and is rejected.
pub fn activation_derivative(kind: ActivationKind, x: &Vec64) -> Result<Vec64, MathError> {
    if kind == ActivationKind::Softmax {
        return Err(MathError::UnsupportedActivation("softmax"));
    }
    if !x.all_finite() {
        return Err(MathError::NonFinite("activation_derivative input"));
    }
    Ok(x.iter().map(|&v| kind.deriv(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pricenet_oracles::norm_cdf_ref;

    fn v(x: &[f64]) -> Vec64 {
        Vec64::from_vec(x.to_vec())
    }

    #[test]
    fn activation_point_values() {
        let out = apply_activation(ActivationKind::Sigmoid, &v(&[0.0])).unwrap();
        assert_eq!(out[0], 0.5);
        let out = apply_activation(ActivationKind::Relu, &v(&[-2.0, 3.0])).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 3.0]);
        let out = apply_activation(ActivationKind::Gelu, &v(&[0.0])).unwrap();
        assert_eq!(out[0], 0.0);
        let out = apply_activation(ActivationKind::Softmax, &v(&[1.0, 1.0, 1.0])).unwrap();
        for &p in out.iter() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_point_values() {
        let out = activation_derivative(ActivationKind::Sigmoid, &v(&[0.0])).unwrap();
        assert_eq!(out[0], 0.25);
        let out = activation_derivative(ActivationKind::Tanh, &v(&[0.0])).unwrap();
        assert_eq!(out[0], 1.0);
        let out = activation_derivative(ActivationKind::Relu, &v(&[0.0])).unwrap();
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn softmax_derivative_rejected() {
        assert!(matches!(
            activation_derivative(ActivationKind::Softmax, &v(&[0.0])),
            Err(MathError::UnsupportedActivation(_))
        ));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(apply_activation(ActivationKind::Tanh, &v(&[f64::NAN])).is_err());
        assert!(apply_activation(ActivationKind::Relu, &v(&[f64::INFINITY])).is_err());
    }

    #[test]
    fn cdf_point_values_against_reference() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        // 97.5% quantile of the standard normal
        assert!((std_normal_cdf(1.959963985) - 0.975).abs() < 1e-9);
        assert!(std_normal_cdf(-8.0) <= 1e-15);
        for i in 0..200 {
            let x = -6.0 + 0.06 * f64::from(i);
            assert!((std_normal_cdf(x) - norm_cdf_ref(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn cdf_symmetry_and_monotone() {
        // strict monotonicity checked where consecutive values stay
        // resolvable in f64; beyond |x| ~ 7 the cdf saturates toward 1
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let x = -6.0 + 12.0 * f64::from(i) / 1000.0;
            let p = std_normal_cdf(x);
            assert!(p > prev, "cdf not strictly increasing at {x}");
            prev = p;
        }
        for i in 0..=1000 {
            let x = -8.0 + 16.0 * f64::from(i) / 1000.0;
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn elementwise_derivative_matches_finite_difference() {
        use crate::mathcore::RngStream;
        let kinds = [
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Relu,
            ActivationKind::Gelu,
            ActivationKind::Identity,
        ];
        let mut rng = RngStream::new(20240517);
        for kind in kinds {
            for _ in 0..100 {
                let mut x = rng.range(-4.0, 4.0);
                // keep clear of the ReLU kink where the FD stencil straddles 0
                if kind == ActivationKind::Relu && x.abs() < 1e-3 {
                    x += 0.01;
                }
                let h = 1e-6;
                let fd = (kind.eval(x + h) - kind.eval(x - h)) / (2.0 * h);
                let an = kind.deriv(x);
                let denom = an.abs().max(fd.abs()).max(1e-8);
                assert!(
                    ((fd - an) / denom).abs() <= 1e-6,
                    "{kind} derivative mismatch at {x}: fd={fd} an={an}"
                );
            }
        }
    }
}
