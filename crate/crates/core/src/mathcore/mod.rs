//! Deterministic numerical primitives: vectors and matrices, activation
//! functions and their derivatives, the standard normal CDF, weight
//! initializers, and a seedable RNG stream.

mod activation;
mod init;
mod matrix;
mod rng;

pub use activation::{
    activation_derivative, apply_activation, std_normal_cdf, std_normal_pdf, ActivationKind,
};
pub use init::{init_glorot, init_he};
pub use matrix::{affine, Mat64, Vec64};
pub use rng::RngStream;

use thiserror::Error;

/// Errors raised by the numerical primitives.
#[derive(Debug, Error, PartialEq)]
pub enum MathError {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("fan-in and fan-out must be at least 1")]
    ZeroFan,
    #[error("activation kind {0} is not supported here")]
    UnsupportedActivation(&'static str),
}
