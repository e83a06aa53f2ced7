//! Property tests for the numerical invariants.

use pricenet::mathcore::{apply_activation, std_normal_cdf, ActivationKind, Vec64};
use pricenet::pricing::{
    bs_scaled_call, intrinsic_value, time_value_forward, time_value_inverse, BsInputs,
};
use proptest::prelude::*;

proptest! {
    #[test]
    // |x| < 36: past that the sigmoid saturates to exactly 1.0 in f64
    fn activation_ranges(xs in prop::collection::vec(-36.0f64..36.0, 1..32)) {
        let v = Vec64::from_vec(xs);
        let sig = apply_activation(ActivationKind::Sigmoid, &v).unwrap();
        prop_assert!(sig.iter().all(|&y| y > 0.0 && y < 1.0));
        let tanh = apply_activation(ActivationKind::Tanh, &v).unwrap();
        prop_assert!(tanh.iter().all(|&y| (-1.0..=1.0).contains(&y)));
        let relu = apply_activation(ActivationKind::Relu, &v).unwrap();
        prop_assert!(relu.iter().all(|&y| y >= 0.0));
        let sm = apply_activation(ActivationKind::Softmax, &v).unwrap();
        let total: f64 = sm.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(sm.iter().all(|&y| y >= 0.0));
    }

    #[test]
    fn cdf_symmetry(x in -37.0f64..37.0) {
        prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn no_arbitrage_band(
        m in 0.4f64..1.6,
        tau in 0.2f64..1.1,
        r in 0.02f64..0.1,
        sigma in 0.01f64..1.0,
    ) {
        let price = bs_scaled_call(&BsInputs::new(m, tau, r, sigma)).unwrap();
        prop_assert!(price >= intrinsic_value(m, tau, r));
        prop_assert!(price < m);
        prop_assert!(price.is_finite());
    }

    #[test]
    fn time_value_round_trip(
        m in 0.4f64..1.6,
        tau in 0.2f64..1.1,
        r in 0.02f64..0.1,
        // time values below the 1e-8 floor clamp and cannot round-trip
        tv in 1e-7f64..0.3,
    ) {
        let price = intrinsic_value(m, tau, r) + tv;
        let logtv = time_value_forward(price, m, tau, r).unwrap();
        let back = time_value_inverse(logtv, m, tau, r);
        prop_assert!((back - price).abs() <= 1e-12);
    }
}
