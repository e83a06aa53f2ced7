//! Central finite-difference validation of the hand-derived backward passes
//! for every architecture. The finite-difference side only ever calls the
//! forward pass, so it is independent of the code it checks.

use pricenet::mathcore::{ActivationKind, Mat64, RngStream, Vec64};
use pricenet::nn::{
    init_params, network_backward, network_forward, InitKind, LayerKind, NetworkSpec, ParamSet,
};
use pricenet::optim::mse_loss;

const KINDS: [LayerKind; 7] = [
    LayerKind::Dense,
    LayerKind::Residual,
    LayerKind::Highway,
    LayerKind::GeneralizedHighway,
    LayerKind::Dgm,
    LayerKind::DeepDgm(3),
    LayerKind::NoRecDgm,
];

fn small_spec(kind: LayerKind) -> NetworkSpec {
    NetworkSpec {
        input_dim: 4,
        layers: 2,
        nodes: 5,
        kind,
        hidden_act: ActivationKind::Tanh,
        gate_act: ActivationKind::Tanh,
        init: InitKind::GlorotNormal,
    }
}

fn random_batch(rows: usize, cols: usize, rng: &mut RngStream) -> (Mat64, Vec64) {
    let mut x = Mat64::zeros(rows, cols);
    for v in x.as_mut_slice() {
        *v = rng.range(-1.0, 1.0);
    }
    let y: Vec64 = (0..rows).map(|_| rng.range(0.0, 1.0)).collect();
    (x, y)
}

fn batch_loss(spec: &NetworkSpec, params: &ParamSet, x: &Mat64, y: &Vec64) -> f64 {
    let (preds, _) = network_forward(spec, params, x).unwrap();
    mse_loss(&preds, y).unwrap().0
}

/// Maximum relative error between the analytic gradient and central finite
/// differences over every parameter.
///
/// The denominator floor is scaled to the gradient norm: at step 1e-6 the
/// difference quotient itself carries ~eps*J/h ~ 1e-10 of rounding noise,
/// so entries more than a factor 1e3 below the dominant gradient cannot be
/// resolved to 1e-6 relative by any central difference. Structural errors
/// (wrong sign, missing term) perturb entries at their own magnitude and
/// stay visible.
fn max_rel_error(spec: &NetworkSpec, params: &ParamSet, x: &Mat64, y: &Vec64) -> f64 {
    let (preds, cache) = network_forward(spec, params, x).unwrap();
    let (_, dpreds) = mse_loss(&preds, y).unwrap();
    let analytic = network_backward(spec, params, &cache, &dpreds)
        .unwrap()
        .flatten();
    let norm = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-3 * norm).max(1e-8);

    let flat = params.flatten();
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for i in 0..flat.len() {
        let h = 1e-6 * flat[i].abs().max(1.0);
        let mut bumped = flat.clone();
        bumped[i] = flat[i] + h;
        probe.unflatten(&bumped).unwrap();
        let up = batch_loss(spec, &probe, x, y);
        bumped[i] = flat[i] - h;
        probe.unflatten(&bumped).unwrap();
        let down = batch_loss(spec, &probe, x, y);
        let fd = (up - down) / (2.0 * h);
        let rel = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for (k, kind) in KINDS.iter().enumerate() {
        let spec = small_spec(*kind);
        for draw in 0..5 {
            let seed = 1000 * (k as u64 + 1) + draw;
            let params = init_params(&spec, seed).unwrap();
            let mut rng = RngStream::new(seed ^ 0xABCD);
            let (x, y) = random_batch(8, spec.input_dim, &mut rng);
            let worst = max_rel_error(&spec, &params, &x, &y);
            assert!(
                worst <= 1e-6,
                "{kind:?} draw {draw}: max relative gradient error {worst:.3e}"
            );
        }
    }
}

#[test]
fn gradcheck_catches_a_broken_gradient() {
    // sanity for the checker itself: perturbing one analytic gradient entry
    // must blow the relative error far past the tolerance
    let spec = small_spec(LayerKind::Highway);
    let params = init_params(&spec, 33).unwrap();
    let mut rng = RngStream::new(34);
    let (x, y) = random_batch(8, 4, &mut rng);
    let (preds, cache) = network_forward(&spec, &params, &x).unwrap();
    let (_, dpreds) = mse_loss(&preds, &y).unwrap();
    let mut grads = network_backward(&spec, &params, &cache, &dpreds).unwrap();
    let mut flat = grads.flatten();
    flat[7] += 0.5;
    grads.unflatten(&flat).unwrap();

    // recompute fd for that entry and compare against the corrupted value
    let theta = params.flatten();
    let mut probe = params.clone();
    let h = 1e-6 * theta[7].abs().max(1.0);
    let mut bumped = theta.clone();
    bumped[7] += h;
    probe.unflatten(&bumped).unwrap();
    let up = batch_loss(&spec, &probe, &x, &y);
    bumped[7] = theta[7] - h;
    probe.unflatten(&bumped).unwrap();
    let down = batch_loss(&spec, &probe, &x, &y);
    let fd = (up - down) / (2.0 * h);
    let rel = (fd - flat[7]).abs() / fd.abs().max(flat[7].abs()).max(1e-8);
    assert!(rel > 1e-2, "checker failed to flag a corrupted gradient");
}
