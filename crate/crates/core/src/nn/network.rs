//! Network assembly: initialization, batched forward pass with cached
//! activations, and the hand-derived backward pass.

use super::layers::{
    affine_batch, batch_dense_bwd, batch_dense_fwd, batch_dgm_bwd, batch_dgm_fwd,
    batch_gen_highway_bwd, batch_gen_highway_fwd, batch_highway_bwd, batch_highway_fwd,
    batch_residual_bwd, batch_residual_fwd, BGate, DenseCache, DgmCache, GenHighwayCache,
    HighwayCache,
};
use super::{init_glorot_or_he, spec_entries, LayerKind, NetError, NetworkSpec, Shape};
use super::params::ParamSet;
use crate::mathcore::{Mat64, RngStream, Vec64};

/// Per-layer cached forward quantities needed by backpropagation.
pub(crate) enum LayerCache {
    Dense(DenseCache),
    Highway(HighwayCache),
    GenHighway(GenHighwayCache),
    Dgm(DgmCache),
}

impl LayerCache {
    fn out(&self) -> &Mat64 {
        match self {
            LayerCache::Dense(c) => &c.out,
            LayerCache::Highway(c) => &c.out,
            LayerCache::GenHighway(c) => &c.out,
            LayerCache::Dgm(c) => &c.out,
        }
    }
}

/// Cached activations for one mini-batch forward pass.
pub struct ForwardCache {
    x: Mat64,
    proj_out: Option<Mat64>,
    layers: Vec<LayerCache>,
    preds: Vec64,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.x.rows()
    }

    pub fn predictions(&self) -> &Vec64 {
        &self.preds
    }
}

/// Entry-index bookkeeping over the canonical parameter order.
struct Layout {
    kind: LayerKind,
    entries_per_layer: usize,
    has_proj: bool,
    layers: usize,
}

impl Layout {
    fn of(spec: &NetworkSpec) -> Self {
        let entries_per_layer = match spec.kind {
            LayerKind::Dense | LayerKind::Residual => 2,
            LayerKind::Highway => 4,
            LayerKind::GeneralizedHighway => 6,
            LayerKind::Dgm | LayerKind::DeepDgm(_) => 12 + 3 * (spec.kind.n_sub() - 1),
            LayerKind::NoRecDgm => 8,
        };
        Layout {
            kind: spec.kind,
            entries_per_layer,
            has_proj: spec.has_projection(),
            layers: spec.layers,
        }
    }

    fn layer_base(&self, l: usize) -> usize {
        (if self.has_proj { 2 } else { 0 }) + l * self.entries_per_layer
    }

    fn out_base(&self) -> usize {
        self.layer_base(self.layers)
    }

    /// The z, g, r, h gates followed by extra sublayers, as batch refs.
    fn dgm_gates<'a>(&self, params: &'a ParamSet, l: usize) -> ([BGate<'a>; 4], Vec<BGate<'a>>) {
        let base = self.layer_base(l);
        match self.kind {
            LayerKind::Dgm | LayerKind::DeepDgm(_) => {
                let gate = |g: usize| BGate {
                    w: Some(params.mat_at(base + 3 * g)),
                    u: params.mat_at(base + 3 * g + 1),
                    b: params.vec_at(base + 3 * g + 2),
                };
                let extra = (4..4 + self.kind.n_sub() - 1).map(gate).collect();
                ([gate(0), gate(1), gate(2), gate(3)], extra)
            }
            LayerKind::NoRecDgm => {
                let gate = |g: usize| BGate {
                    w: None,
                    u: params.mat_at(base + 2 * g),
                    b: params.vec_at(base + 2 * g + 1),
                };
                ([gate(0), gate(1), gate(2), gate(3)], Vec::new())
            }
            _ => unreachable!("not a DGM layout"),
        }
    }
}

/// Initializes a parameter set for `spec`: weight matrices from the spec's
/// initializer drawn in canonical entry order, biases zero except the
/// carry-type gate biases, which start at +1 so the carry path passes the
/// state through at initialization (the usual highway-network prescription;
/// with tanh gates and zero bias the carry of a generalized highway or DGM
/// layer would attenuate the signal multiplicatively per layer). Fixed seed
/// gives a bit-identical set.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> Result<ParamSet, NetError> {
    spec.validate()?;
    let mut rng = RngStream::new(seed);
    let mut params = ParamSet::zeros(spec);
    for (i, (name, shape)) in spec_entries(spec).iter().enumerate() {
        match shape {
            Shape::Mat(rows, cols) => {
                let m = init_glorot_or_he(spec.init, *cols, *rows, &mut rng)
                    .map_err(|e| NetError::Spec(e.to_string()))?;
                params.set_mat(i, m);
            }
            Shape::Vec(n) => {
                if is_carry_bias(spec.kind, name) {
                    params.set_vec(i, Vec64::from_vec(vec![1.0; *n]));
                }
            }
        }
    }
    Ok(params)
}

/// Carry-gate biases: the carry gate C of a generalized highway layer and
/// the Z (state pass-through) and G (transform damping) gates of the DGM
/// family. The plain highway carry 1 - T is already open at T = 0.
fn is_carry_bias(kind: LayerKind, name: &str) -> bool {
    match kind {
        LayerKind::GeneralizedHighway => name.ends_with(".b_C"),
        LayerKind::Dgm | LayerKind::DeepDgm(_) | LayerKind::NoRecDgm => {
            name.ends_with(".z.b") || name.ends_with(".g.b")
        }
        _ => false,
    }
}

/// Forward pass over a batch (rows are samples). Returns the predictions
/// and the cache required by [`network_backward`].
pub fn network_forward(
    spec: &NetworkSpec,
    params: &ParamSet,
    x: &Mat64,
) -> Result<(Vec64, ForwardCache), NetError> {
    spec.validate()?;
    params.check_against(spec)?;
    if x.cols() != spec.input_dim {
        return Err(NetError::Dim("network input width"));
    }
    let layout = Layout::of(spec);
    let act = spec.hidden_act;
    let gate_act = spec.gate_act;

    let mut layers = Vec::with_capacity(spec.layers);
    let proj_out = if layout.has_proj {
        Some(affine_batch(x, params.mat_at(0), params.vec_at(0 + 1)))
    } else {
        None
    };

    {
        let mut state: &Mat64 = proj_out.as_ref().unwrap_or(x);
        for l in 0..spec.layers {
            let base = layout.layer_base(l);
            let cache = match spec.kind {
                LayerKind::Dense => LayerCache::Dense(batch_dense_fwd(
                    state,
                    params.mat_at(base),
                    params.vec_at(base + 1),
                    act,
                )),
                LayerKind::Residual => LayerCache::Dense(batch_residual_fwd(
                    state,
                    params.mat_at(base),
                    params.vec_at(base + 1),
                    act,
                )),
                LayerKind::Highway => LayerCache::Highway(batch_highway_fwd(
                    state,
                    params.mat_at(base),
                    params.vec_at(base + 1),
                    params.mat_at(base + 2),
                    params.vec_at(base + 3),
                    act,
                    gate_act,
                )),
                LayerKind::GeneralizedHighway => LayerCache::GenHighway(batch_gen_highway_fwd(
                    state,
                    params.mat_at(base),
                    params.vec_at(base + 1),
                    params.mat_at(base + 2),
                    params.vec_at(base + 3),
                    params.mat_at(base + 4),
                    params.vec_at(base + 5),
                    act,
                    gate_act,
                )),
                LayerKind::Dgm | LayerKind::DeepDgm(_) => {
                    let (gates, extra) = layout.dgm_gates(params, l);
                    LayerCache::Dgm(batch_dgm_fwd(Some(x), state, &gates, &extra, act))
                }
                LayerKind::NoRecDgm => {
                    let (gates, extra) = layout.dgm_gates(params, l);
                    LayerCache::Dgm(batch_dgm_fwd(None, state, &gates, &extra, act))
                }
            };
            layers.push(cache);
            state = layers.last().unwrap().out();
        }
    }

    let last = layers
        .last()
        .map(|c| c.out())
        .or(proj_out.as_ref())
        .unwrap_or(x);
    let out_base = layout.out_base();
    let pred_mat = affine_batch(last, params.mat_at(out_base), params.vec_at(out_base + 1));
    let preds: Vec64 = (0..pred_mat.rows()).map(|i| pred_mat[(i, 0)]).collect();

    let cache = ForwardCache {
        x: x.clone(),
        proj_out,
        layers,
        preds: preds.clone(),
    };
    Ok((preds, cache))
}

/// Single-sample forward pass.
pub fn network_forward_single(
    spec: &NetworkSpec,
    params: &ParamSet,
    x: &Vec64,
) -> Result<(f64, ForwardCache), NetError> {
    let (preds, cache) = network_forward(spec, params, &Mat64::from_row(x))?;
    Ok((preds[0], cache))
}

/// Predictions without keeping the cache.
pub fn predict(spec: &NetworkSpec, params: &ParamSet, x: &Mat64) -> Result<Vec64, NetError> {
    network_forward(spec, params, x).map(|(preds, _)| preds)
}

/// Backward pass: gradient of the scalar loss w.r.t. every parameter, given
/// the upstream gradient dL/dpred per sample. Shapes mirror the parameters.
pub fn network_backward(
    spec: &NetworkSpec,
    params: &ParamSet,
    cache: &ForwardCache,
    dpreds: &Vec64,
) -> Result<ParamSet, NetError> {
    spec.validate()?;
    params.check_against(spec)?;
    if dpreds.len() != cache.batch_size() {
        return Err(NetError::Dim("upstream gradient length"));
    }
    if cache.layers.len() != spec.layers {
        return Err(NetError::ParamMismatch("cache does not match spec".into()));
    }
    let layout = Layout::of(spec);
    let act = spec.hidden_act;
    let gate_act = spec.gate_act;
    let mut grad = ParamSet::zeros(spec);

    // output layer: preds = last W_out^T + b_out
    let last = cache
        .layers
        .last()
        .map(|c| c.out())
        .or(cache.proj_out.as_ref())
        .unwrap_or(&cache.x);
    let dpred_mat = {
        let mut m = Mat64::zeros(dpreds.len(), 1);
        for i in 0..dpreds.len() {
            m[(i, 0)] = dpreds[i];
        }
        m
    };
    let out_base = layout.out_base();
    grad.set_mat(out_base, dpred_mat.matmul_tn(last));
    grad.set_vec(out_base + 1, dpred_mat.col_sums());
    let mut upstream = dpred_mat.matmul_nn(params.mat_at(out_base));

    // layers in reverse
    for l in (0..spec.layers).rev() {
        let base = layout.layer_base(l);
        let x_in: &Mat64 = if l == 0 {
            cache.proj_out.as_ref().unwrap_or(&cache.x)
        } else {
            cache.layers[l - 1].out()
        };
        upstream = match (&cache.layers[l], spec.kind) {
            (LayerCache::Dense(c), LayerKind::Dense) => {
                let (dw, db, dx) = batch_dense_bwd(x_in, params.mat_at(base), &c.pre, &upstream, act);
                grad.set_mat(base, dw);
                grad.set_vec(base + 1, db);
                dx
            }
            (LayerCache::Dense(c), LayerKind::Residual) => {
                let (dw, db, dx) =
                    batch_residual_bwd(x_in, params.mat_at(base), &c.pre, &upstream, act);
                grad.set_mat(base, dw);
                grad.set_vec(base + 1, db);
                dx
            }
            (LayerCache::Highway(c), LayerKind::Highway) => {
                let (dw_h, db_h, dw_t, db_t, dx) = batch_highway_bwd(
                    x_in,
                    params.mat_at(base),
                    params.mat_at(base + 2),
                    c,
                    &upstream,
                    act,
                    gate_act,
                );
                grad.set_mat(base, dw_h);
                grad.set_vec(base + 1, db_h);
                grad.set_mat(base + 2, dw_t);
                grad.set_vec(base + 3, db_t);
                dx
            }
            (LayerCache::GenHighway(c), LayerKind::GeneralizedHighway) => {
                let (dw_h, db_h, dw_t, db_t, dw_c, db_c, dx) = batch_gen_highway_bwd(
                    x_in,
                    params.mat_at(base),
                    params.mat_at(base + 2),
                    params.mat_at(base + 4),
                    c,
                    &upstream,
                    act,
                    gate_act,
                );
                grad.set_mat(base, dw_h);
                grad.set_vec(base + 1, db_h);
                grad.set_mat(base + 2, dw_t);
                grad.set_vec(base + 3, db_t);
                grad.set_mat(base + 4, dw_c);
                grad.set_vec(base + 5, db_c);
                dx
            }
            (LayerCache::Dgm(c), kind) if kind.is_dgm_family() => {
                let (gates, extra) = layout.dgm_gates(params, l);
                let x_feed = if matches!(kind, LayerKind::NoRecDgm) {
                    None
                } else {
                    Some(&cache.x)
                };
                let (gate_grads, ds) =
                    batch_dgm_bwd(x_feed, x_in, &gates, &extra, c, &upstream, act);
                for (g, gg) in gate_grads.into_iter().enumerate() {
                    match kind {
                        LayerKind::NoRecDgm => {
                            grad.set_mat(base + 2 * g, gg.du);
                            grad.set_vec(base + 2 * g + 1, gg.db);
                        }
                        _ => {
                            grad.set_mat(base + 3 * g, gg.dw.expect("recurrent gate has w"));
                            grad.set_mat(base + 3 * g + 1, gg.du);
                            grad.set_vec(base + 3 * g + 2, gg.db);
                        }
                    }
                }
                ds
            }
            _ => return Err(NetError::ParamMismatch("cache/spec kind mismatch".into())),
        };
    }

    if layout.has_proj {
        // projection is affine: dW = ds^T x, db = colsum(ds)
        grad.set_mat(0, upstream.matmul_tn(&cache.x));
        grad.set_vec(1, upstream.col_sums());
    }
    Ok(grad)
}
