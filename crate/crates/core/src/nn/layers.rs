//! Layer forward passes, their batched backward kernels, and the public
//! per-sample operations.
//!
//! Batch kernels operate on row-major (batch x width) matrices; the
//! per-sample functions wrap the same kernels on one-row matrices, so both
//! paths execute identical floating-point operations.

use super::NetError;
use crate::mathcore::{ActivationKind, Mat64, Vec64};

// ---------------------------------------------------------------------------
// elementwise helpers

pub(crate) fn act_map(m: &Mat64, act: ActivationKind) -> Mat64 {
    m.map(|v| act.eval(v))
}

pub(crate) fn act_deriv_map(m: &Mat64, act: ActivationKind) -> Mat64 {
    m.map(|v| act.deriv(v))
}

/// y = x W^T + b, rows are samples.
pub(crate) fn affine_batch(x: &Mat64, w: &Mat64, b: &Vec64) -> Mat64 {
    let mut y = x.matmul_nt(w);
    y.add_row_bias(b);
    y
}

#[inline]
fn highway_combine_slice(h: &[f64], t: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = h[i] * t[i] + x[i] * (1.0 - t[i]);
    }
}

#[inline]
fn gen_highway_combine_slice(h: &[f64], t: &[f64], c: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = h[i] * t[i] + x[i] * c[i];
    }
}

#[inline]
fn dgm_combine_slice(g: &[f64], h: &[f64], z: &[f64], s: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = (1.0 - g[i]) * h[i] + z[i] * s[i];
    }
}

/// Highway output H (.) T + x (.) (1 - T) for given gate values.
pub fn highway_combine(h: &Vec64, t: &Vec64, x: &Vec64) -> Vec64 {
    let mut out = Vec64::zeros(x.len());
    highway_combine_slice(h, t, x, &mut out);
    out
}

/// Generalized highway output H (.) T + x (.) C for given gate values.
pub fn generalized_highway_combine(h: &Vec64, t: &Vec64, c: &Vec64, x: &Vec64) -> Vec64 {
    let mut out = Vec64::zeros(x.len());
    gen_highway_combine_slice(h, t, c, x, &mut out);
    out
}

// ---------------------------------------------------------------------------
// dense / residual

pub(crate) struct DenseCache {
    pub pre: Mat64,
    pub out: Mat64,
}

pub(crate) fn batch_dense_fwd(x: &Mat64, w: &Mat64, b: &Vec64, act: ActivationKind) -> DenseCache {
    let pre = affine_batch(x, w, b);
    let out = act_map(&pre, act);
    DenseCache { pre, out }
}

/// Returns (dW, db, dX).
pub(crate) fn batch_dense_bwd(
    x: &Mat64,
    w: &Mat64,
    pre: &Mat64,
    dy: &Mat64,
    act: ActivationKind,
) -> (Mat64, Vec64, Mat64) {
    let dpre = dy.hadamard(&act_deriv_map(pre, act));
    let dw = dpre.matmul_tn(x);
    let db = dpre.col_sums();
    let dx = dpre.matmul_nn(w);
    (dw, db, dx)
}

pub(crate) fn batch_residual_fwd(
    x: &Mat64,
    w: &Mat64,
    b: &Vec64,
    act: ActivationKind,
) -> DenseCache {
    let pre = affine_batch(x, w, b);
    let mut out = act_map(&pre, act);
    out.add_assign(x);
    DenseCache { pre, out }
}

pub(crate) fn batch_residual_bwd(
    x: &Mat64,
    w: &Mat64,
    pre: &Mat64,
    dy: &Mat64,
    act: ActivationKind,
) -> (Mat64, Vec64, Mat64) {
    let (dw, db, mut dx) = batch_dense_bwd(x, w, pre, dy, act);
    dx.add_assign(dy);
    (dw, db, dx)
}

// ---------------------------------------------------------------------------
// highway / generalized highway

pub(crate) struct HighwayCache {
    pub pre_h: Mat64,
    pub h: Mat64,
    pub pre_t: Mat64,
    pub t: Mat64,
    pub out: Mat64,
}

pub(crate) fn batch_highway_fwd(
    x: &Mat64,
    w_h: &Mat64,
    b_h: &Vec64,
    w_t: &Mat64,
    b_t: &Vec64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> HighwayCache {
    let pre_h = affine_batch(x, w_h, b_h);
    let h = act_map(&pre_h, act);
    let pre_t = affine_batch(x, w_t, b_t);
    let t = act_map(&pre_t, gate_act);
    let mut out = Mat64::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        let mut row = Vec64::zeros(x.cols());
        highway_combine_slice(h.row(i), t.row(i), x.row(i), &mut row);
        out.row_mut(i).copy_from_slice(&row);
    }
    HighwayCache { pre_h, h, pre_t, t, out }
}

/// Returns (dW_H, db_H, dW_T, db_T, dX).
pub(crate) fn batch_highway_bwd(
    x: &Mat64,
    w_h: &Mat64,
    w_t: &Mat64,
    cache: &HighwayCache,
    dy: &Mat64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> (Mat64, Vec64, Mat64, Vec64, Mat64) {
    // y = H*T + x*(1-T):  dH = dy*T,  dT = dy*(H - x),  dx += dy*(1-T)
    let dh = dy.hadamard(&cache.t);
    let mut h_minus_x = cache.h.clone();
    for (d, s) in h_minus_x.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *d -= s;
    }
    let dt = dy.hadamard(&h_minus_x);

    let dpre_h = dh.hadamard(&act_deriv_map(&cache.pre_h, act));
    let dpre_t = dt.hadamard(&act_deriv_map(&cache.pre_t, gate_act));
    let dw_h = dpre_h.matmul_tn(x);
    let db_h = dpre_h.col_sums();
    let dw_t = dpre_t.matmul_tn(x);
    let db_t = dpre_t.col_sums();

    let mut dx = dpre_h.matmul_nn(w_h);
    dx.add_assign(&dpre_t.matmul_nn(w_t));
    for ((d, dyv), tv) in dx
        .as_mut_slice()
        .iter_mut()
        .zip(dy.as_slice())
        .zip(cache.t.as_slice())
    {
        *d += dyv * (1.0 - tv);
    }
    (dw_h, db_h, dw_t, db_t, dx)
}

pub(crate) struct GenHighwayCache {
    pub pre_h: Mat64,
    pub h: Mat64,
    pub pre_t: Mat64,
    pub t: Mat64,
    pub pre_c: Mat64,
    pub c: Mat64,
    pub out: Mat64,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn batch_gen_highway_fwd(
    x: &Mat64,
    w_h: &Mat64,
    b_h: &Vec64,
    w_t: &Mat64,
    b_t: &Vec64,
    w_c: &Mat64,
    b_c: &Vec64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> GenHighwayCache {
    let pre_h = affine_batch(x, w_h, b_h);
    let h = act_map(&pre_h, act);
    let pre_t = affine_batch(x, w_t, b_t);
    let t = act_map(&pre_t, gate_act);
    let pre_c = affine_batch(x, w_c, b_c);
    let c = act_map(&pre_c, gate_act);
    let mut out = Mat64::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        let mut row = Vec64::zeros(x.cols());
        gen_highway_combine_slice(h.row(i), t.row(i), c.row(i), x.row(i), &mut row);
        out.row_mut(i).copy_from_slice(&row);
    }
    GenHighwayCache { pre_h, h, pre_t, t, pre_c, c, out }
}

/// Returns (dW_H, db_H, dW_T, db_T, dW_C, db_C, dX).
#[allow(clippy::type_complexity, clippy::too_many_arguments)]
pub(crate) fn batch_gen_highway_bwd(
    x: &Mat64,
    w_h: &Mat64,
    w_t: &Mat64,
    w_c: &Mat64,
    cache: &GenHighwayCache,
    dy: &Mat64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> (Mat64, Vec64, Mat64, Vec64, Mat64, Vec64, Mat64) {
    // y = H*T + x*C:  dH = dy*T,  dT = dy*H,  dC = dy*x,  dx += dy*C
    let dh = dy.hadamard(&cache.t);
    let dt = dy.hadamard(&cache.h);
    let dc = dy.hadamard(x);

    let dpre_h = dh.hadamard(&act_deriv_map(&cache.pre_h, act));
    let dpre_t = dt.hadamard(&act_deriv_map(&cache.pre_t, gate_act));
    let dpre_c = dc.hadamard(&act_deriv_map(&cache.pre_c, gate_act));

    let dw_h = dpre_h.matmul_tn(x);
    let db_h = dpre_h.col_sums();
    let dw_t = dpre_t.matmul_tn(x);
    let db_t = dpre_t.col_sums();
    let dw_c = dpre_c.matmul_tn(x);
    let db_c = dpre_c.col_sums();

    let mut dx = dpre_h.matmul_nn(w_h);
    dx.add_assign(&dpre_t.matmul_nn(w_t));
    dx.add_assign(&dpre_c.matmul_nn(w_c));
    for ((d, dyv), cv) in dx
        .as_mut_slice()
        .iter_mut()
        .zip(dy.as_slice())
        .zip(cache.c.as_slice())
    {
        *d += dyv * cv;
    }
    (dw_h, db_h, dw_t, db_t, dw_c, db_c, dx)
}

// ---------------------------------------------------------------------------
// DGM family

/// Weights of one gate in batched form. `w` is absent in the no-recurrence
/// variant, which drops every dependence on the raw input.
#[derive(Clone, Copy)]
pub(crate) struct BGate<'a> {
    pub w: Option<&'a Mat64>,
    pub u: &'a Mat64,
    pub b: &'a Vec64,
}

pub(crate) struct BGateGrad {
    pub dw: Option<Mat64>,
    pub du: Mat64,
    pub db: Vec64,
}

/// pre = x w^T + state u^T + b (the x term only when present).
fn gate_pre(x: Option<&Mat64>, state: &Mat64, gate: &BGate) -> Mat64 {
    let mut pre = match (x, gate.w) {
        (Some(x), Some(w)) => {
            let mut p = x.matmul_nt(w);
            p.add_assign(&state.matmul_nt(gate.u));
            p
        }
        _ => state.matmul_nt(gate.u),
    };
    pre.add_row_bias(gate.b);
    pre
}

/// Backward of one gate: given d(gate output), accumulates the weight
/// gradients and returns the gradient w.r.t. the gate's state input.
fn gate_bwd(
    x: Option<&Mat64>,
    state: &Mat64,
    gate: &BGate,
    pre: &Mat64,
    dout: &Mat64,
    act: ActivationKind,
) -> (BGateGrad, Mat64) {
    let dpre = dout.hadamard(&act_deriv_map(pre, act));
    let dw = match (x, gate.w) {
        (Some(x), Some(_)) => Some(dpre.matmul_tn(x)),
        _ => None,
    };
    let du = dpre.matmul_tn(state);
    let db = dpre.col_sums();
    let dstate = dpre.matmul_nn(gate.u);
    (BGateGrad { dw, du, db }, dstate)
}

pub(crate) struct DgmCache {
    pub pre_z: Mat64,
    pub z: Mat64,
    pub pre_g: Mat64,
    pub g: Mat64,
    pub pre_r: Mat64,
    pub r: Mat64,
    pub sr: Mat64,
    /// Sublayer pre-activations and outputs; the last output is H.
    pub pre_sub: Vec<Mat64>,
    pub a_sub: Vec<Mat64>,
    pub out: Mat64,
}

/// Forward pass of one (possibly deep, possibly no-recurrence) DGM layer.
/// `gates` are Z, G, R and the first H sublayer; `extra` holds sublayers
/// 2..=n_sub. Z, G, R are fed x and S; the H chain starts from S (.) R, and
/// each sublayer k >= 2 is fed x and the previous sublayer output.
pub(crate) fn batch_dgm_fwd(
    x: Option<&Mat64>,
    s: &Mat64,
    gates: &[BGate; 4],
    extra: &[BGate],
    act: ActivationKind,
) -> DgmCache {
    let pre_z = gate_pre(x, s, &gates[0]);
    let z = act_map(&pre_z, act);
    let pre_g = gate_pre(x, s, &gates[1]);
    let g = act_map(&pre_g, act);
    let pre_r = gate_pre(x, s, &gates[2]);
    let r = act_map(&pre_r, act);
    let sr = s.hadamard(&r);

    let mut pre_sub = Vec::with_capacity(1 + extra.len());
    let mut a_sub = Vec::with_capacity(1 + extra.len());
    let mut state = &sr;
    for gate in std::iter::once(&gates[3]).chain(extra) {
        let pre = gate_pre(x, state, gate);
        let a = act_map(&pre, act);
        pre_sub.push(pre);
        a_sub.push(a);
        state = a_sub.last().unwrap();
    }

    let h = a_sub.last().unwrap();
    let mut out = Mat64::zeros(s.rows(), s.cols());
    for i in 0..s.rows() {
        let mut row = Vec64::zeros(s.cols());
        dgm_combine_slice(g.row(i), h.row(i), z.row(i), s.row(i), &mut row);
        out.row_mut(i).copy_from_slice(&row);
    }
    DgmCache {
        pre_z,
        z,
        pre_g,
        g,
        pre_r,
        r,
        sr,
        pre_sub,
        a_sub,
        out,
    }
}

/// Backward pass matching [`batch_dgm_fwd`]. Returns the gate gradients in
/// order (z, g, r, h, extra sublayers...) and the gradient w.r.t. S.
pub(crate) fn batch_dgm_bwd(
    x: Option<&Mat64>,
    s: &Mat64,
    gates: &[BGate; 4],
    extra: &[BGate],
    cache: &DgmCache,
    ds_new: &Mat64,
    act: ActivationKind,
) -> (Vec<BGateGrad>, Mat64) {
    let h = cache.a_sub.last().unwrap();

    // S_new = (1-G)*H + Z*S
    let mut dh = Mat64::zeros(h.rows(), h.cols());
    let mut dg = Mat64::zeros(h.rows(), h.cols());
    let mut dz = Mat64::zeros(h.rows(), h.cols());
    let mut ds = Mat64::zeros(h.rows(), h.cols());
    {
        let (dh_s, dg_s, dz_s, ds_s) = (
            dh.as_mut_slice(),
            dg.as_mut_slice(),
            dz.as_mut_slice(),
            ds.as_mut_slice(),
        );
        let (gs, hs, zs, ss, dns) = (
            cache.g.as_slice(),
            h.as_slice(),
            cache.z.as_slice(),
            s.as_slice(),
            ds_new.as_slice(),
        );
        for i in 0..dns.len() {
            dh_s[i] = dns[i] * (1.0 - gs[i]);
            dg_s[i] = -dns[i] * hs[i];
            dz_s[i] = dns[i] * ss[i];
            ds_s[i] = dns[i] * zs[i];
        }
    }

    // back through the H chain, deepest sublayer first
    let k = cache.a_sub.len();
    let mut sub_grads: Vec<BGateGrad> = Vec::with_capacity(k);
    let mut da = dh;
    for j in (0..k).rev() {
        let gate = if j == 0 { &gates[3] } else { &extra[j - 1] };
        let state = if j == 0 { &cache.sr } else { &cache.a_sub[j - 1] };
        let (grad, dstate) = gate_bwd(x, state, gate, &cache.pre_sub[j], &da, act);
        sub_grads.push(grad);
        da = dstate;
    }
    sub_grads.reverse();

    // da is now d(S (.) R)
    let dr = da.hadamard(s);
    ds.add_assign(&da.hadamard(&cache.r));

    let (grad_r, ds_r) = gate_bwd(x, s, &gates[2], &cache.pre_r, &dr, act);
    ds.add_assign(&ds_r);
    let (grad_g, ds_g) = gate_bwd(x, s, &gates[1], &cache.pre_g, &dg, act);
    ds.add_assign(&ds_g);
    let (grad_z, ds_z) = gate_bwd(x, s, &gates[0], &cache.pre_z, &dz, act);
    ds.add_assign(&ds_z);

    let mut grads = vec![grad_z, grad_g, grad_r];
    grads.extend(sub_grads);
    (grads, ds)
}

// ---------------------------------------------------------------------------
// public per-sample operations

/// Weights of one DGM gate: y = act(w x + u s + b).
#[derive(Clone, Copy)]
pub struct Gate<'a> {
    pub w: &'a Mat64,
    pub u: &'a Mat64,
    pub b: &'a Vec64,
}

/// The four gates of a DGM layer.
#[derive(Clone, Copy)]
pub struct RecurrentGates<'a> {
    pub z: Gate<'a>,
    pub g: Gate<'a>,
    pub r: Gate<'a>,
    pub h: Gate<'a>,
}

/// One gate of the no-recurrence variant: y = act(u s + b).
#[derive(Clone, Copy)]
pub struct StateGate<'a> {
    pub u: &'a Mat64,
    pub b: &'a Vec64,
}

/// The four gates of a no-recurrence DGM layer.
#[derive(Clone, Copy)]
pub struct StateGates<'a> {
    pub z: StateGate<'a>,
    pub g: StateGate<'a>,
    pub r: StateGate<'a>,
    pub h: StateGate<'a>,
}

fn check_affine(w: &Mat64, b: &Vec64, x_len: usize, what: &'static str) -> Result<(), NetError> {
    if w.cols() != x_len || w.rows() != b.len() {
        return Err(NetError::Dim(what));
    }
    Ok(())
}

fn check_square(w: &Mat64, b: &Vec64, x_len: usize, what: &'static str) -> Result<(), NetError> {
    check_affine(w, b, x_len, what)?;
    if w.rows() != w.cols() {
        return Err(NetError::Dim(what));
    }
    Ok(())
}

fn single_row(m: Mat64) -> Vec64 {
    Vec64::from_vec(m.row(0).to_vec())
}

/// y = act(W_H x + b_H).
pub fn dense_forward(
    x: &Vec64,
    w_h: &Mat64,
    b_h: &Vec64,
    act: ActivationKind,
) -> Result<Vec64, NetError> {
    check_affine(w_h, b_h, x.len(), "dense layer")?;
    let cache = batch_dense_fwd(&Mat64::from_row(x), w_h, b_h, act);
    Ok(single_row(cache.out))
}

/// y = act(W_H x + b_H) + x; requires a square layer.
pub fn residual_forward(
    x: &Vec64,
    w_h: &Mat64,
    b_h: &Vec64,
    act: ActivationKind,
) -> Result<Vec64, NetError> {
    check_square(w_h, b_h, x.len(), "residual layer")?;
    let cache = batch_residual_fwd(&Mat64::from_row(x), w_h, b_h, act);
    Ok(single_row(cache.out))
}

/// y = H (.) T + x (.) (1 - T) with H = act(W_H x + b_H),
/// T = gate_act(W_T x + b_T).
pub fn highway_forward(
    x: &Vec64,
    w_h: &Mat64,
    b_h: &Vec64,
    w_t: &Mat64,
    b_t: &Vec64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> Result<Vec64, NetError> {
    check_square(w_h, b_h, x.len(), "highway layer")?;
    check_square(w_t, b_t, x.len(), "highway transform gate")?;
    let cache = batch_highway_fwd(&Mat64::from_row(x), w_h, b_h, w_t, b_t, act, gate_act);
    Ok(single_row(cache.out))
}

/// y = H (.) T + x (.) C with an independent carry gate C.
#[allow(clippy::too_many_arguments)]
pub fn generalized_highway_forward(
    x: &Vec64,
    w_h: &Mat64,
    b_h: &Vec64,
    w_t: &Mat64,
    b_t: &Vec64,
    w_c: &Mat64,
    b_c: &Vec64,
    act: ActivationKind,
    gate_act: ActivationKind,
) -> Result<Vec64, NetError> {
    check_square(w_h, b_h, x.len(), "generalized highway layer")?;
    check_square(w_t, b_t, x.len(), "generalized highway transform gate")?;
    check_square(w_c, b_c, x.len(), "generalized highway carry gate")?;
    let cache = batch_gen_highway_fwd(
        &Mat64::from_row(x),
        w_h,
        b_h,
        w_t,
        b_t,
        w_c,
        b_c,
        act,
        gate_act,
    );
    Ok(single_row(cache.out))
}

fn check_gate(gate: &Gate, d: usize, n: usize) -> Result<(), NetError> {
    if gate.w.rows() != n || gate.w.cols() != d || gate.u.rows() != n || gate.u.cols() != n
        || gate.b.len() != n
    {
        return Err(NetError::Dim("DGM gate"));
    }
    Ok(())
}

/// One DGM layer: Z, G, R = act(w x + u S + b); H = act(w^h x + u^h (S (.) R) + b^h);
/// S_new = (1 - G) (.) H + Z (.) S.
pub fn dgm_layer_forward(
    x: &Vec64,
    s_old: &Vec64,
    gates: &RecurrentGates,
    act: ActivationKind,
) -> Result<Vec64, NetError> {
    deep_dgm_layer_forward(x, s_old, gates, &[], act)
}

/// Deep DGM layer: as [`dgm_layer_forward`] but H is produced by chaining
/// the first sublayer (the `h` gate, which applies the S (.) R product) and
/// `extra` sublayers each fed x and the previous sublayer output. With no
/// extra sublayers this is exactly the plain DGM layer.
pub fn deep_dgm_layer_forward(
    x: &Vec64,
    s_old: &Vec64,
    gates: &RecurrentGates,
    extra: &[Gate],
    act: ActivationKind,
) -> Result<Vec64, NetError> {
    let (d, n) = (x.len(), s_old.len());
    for gate in [&gates.z, &gates.g, &gates.r, &gates.h].into_iter().chain(extra) {
        check_gate(gate, d, n)?;
    }
    let xb = Mat64::from_row(x);
    let sb = Mat64::from_row(s_old);
    let bgates = [
        BGate { w: Some(gates.z.w), u: gates.z.u, b: gates.z.b },
        BGate { w: Some(gates.g.w), u: gates.g.u, b: gates.g.b },
        BGate { w: Some(gates.r.w), u: gates.r.u, b: gates.r.b },
        BGate { w: Some(gates.h.w), u: gates.h.u, b: gates.h.b },
    ];
    let bextra: Vec<BGate> = extra
        .iter()
        .map(|g| BGate { w: Some(g.w), u: g.u, b: g.b })
        .collect();
    let cache = batch_dgm_fwd(Some(&xb), &sb, &bgates, &bextra, act);
    Ok(single_row(cache.out))
}

/// No-recurrence DGM layer: Z, G, R = act(u S + b) from the state alone;
/// H = act(u^h (S (.) R) + b^h); S_new = (1 - G) (.) H + Z (.) S.
pub fn norec_dgm_layer_forward(
    s_old: &Vec64,
    gates: &StateGates,
    act: ActivationKind,
) -> Result<Vec64, NetError> {
    let n = s_old.len();
    for gate in [&gates.z, &gates.g, &gates.r, &gates.h] {
        if gate.u.rows() != n || gate.u.cols() != n || gate.b.len() != n {
            return Err(NetError::Dim("no-recurrence DGM gate"));
        }
    }
    let sb = Mat64::from_row(s_old);
    let bgates = [
        BGate { w: None, u: gates.z.u, b: gates.z.b },
        BGate { w: None, u: gates.g.u, b: gates.g.b },
        BGate { w: None, u: gates.r.u, b: gates.r.b },
        BGate { w: None, u: gates.h.u, b: gates.h.b },
    ];
    let cache = batch_dgm_fwd(None, &sb, &bgates, &[], act);
    Ok(single_row(cache.out))
}
