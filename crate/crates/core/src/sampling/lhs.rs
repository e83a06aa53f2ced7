//! Latin hypercube sampling.

use super::ParamBox;
use crate::mathcore::{Mat64, RngStream};

/// Draws `n` points from `pbox` by Latin hypercube sampling: per dimension,
/// each of the n equal-width strata receives exactly one point, placed
/// uniformly within its stratum, and strata are assigned to rows by an
/// independent uniform permutation per dimension.
///
/// Draw order per dimension is the stratum permutation followed by the n
/// in-stratum offsets, so a fixed stream reproduces the grid exactly.
pub fn lhs_sample(n: usize, pbox: &ParamBox, rng: &mut RngStream) -> Mat64 {
    assert!(n >= 1, "need at least one sample");
    let d = pbox.dim();
    let mut out = Mat64::zeros(n, d);
    let nf = n as f64;
    for j in 0..d {
        let (lo, hi) = pbox.bounds(j);
        let width = hi - lo;
        let perm = rng.permutation(n);
        for i in 0..n {
            let u = rng.uniform();
            out[(i, j)] = lo + width * (perm[i] as f64 + u) / nf;
        }
    }
    out
}
