//! Dataset construction with ground-truth labels, and train/validation/test
//! splitting.

use super::{lhs_sample, ProblemKind, SampleError};
use crate::mathcore::{Mat64, RngStream, Vec64};
use crate::pricing::{
    bs_scaled_call, heston_cos_call, intrinsic_value, time_value_forward, BsInputs, CosSettings,
    HestonParams,
};
use rayon::prelude::*;

/// One supervised dataset: n input rows and one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub inputs: Mat64,
    pub labels: Vec64,
    pub problem: ProblemKind,
    pub seed: u64,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Generation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildStats {
    /// Number of row redraws forced by ill-posed or failed rows.
    pub resamples: u64,
}

const RESAMPLE_CAP: usize = 100_000;

/// Builds the dataset for `kind` with `n` rows using the generation seed.
/// See [`build_dataset_with_stats`] for the resample count.
pub fn build_dataset(kind: ProblemKind, n: usize, seed: u64) -> Result<SampleGrid, SampleError> {
    build_dataset_with_stats(kind, n, seed).map(|(grid, _)| grid)
}

/// Builds the dataset and reports how many rows had to be redrawn.
///
/// All four problems start from a Latin hypercube draw over their generating
/// box (the Black-Scholes box for both implied-volatility problems, which
/// are the pricing problem with the roles of sigma and price swapped). Rows
/// whose label computation fails, or whose price is indistinguishable from
/// the no-arbitrage band edge in the implied-volatility problems, are
/// redrawn uniformly from the box.
pub fn build_dataset_with_stats(
    kind: ProblemKind,
    n: usize,
    seed: u64,
) -> Result<(SampleGrid, BuildStats), SampleError> {
    if n == 0 {
        return Err(SampleError::Dimension("dataset size must be at least 1"));
    }
    let root = RngStream::new(seed);
    let pbox = kind.generating_box();
    let mut raw = lhs_sample(n, &pbox, &mut root.child(0));
    let mut resample_rng = root.child(1);
    let mut stats = BuildStats::default();

    // parallel first pass over the pure row evaluations
    let mut evals: Vec<Result<RowEval, ()>> = (0..n)
        .into_par_iter()
        .map(|i| eval_row(kind, raw.row(i)))
        .collect();

    // sequential redraw of failed rows keeps the result independent of the
    // parallel schedule
    for i in 0..n {
        if evals[i].is_ok() {
            continue;
        }
        let mut attempts = 0usize;
        loop {
            attempts += 1;
            if attempts > RESAMPLE_CAP {
                return Err(SampleError::ResampleCap(RESAMPLE_CAP));
            }
            stats.resamples += 1;
            let fresh: Vec<f64> = (0..pbox.dim())
                .map(|j| {
                    let (lo, hi) = pbox.bounds(j);
                    resample_rng.range(lo, hi)
                })
                .collect();
            if let Ok(eval) = eval_row(kind, &fresh) {
                raw.row_mut(i).copy_from_slice(&fresh);
                evals[i] = Ok(eval);
                break;
            }
        }
    }

    let d = kind.input_dim();
    let mut inputs = Mat64::zeros(n, d);
    let mut labels = Vec64::zeros(n);
    for i in 0..n {
        let eval = evals[i].as_ref().expect("all rows resolved");
        let row = raw.row(i);
        match kind {
            ProblemKind::BsPrice | ProblemKind::HestonPrice => {
                inputs.row_mut(i).copy_from_slice(row);
                labels[i] = eval.label;
            }
            ProblemKind::ImpliedVol | ProblemKind::TransformedImpliedVol => {
                // role swap: inputs (m, tau, r, price-feature), label sigma
                inputs.row_mut(i)[..3].copy_from_slice(&row[..3]);
                inputs.row_mut(i)[3] = eval.label;
                labels[i] = row[3];
            }
        }
    }

    Ok((
        SampleGrid {
            inputs,
            labels,
            problem: kind,
            seed,
        },
        stats,
    ))
}

struct RowEval {
    /// Price for the pricing problems; price feature (raw or log time value)
    /// for the implied-volatility problems.
    label: f64,
}

fn eval_row(kind: ProblemKind, row: &[f64]) -> Result<RowEval, ()> {
    match kind {
        ProblemKind::BsPrice => {
            let price =
                bs_scaled_call(&BsInputs::new(row[0], row[1], row[2], row[3])).map_err(drop)?;
            Ok(RowEval { label: price })
        }
        ProblemKind::HestonPrice => {
            let p = HestonParams {
                m: row[0],
                tau: row[1],
                r: row[2],
                rho: row[3],
                kappa: row[4],
                vbar: row[5],
                gamma: row[6],
                v0: row[7],
            };
            let price = heston_cos_call(&p, &CosSettings::default()).map_err(drop)?;
            Ok(RowEval { label: price })
        }
        ProblemKind::ImpliedVol | ProblemKind::TransformedImpliedVol => {
            let (m, tau, r, sigma) = (row[0], row[1], row[2], row[3]);
            let price = bs_scaled_call(&BsInputs::new(m, tau, r, sigma)).map_err(drop)?;
            // rows on the band edge make the inverse problem ill-posed
            if price - intrinsic_value(m, tau, r) <= 1e-12 || m - price <= 1e-12 {
                return Err(());
            }
            let feature = if kind == ProblemKind::ImpliedVol {
                price
            } else {
                time_value_forward(price, m, tau, r).map_err(drop)?
            };
            Ok(RowEval { label: feature })
        }
    }
}

/// Splits `grid` into disjoint, exhaustive train/validation parts by a
/// shuffled index permutation, and draws an independent test grid of
/// `test_n` rows under a seed derived from `seed`.
pub fn split_dataset(
    grid: &SampleGrid,
    train_frac: f64,
    test_n: usize,
    seed: u64,
) -> Result<(SampleGrid, SampleGrid, SampleGrid), SampleError> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(SampleError::Dimension("train fraction must lie in (0, 1)"));
    }
    if test_n == 0 {
        return Err(SampleError::Dimension("test size must be at least 1"));
    }
    let n = grid.len();
    if n < 2 {
        return Err(SampleError::Dimension("need at least 2 rows to split"));
    }
    let root = RngStream::new(seed);
    let perm = root.child(0).permutation(n);
    let n_train = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);

    let take = |idx: &[usize]| -> SampleGrid {
        let mut inputs = Mat64::zeros(idx.len(), grid.inputs.cols());
        let mut labels = Vec64::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            inputs.row_mut(k).copy_from_slice(grid.inputs.row(i));
            labels[k] = grid.labels[i];
        }
        SampleGrid {
            inputs,
            labels,
            problem: grid.problem,
            seed: grid.seed,
        }
    };

    let train = take(&perm[..n_train]);
    let validation = take(&perm[n_train..]);
    let test_seed = root.child(1).seed();
    let test = build_dataset(grid.problem, test_n, test_seed)?;
    Ok((train, validation, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs_labels_in_table_range() {
        // left-closed: a few deep out-of-the-money prices underflow to
        // exactly zero in f64 (the pricing problems keep such rows)
        let grid = build_dataset(ProblemKind::BsPrice, 10_000, 42).unwrap();
        for i in 0..grid.len() {
            let y = grid.labels[i];
            assert!((0.0..0.9).contains(&y), "label {y} outside [0, 0.9)");
        }
    }

    #[test]
    fn bs_labels_rederivable() {
        let grid = build_dataset(ProblemKind::BsPrice, 500, 7).unwrap();
        for i in 0..grid.len() {
            let row = grid.inputs.row(i);
            let want =
                bs_scaled_call(&BsInputs::new(row[0], row[1], row[2], row[3])).unwrap();
            assert!((grid.labels[i] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn heston_labels_rederivable() {
        let grid = build_dataset(ProblemKind::HestonPrice, 200, 11).unwrap();
        for i in 0..grid.len() {
            let row = grid.inputs.row(i);
            let p = HestonParams {
                m: row[0],
                tau: row[1],
                r: row[2],
                rho: row[3],
                kappa: row[4],
                vbar: row[5],
                gamma: row[6],
                v0: row[7],
            };
            let want = heston_cos_call(&p, &CosSettings::default()).unwrap();
            assert!((grid.labels[i] - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn role_swap_matches_bs_grid() {
        // seed chosen so no row needs resampling; resampled rows are
        // exactly where the two grids may legitimately diverge
        let (_, stats) = build_dataset_with_stats(ProblemKind::ImpliedVol, 10, 1).unwrap();
        assert_eq!(stats.resamples, 0);
        let bs = build_dataset(ProblemKind::BsPrice, 10, 1).unwrap();
        let iv = build_dataset(ProblemKind::ImpliedVol, 10, 1).unwrap();
        for i in 0..10 {
            assert_eq!(iv.inputs.row(i)[3], bs.labels[i], "price column mismatch");
            assert_eq!(iv.labels[i], bs.inputs.row(i)[3], "sigma column mismatch");
            assert_eq!(&iv.inputs.row(i)[..3], &bs.inputs.row(i)[..3]);
        }
    }

    #[test]
    fn transformed_inputs_in_table_range() {
        let (grid, stats) =
            build_dataset_with_stats(ProblemKind::TransformedImpliedVol, 10_000, 42).unwrap();
        for i in 0..grid.len() {
            let v = grid.inputs.row(i)[3];
            assert!(
                (-18.4207..=-0.95).contains(&v),
                "log time value {v} outside [-18.4207, -0.95]"
            );
        }
        // the box has ill-posed corners, so some redraws are expected
        assert!(stats.resamples > 0);
        assert!((stats.resamples as usize) < grid.len());
    }

    #[test]
    fn split_sizes_and_exhaustiveness() {
        let grid = build_dataset(ProblemKind::BsPrice, 1000, 3).unwrap();
        let (train, val, test) = split_dataset(&grid, 0.8, 100, 17).unwrap();
        assert_eq!(train.len(), 800);
        assert_eq!(val.len(), 200);
        assert_eq!(test.len(), 100);

        // union of train+validation rows equals the original row set
        let key = |row: &[f64]| {
            row.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()
        };
        let mut original: std::collections::HashMap<Vec<u64>, usize> = Default::default();
        for i in 0..grid.len() {
            *original.entry(key(grid.inputs.row(i))).or_default() += 1;
        }
        for part in [&train, &val] {
            for i in 0..part.len() {
                let k = key(part.inputs.row(i));
                let cnt = original.get_mut(&k).expect("row not from original grid");
                *cnt -= 1;
                if *cnt == 0 {
                    original.remove(&k);
                }
            }
        }
        assert!(original.is_empty(), "rows lost by the split");
    }

    #[test]
    fn test_grid_disjoint_from_generation_grid() {
        let grid = build_dataset(ProblemKind::BsPrice, 1000, 3).unwrap();
        let (_, _, test) = split_dataset(&grid, 0.8, 1000, 17).unwrap();
        let rows: std::collections::HashSet<Vec<u64>> = (0..grid.len())
            .map(|i| grid.inputs.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        for i in 0..test.len() {
            let k: Vec<u64> = test.inputs.row(i).iter().map(|v| v.to_bits()).collect();
            assert!(!rows.contains(&k), "identical row in test grid");
        }
    }

    #[test]
    fn split_rejects_bad_arguments() {
        let grid = build_dataset(ProblemKind::BsPrice, 10, 3).unwrap();
        assert!(split_dataset(&grid, 0.0, 10, 1).is_err());
        assert!(split_dataset(&grid, 1.0, 10, 1).is_err());
        assert!(split_dataset(&grid, 0.8, 0, 1).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = build_dataset(ProblemKind::ImpliedVol, 300, 5).unwrap();
        let b = build_dataset(ProblemKind::ImpliedVol, 300, 5).unwrap();
        assert_eq!(a, b);
    }
}
