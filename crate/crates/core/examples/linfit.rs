// exact least-squares linear fit (with intercept) per problem, as a bound on
// what the mean/linear learning phase can achieve
use pricenet::sampling::{build_dataset, split_dataset, ProblemKind};

fn main() {
    for problem in [ProblemKind::BsPrice, ProblemKind::ImpliedVol, ProblemKind::TransformedImpliedVol] {
        let grid = build_dataset(problem, 50_000, 42).unwrap();
        let (train_g, _, test_g) = split_dataset(&grid, 0.8, 10_000, 77).unwrap();
        let d = grid.inputs.cols() + 1;
        // normal equations A^T A w = A^T y with intercept column
        let n = train_g.len();
        let mut ata = vec![vec![0.0f64; d]; d];
        let mut aty = vec![0.0f64; d];
        for i in 0..n {
            let mut row = vec![1.0f64];
            row.extend_from_slice(train_g.inputs.row(i));
            for a in 0..d {
                aty[a] += row[a] * train_g.labels[i];
                for b in 0..d {
                    ata[a][b] += row[a] * row[b];
                }
            }
        }
        // gaussian elimination
        let mut m = ata.clone();
        let mut w = aty.clone();
        for col in 0..d {
            let piv = (col..d).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()).unwrap();
            m.swap(col, piv); w.swap(col, piv);
            let p = m[col][col];
            for r in 0..d {
                if r != col {
                    let f = m[r][col] / p;
                    for c in 0..d { m[r][c] -= f * m[col][c]; }
                    w[r] -= f * w[col];
                }
            }
        }
        let coef: Vec<f64> = (0..d).map(|i| w[i] / m[i][i]).collect();
        let mse = |g: &pricenet::sampling::SampleGrid| {
            let mut s = 0.0;
            for i in 0..g.len() {
                let mut pred = coef[0];
                for (j, x) in g.inputs.row(i).iter().enumerate() { pred += coef[j + 1] * x; }
                let diff = pred - g.labels[i];
                s += diff * diff;
            }
            s / g.len() as f64
        };
        println!("{problem}: linear-fit train MSE {:.4e}, test MSE {:.4e}", mse(&train_g), mse(&test_g));
    }
}
