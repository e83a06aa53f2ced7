use pricenet::mathcore::ActivationKind;
use pricenet::nn::{init_params, InitKind, LayerKind, NetworkSpec};
use pricenet::optim::{evaluate, train, Optimizer, TrainConfig};
use pricenet::sampling::{build_dataset, split_dataset, ProblemKind};
use std::time::Instant;

fn spec(kind: LayerKind, act: ActivationKind, init: InitKind, d: usize) -> NetworkSpec {
    NetworkSpec {
        input_dim: d, layers: 3, nodes: 50, kind,
        hidden_act: act, gate_act: ActivationKind::Tanh, init,
    }
}

fn main() {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let problem: String = std::env::args().nth(3).unwrap_or_else(|| "bs".into());
    let kind_s: String = std::env::args().nth(4).unwrap_or_else(|| "all".into());

    let problem: ProblemKind = problem.parse().unwrap();
    let grid = build_dataset(problem, n, 42).unwrap();
    let (train_g, val_g, test_g) = split_dataset(&grid, 0.8, 10_000, 77).unwrap();
    println!("data ready: {} train, {} val, {} test", train_g.len(), val_g.len(), test_g.len());

    let d = problem.input_dim();
    let mut configs: Vec<(&str, NetworkSpec)> = vec![
        ("MLP", spec(LayerKind::Dense, ActivationKind::Relu, InitKind::HeNormal, d)),
        ("Highway", spec(LayerKind::Highway, ActivationKind::Tanh, InitKind::GlorotNormal, d)),
        ("GenHighway", spec(LayerKind::GeneralizedHighway, ActivationKind::Tanh, InitKind::GlorotNormal, d)),
        ("Residual", spec(LayerKind::Residual, ActivationKind::Tanh, InitKind::GlorotNormal, d)),
        ("Dgm", spec(LayerKind::Dgm, ActivationKind::Tanh, InitKind::GlorotNormal, d)),
        ("NoRecDgm", spec(LayerKind::NoRecDgm, ActivationKind::Tanh, InitKind::GlorotNormal, d)),
    ];
    if kind_s == "mlp" { configs.truncate(1); }
    if kind_s == "trio" { configs.truncate(3); }

    for (name, s) in configs {
        let mut mses = Vec::new();
        for seed in [1u64, 2, 3] {
            let t0 = Instant::now();
            let init = init_params(&s, seed).unwrap();
            let cfg = TrainConfig {
                learning_rate: 1e-5, batch_size: 64, epochs,
                shuffle_seed: seed + 1000, optimizer: Optimizer::PlainSgd,
            };
            let (trained, hist) = train(&s, init, &train_g, &val_g, &cfg).unwrap();
            let mse = evaluate(&s, &trained, &test_g).unwrap();
            mses.push(mse);
            println!("  {name} seed {seed}: test MSE {mse:.4e}  (train loss {:.4e}, {:.1}s)",
                hist.train_loss.last().unwrap(), t0.elapsed().as_secs_f64());
        }
        mses.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!("{name}: median test MSE {:.4e}", mses[1]);
    }
}
