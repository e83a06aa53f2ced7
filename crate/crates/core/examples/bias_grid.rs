use pricenet::mathcore::ActivationKind;
use pricenet::nn::{init_params, InitKind, LayerKind, NetworkSpec, Tensor};
use pricenet::optim::{evaluate, train, Optimizer, TrainConfig};
use pricenet::sampling::{build_dataset, split_dataset, ProblemKind};

fn main() {
    // args: problem epochs kind bt bc seeds...
    let args: Vec<String> = std::env::args().collect();
    let problem: ProblemKind = args[1].parse().unwrap();
    let epochs: usize = args[2].parse().unwrap();
    let kind = match args[3].as_str() {
        "mlp" => LayerKind::Dense,
        "res" => LayerKind::Residual,
        "hw" => LayerKind::Highway,
        "gh" => LayerKind::GeneralizedHighway,
        "dgm" => LayerKind::Dgm,
        "norec" => LayerKind::NoRecDgm,
        "deep" => LayerKind::DeepDgm(3),
        _ => panic!("kind"),
    };
    let bt: f64 = args[4].parse().unwrap();
    let bc: f64 = args[5].parse().unwrap();
    let seeds: Vec<u64> = args[6..].iter().map(|s| s.parse().unwrap()).collect();

    let grid = build_dataset(problem, 50_000, 42).unwrap();
    let (train_g, val_g, test_g) = split_dataset(&grid, 0.8, 10_000, 77).unwrap();

    let d = problem.input_dim();
    let s = NetworkSpec {
        input_dim: d, layers: 3, nodes: 50, kind,
        hidden_act: if kind == LayerKind::Dense { ActivationKind::Relu } else { ActivationKind::Tanh },
        gate_act: ActivationKind::Tanh,
        init: if kind == LayerKind::Dense { InitKind::HeNormal } else { InitKind::GlorotNormal },
    };
    let mut mses = Vec::new();
    for &seed in &seeds {
        let mut init = init_params(&s, seed).unwrap();
        // override gate biases per policy
        let names: Vec<String> = init.iter().map(|(n, _)| n.clone()).collect();
        for (i, name) in names.iter().enumerate() {
            let fill = if name.ends_with(".b_T") { Some(bt) }
                else if name.ends_with(".b_C") { Some(bc) }
                else if name.ends_with(".z.b") || name.ends_with(".g.b") { Some(bc) }
                else { None };
            if let Some(v) = fill {
                if let Tensor::Vec(vec) = init.tensor_at_mut(i) {
                    for e in vec.iter_mut() { *e = v; }
                }
            }
        }
        let cfg = TrainConfig {
            learning_rate: 1e-5, batch_size: 64, epochs,
            shuffle_seed: seed + 1000, optimizer: Optimizer::PlainSgd,
        };
        let (trained, _) = train(&s, init, &train_g, &val_g, &cfg).unwrap();
        let mse = evaluate(&s, &trained, &test_g).unwrap();
        mses.push(mse);
        eprintln!("   seed {seed}: {mse:.4e}");
    }
    mses.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("{} {} bt={bt} bc={bc}: median {:.4e}  all {:?}",
        args[3], problem, mses[mses.len()/2],
        mses.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>());
}
