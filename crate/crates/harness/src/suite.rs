//! Predefined experiment suites and the suite runner.

use crate::config::ExperimentConfig;
use crate::experiment::{prepare_data, run_experiment_with_data, RunRecord};
use crate::HarnessError;
use pricenet::mathcore::ActivationKind;
use pricenet::nn::{InitKind, LayerKind, NetworkSpec};
use pricenet::sampling::ProblemKind;
use std::path::PathBuf;

/// The benchmark suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    /// Twelve MLPs: 2 and 3 layers x {50, 100, 150, 200, 250, 500} nodes.
    Mlp12,
    /// Residual / Highway / Generalized Highway at 3x50 plus the small and
    /// large MLP anchors.
    Highway,
    /// The full architecture comparison: MLP anchors, highway trio and the
    /// three DGM variants.
    Dgm,
    /// The DGM variants alone.
    DgmVariants,
    /// Highway 4x50, Generalized Highway 3x50 and DGM 2x50, sized for a
    /// comparable parameter count.
    EqualParams,
}

impl SuiteName {
    pub fn id(self) -> &'static str {
        match self {
            SuiteName::Mlp12 => "mlp12",
            SuiteName::Highway => "highway",
            SuiteName::Dgm => "dgm",
            SuiteName::DgmVariants => "dgm_variants",
            SuiteName::EqualParams => "equal_params",
        }
    }
}

impl std::str::FromStr for SuiteName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mlp12" => Ok(SuiteName::Mlp12),
            "highway" => Ok(SuiteName::Highway),
            "dgm" => Ok(SuiteName::Dgm),
            "dgm_variants" => Ok(SuiteName::DgmVariants),
            "equal_params" => Ok(SuiteName::EqualParams),
            other => Err(format!(
                "unknown suite `{other}` (expected mlp12|highway|dgm|dgm_variants|equal_params)"
            )),
        }
    }
}

/// Dataset and epoch sizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 50k generation samples, 10k test, 50 epochs.
    Desk,
    /// 1M generation samples, 100k test, 200 epochs.
    Paper,
}

impl Scale {
    pub fn id(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        }
    }

    pub fn n_samples(self) -> usize {
        match self {
            Scale::Desk => 50_000,
            Scale::Paper => 1_000_000,
        }
    }

    pub fn n_test(self) -> usize {
        match self {
            Scale::Desk => 10_000,
            Scale::Paper => 100_000,
        }
    }

    pub fn epochs(self) -> usize {
        match self {
            Scale::Desk => 50,
            Scale::Paper => 200,
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(format!("unknown scale `{other}` (expected desk|paper)")),
        }
    }
}

/// Runtime options for a suite run.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    /// Seeds for init and shuffling; more than one seed reports the
    /// per-configuration median MSE.
    pub seeds: Vec<u64>,
    /// Worker threads, one experiment per worker.
    pub jobs: usize,
    pub data_seed: u64,
    pub split_seed: u64,
    /// Directory for per-run artifacts; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seeds: vec![1],
            jobs: 1,
            data_seed: 42,
            split_seed: 77,
            out_dir: None,
        }
    }
}

fn mlp(problem: ProblemKind, layers: usize, nodes: usize) -> NetworkSpec {
    NetworkSpec {
        input_dim: problem.input_dim(),
        layers,
        nodes,
        kind: LayerKind::Dense,
        hidden_act: ActivationKind::Relu,
        gate_act: ActivationKind::Tanh,
        init: InitKind::HeNormal,
    }
}

fn gated(problem: ProblemKind, kind: LayerKind, layers: usize) -> NetworkSpec {
    NetworkSpec {
        input_dim: problem.input_dim(),
        layers,
        nodes: 50,
        kind,
        hidden_act: ActivationKind::Tanh,
        gate_act: ActivationKind::Tanh,
        init: InitKind::GlorotNormal,
    }
}

/// The configurations of one suite, in table order.
pub fn suite_specs(name: SuiteName, problem: ProblemKind) -> Vec<(String, NetworkSpec)> {
    match name {
        SuiteName::Mlp12 => {
            let mut out = Vec::new();
            for layers in [2, 3] {
                for nodes in [50, 100, 150, 200, 250, 500] {
                    out.push((format!("MLP {layers}x{nodes}"), mlp(problem, layers, nodes)));
                }
            }
            out
        }
        SuiteName::Highway => vec![
            ("MLP 3x50".into(), mlp(problem, 3, 50)),
            ("Residual".into(), gated(problem, LayerKind::Residual, 3)),
            ("Highway".into(), gated(problem, LayerKind::Highway, 3)),
            (
                "Generalized Highway".into(),
                gated(problem, LayerKind::GeneralizedHighway, 3),
            ),
            ("MLP 3x500".into(), mlp(problem, 3, 500)),
        ],
        SuiteName::Dgm => vec![
            ("MLP 3x50".into(), mlp(problem, 3, 50)),
            ("Highway".into(), gated(problem, LayerKind::Highway, 3)),
            (
                "Generalized Highway".into(),
                gated(problem, LayerKind::GeneralizedHighway, 3),
            ),
            (
                "No-Recurrence DGM".into(),
                gated(problem, LayerKind::NoRecDgm, 3),
            ),
            ("DGM".into(), gated(problem, LayerKind::Dgm, 3)),
            ("Deep DGM".into(), gated(problem, LayerKind::DeepDgm(3), 3)),
            ("MLP 3x500".into(), mlp(problem, 3, 500)),
        ],
        SuiteName::DgmVariants => vec![
            (
                "No-Recurrence DGM".into(),
                gated(problem, LayerKind::NoRecDgm, 3),
            ),
            ("DGM".into(), gated(problem, LayerKind::Dgm, 3)),
            ("Deep DGM".into(), gated(problem, LayerKind::DeepDgm(3), 3)),
        ],
        SuiteName::EqualParams => vec![
            ("Highway 4x50".into(), gated(problem, LayerKind::Highway, 4)),
            (
                "Generalized Highway 3x50".into(),
                gated(problem, LayerKind::GeneralizedHighway, 3),
            ),
            ("DGM 2x50".into(), gated(problem, LayerKind::Dgm, 2)),
        ],
    }
}

/// Runs every configuration of a suite on `problem` at `scale`, one worker
/// thread per experiment, and returns one record per configuration sorted
/// by parameter count. With several seeds the reported MSE and time are the
/// per-configuration medians; record content is deterministic for fixed
/// seeds regardless of worker count.
pub fn run_suite(
    name: SuiteName,
    problem: ProblemKind,
    scale: Scale,
    opts: &SuiteOptions,
) -> Result<Vec<RunRecord>, HarnessError> {
    let specs = suite_specs(name, problem);
    if opts.seeds.is_empty() {
        return Err(HarnessError::Usage("need at least one seed".into()));
    }

    // all configs share the same data; build it once
    let base = ExperimentConfig {
        n_samples: scale.n_samples(),
        n_test: scale.n_test(),
        data_seed: opts.data_seed,
        split_seed: opts.split_seed,
        ..ExperimentConfig::new("base", problem, specs[0].1)
    };
    let (train_g, val_g, test_g) = prepare_data(&base)?;

    // one task per (config, seed)
    let mut tasks: Vec<ExperimentConfig> = Vec::new();
    for (cname, spec) in &specs {
        for &seed in &opts.seeds {
            let mut cfg = ExperimentConfig::new(cname.clone(), problem, *spec);
            cfg.train.epochs = scale.epochs();
            cfg.train.shuffle_seed = seed.wrapping_add(1000);
            cfg.init_seed = seed;
            cfg.n_samples = scale.n_samples();
            cfg.n_test = scale.n_test();
            cfg.data_seed = opts.data_seed;
            cfg.split_seed = opts.split_seed;
            cfg.out_dir = opts.out_dir.as_ref().map(|d| {
                if opts.seeds.len() > 1 {
                    d.join(format!("seed{seed}"))
                } else {
                    d.clone()
                }
            });
            tasks.push(cfg);
        }
    }

    let jobs = opts.jobs.max(1);
    let mut results: Vec<Option<Result<RunRecord, HarnessError>>> =
        (0..tasks.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for _ in 0..jobs.min(tasks.len()) {
            let next = &next;
            let tasks = &tasks;
            let (train_g, val_g, test_g) = (&train_g, &val_g, &test_g);
            handles.push(scope.spawn(move || {
                let mut local: Vec<(usize, Result<RunRecord, HarnessError>)> = Vec::new();
                loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= tasks.len() {
                        break;
                    }
                    let res = run_experiment_with_data(&tasks[i], train_g, val_g, test_g)
                        .map(|(record, _)| record);
                    local.push((i, res));
                }
                local
            }));
        }
        for handle in handles {
            for (i, res) in handle.join().expect("suite worker panicked") {
                results[i] = Some(res);
            }
        }
    });

    // aggregate seeds per configuration: median MSE and median time
    let per_seed = opts.seeds.len();
    let mut records = Vec::with_capacity(specs.len());
    for (c, (cname, spec)) in specs.iter().enumerate() {
        let mut mses = Vec::with_capacity(per_seed);
        let mut seconds = Vec::with_capacity(per_seed);
        for s in 0..per_seed {
            match results[c * per_seed + s].take().expect("missing result") {
                Ok(rec) => {
                    mses.push(rec.test_mse);
                    seconds.push(rec.train_seconds);
                }
                Err(e) => return Err(e),
            }
        }
        records.push(RunRecord {
            model: cname.clone(),
            layers: spec.layers,
            nodes: spec.nodes,
            parameters: pricenet::nn::count_params(spec),
            train_seconds: median(&mut seconds),
            test_mse: median(&mut mses),
        });
    }
    records.sort_by_key(|r| r.parameters);
    Ok(records)
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}
