//! Experiment configuration and its flat key=value file format.

use crate::HarnessError;
use pricenet::mathcore::ActivationKind;
use pricenet::nn::{InitKind, LayerKind, NetworkSpec};
use pricenet::optim::{Optimizer, TrainConfig};
use pricenet::sampling::ProblemKind;
use std::path::{Path, PathBuf};

/// Everything one experiment needs: the problem, the architecture, the
/// training setup, dataset sizes and seeds, and where to put outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Display name used in result tables.
    pub name: String,
    pub problem: ProblemKind,
    pub spec: NetworkSpec,
    pub train: TrainConfig,
    pub n_samples: usize,
    pub train_frac: f64,
    pub n_test: usize,
    pub data_seed: u64,
    pub split_seed: u64,
    pub init_seed: u64,
    /// Pre-generated dataset to load instead of generating.
    pub dataset: Option<PathBuf>,
    /// Pre-generated test dataset to load instead of drawing one.
    pub test_dataset: Option<PathBuf>,
    /// Where to write the trained model, history and record; nothing is
    /// written when absent.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A named architecture on `problem` with desk defaults for everything
    /// else.
    pub fn new(name: impl Into<String>, problem: ProblemKind, spec: NetworkSpec) -> Self {
        ExperimentConfig {
            name: name.into(),
            problem,
            spec,
            train: TrainConfig::default(),
            n_samples: 50_000,
            train_frac: 0.8,
            n_test: 10_000,
            data_seed: 42,
            split_seed: 77,
            init_seed: 1,
            dataset: None,
            test_dataset: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.spec
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.spec.input_dim != self.problem.input_dim() {
            return Err(HarnessError::Config(format!(
                "spec input_dim {} does not match problem `{}` ({} inputs)",
                self.spec.input_dim,
                self.problem,
                self.problem.input_dim()
            )));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(HarnessError::Config("train_frac must lie in (0, 1)".into()));
        }
        if self.n_samples < 2 || self.n_test == 0 {
            return Err(HarnessError::Config("dataset sizes too small".into()));
        }
        for file in [&self.dataset, &self.test_dataset].into_iter().flatten() {
            if !file.exists() {
                return Err(HarnessError::Config(format!(
                    "referenced dataset file {} does not exist",
                    file.display()
                )));
            }
        }
        Ok(())
    }

    /// Renders the flat key=value form.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("name", self.name.clone());
        push("problem", self.problem.id().into());
        push("kind", self.spec.kind.id().into());
        push("n_sub", self.spec.kind.n_sub().to_string());
        push("layers", self.spec.layers.to_string());
        push("nodes", self.spec.nodes.to_string());
        push("hidden_act", self.spec.hidden_act.name().into());
        push("gate_act", self.spec.gate_act.name().into());
        push("init", self.spec.init.id().into());
        push("learning_rate", format!("{:e}", self.train.learning_rate));
        push("batch_size", self.train.batch_size.to_string());
        push("epochs", self.train.epochs.to_string());
        push("optimizer", self.train.optimizer.id().into());
        push("shuffle_seed", self.train.shuffle_seed.to_string());
        push("n_samples", self.n_samples.to_string());
        push("train_frac", self.train_frac.to_string());
        push("n_test", self.n_test.to_string());
        push("data_seed", self.data_seed.to_string());
        push("split_seed", self.split_seed.to_string());
        push("init_seed", self.init_seed.to_string());
        if let Some(p) = &self.dataset {
            push("dataset", p.display().to_string());
        }
        if let Some(p) = &self.test_dataset {
            push("test_dataset", p.display().to_string());
        }
        if let Some(p) = &self.out_dir {
            push("out_dir", p.display().to_string());
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_key_values())?;
        Ok(())
    }

    /// Parses the flat key=value form. Unknown keys are rejected.
    pub fn from_key_values(text: &str) -> Result<Self, HarnessError> {
        let bad = |msg: String| HarnessError::Config(msg);
        let mut name = None;
        let mut problem: Option<ProblemKind> = None;
        let mut kind_id: Option<String> = None;
        let mut n_sub = 1usize;
        let mut layers = None;
        let mut nodes = None;
        let mut hidden_act: Option<ActivationKind> = None;
        let mut gate_act = ActivationKind::Tanh;
        let mut init: Option<InitKind> = None;
        let mut train = TrainConfig::default();
        let mut n_samples = 50_000usize;
        let mut train_frac = 0.8f64;
        let mut n_test = 10_000usize;
        let mut data_seed = 42u64;
        let mut split_seed = 77u64;
        let mut init_seed = 1u64;
        let mut dataset = None;
        let mut test_dataset = None;
        let mut out_dir = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|e| bad(format!("{key}: {e}")))
            };
            let parse_u64 = |v: &str| v.parse::<u64>().map_err(|e| bad(format!("{key}: {e}")));
            let parse_f64 = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "name" => name = Some(value.to_string()),
                "problem" => problem = Some(value.parse().map_err(bad)?),
                "kind" => kind_id = Some(value.to_string()),
                "n_sub" => n_sub = parse_usize(value)?,
                "layers" => layers = Some(parse_usize(value)?),
                "nodes" => nodes = Some(parse_usize(value)?),
                "hidden_act" => hidden_act = Some(value.parse().map_err(bad)?),
                "gate_act" => gate_act = value.parse().map_err(bad)?,
                "init" => init = Some(value.parse().map_err(bad)?),
                "learning_rate" => train.learning_rate = parse_f64(value)?,
                "batch_size" => train.batch_size = parse_usize(value)?,
                "epochs" => train.epochs = parse_usize(value)?,
                "optimizer" => train.optimizer = value.parse::<Optimizer>().map_err(bad)?,
                "shuffle_seed" => train.shuffle_seed = parse_u64(value)?,
                "n_samples" => n_samples = parse_usize(value)?,
                "train_frac" => train_frac = parse_f64(value)?,
                "n_test" => n_test = parse_usize(value)?,
                "data_seed" => data_seed = parse_u64(value)?,
                "split_seed" => split_seed = parse_u64(value)?,
                "init_seed" => init_seed = parse_u64(value)?,
                "dataset" => dataset = Some(PathBuf::from(value)),
                "test_dataset" => test_dataset = Some(PathBuf::from(value)),
                "out_dir" => out_dir = Some(PathBuf::from(value)),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }

        let problem = problem.ok_or_else(|| bad("missing `problem`".into()))?;
        let kind = LayerKind::from_id(
            &kind_id.ok_or_else(|| bad("missing `kind`".into()))?,
            n_sub,
        )
        .map_err(bad)?;
        let spec = NetworkSpec {
            input_dim: problem.input_dim(),
            layers: layers.ok_or_else(|| bad("missing `layers`".into()))?,
            nodes: nodes.ok_or_else(|| bad("missing `nodes`".into()))?,
            kind,
            hidden_act: hidden_act.ok_or_else(|| bad("missing `hidden_act`".into()))?,
            gate_act,
            init: init.ok_or_else(|| bad("missing `init`".into()))?,
        };
        let cfg = ExperimentConfig {
            name: name.unwrap_or_else(|| format!("{} {}x{}", kind.display_name(), spec.layers, spec.nodes)),
            problem,
            spec,
            train,
            n_samples,
            train_frac,
            n_test,
            data_seed,
            split_seed,
            init_seed,
            dataset,
            test_dataset,
            out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_key_values(&text)
    }
}
