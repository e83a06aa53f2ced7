//! Runs one experiment end to end: data, training, evaluation, artifacts.

use crate::config::ExperimentConfig;
use crate::{HarnessError, VERSION};
use pricenet::nn::{count_params, init_params, write_model};
use pricenet::optim::{evaluate, train, TrainError, TrainHistory};
use pricenet::sampling::{build_dataset, read_dataset, split_dataset, SampleGrid};
use std::path::Path;
use std::time::Instant;

/// One result row: model, size, parameter count, wall-clock training time
/// and test MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub layers: usize,
    pub nodes: usize,
    pub parameters: usize,
    pub train_seconds: f64,
    pub test_mse: f64,
}

impl RunRecord {
    pub fn hours(&self) -> f64 {
        self.train_seconds / 3600.0
    }

    pub const CSV_HEADER: &'static str =
        "model,layers,nodes,parameters,train_seconds,test_mse";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.16e}",
            self.model, self.layers, self.nodes, self.parameters, self.train_seconds,
            self.test_mse
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self, HarnessError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(HarnessError::Config(format!(
                "record row needs 6 fields, got {}",
                fields.len()
            )));
        }
        let parse =
            |v: &str| -> Result<f64, HarnessError> {
                v.parse()
                    .map_err(|e| HarnessError::Config(format!("bad record field `{v}`: {e}")))
            };
        Ok(RunRecord {
            model: fields[0].to_string(),
            layers: parse(fields[1])? as usize,
            nodes: parse(fields[2])? as usize,
            parameters: parse(fields[3])? as usize,
            train_seconds: parse(fields[4])?,
            test_mse: parse(fields[5])?,
        })
    }
}

/// Builds or loads the experiment's train/validation/test grids.
pub fn prepare_data(
    cfg: &ExperimentConfig,
) -> Result<(SampleGrid, SampleGrid, SampleGrid), HarnessError> {
    let full = match &cfg.dataset {
        Some(path) => {
            let grid = read_dataset(path)?;
            if grid.problem != cfg.problem {
                return Err(HarnessError::Config(format!(
                    "dataset {} holds problem `{}`, config wants `{}`",
                    path.display(),
                    grid.problem,
                    cfg.problem
                )));
            }
            grid
        }
        None => build_dataset(cfg.problem, cfg.n_samples, cfg.data_seed)?,
    };
    let (train_g, val_g, mut test_g) =
        split_dataset(&full, cfg.train_frac, cfg.n_test, cfg.split_seed)?;
    if let Some(path) = &cfg.test_dataset {
        test_g = read_dataset(path)?;
        if test_g.problem != cfg.problem {
            return Err(HarnessError::Config("test dataset problem mismatch".into()));
        }
    }
    Ok((train_g, val_g, test_g))
}

/// Runs one experiment on already-prepared grids. Wall time is measured
/// around the training loop only.
pub fn run_experiment_with_data(
    cfg: &ExperimentConfig,
    train_g: &SampleGrid,
    val_g: &SampleGrid,
    test_g: &SampleGrid,
) -> Result<(RunRecord, TrainHistory), HarnessError> {
    cfg.validate()?;
    let params = init_params(&cfg.spec, cfg.init_seed)?;

    let started = Instant::now();
    let outcome = train(&cfg.spec, params, train_g, val_g, &cfg.train);
    let train_seconds = started.elapsed().as_secs_f64();

    let (trained, history) = match outcome {
        Ok(pair) => pair,
        Err(TrainError::Divergence { epoch, history }) => {
            // keep the partial curves on disk before propagating
            if let Some(dir) = &cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                write_history(&history, cfg, &dir.join(file_stem(&cfg.name) + ".history.csv"))?;
            }
            return Err(HarnessError::Train(TrainError::Divergence { epoch, history }));
        }
        Err(e) => return Err(e.into()),
    };

    let test_mse = evaluate(&cfg.spec, &trained, test_g)?;
    let record = RunRecord {
        model: cfg.name.clone(),
        layers: cfg.spec.layers,
        nodes: cfg.spec.nodes,
        parameters: count_params(&cfg.spec),
        train_seconds,
        test_mse,
    };

    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let stem = file_stem(&cfg.name);
        write_model(&cfg.spec, &trained, &dir.join(stem.clone() + ".model.txt"))?;
        write_history(&history, cfg, &dir.join(stem.clone() + ".history.csv"))?;
        let record_path = dir.join(stem + ".record.csv");
        let mut text = format!(
            "# pricenet v{VERSION} problem={} data_seed={} split_seed={} init_seed={} shuffle_seed={}\n",
            cfg.problem, cfg.data_seed, cfg.split_seed, cfg.init_seed, cfg.train.shuffle_seed
        );
        text.push_str(RunRecord::CSV_HEADER);
        text.push('\n');
        text.push_str(&record.to_csv_row());
        text.push('\n');
        std::fs::write(record_path, text)?;
    }
    Ok((record, history))
}

/// Prepares the data per the config, then runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(RunRecord, TrainHistory), HarnessError> {
    cfg.validate()?;
    let (train_g, val_g, test_g) = prepare_data(cfg)?;
    run_experiment_with_data(cfg, &train_g, &val_g, &test_g)
}

fn write_history(
    history: &TrainHistory,
    cfg: &ExperimentConfig,
    path: &Path,
) -> Result<(), HarnessError> {
    let mut text = format!(
        "# pricenet v{VERSION} problem={} data_seed={} init_seed={} shuffle_seed={}\n",
        cfg.problem, cfg.data_seed, cfg.init_seed, cfg.train.shuffle_seed
    );
    text.push_str(&history.to_csv());
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}
