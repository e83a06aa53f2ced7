//! Experiment harness: configurations mirroring the benchmark suites, a
//! runner that generates data, trains and evaluates one network, suite
//! definitions, result tables/plot data, and validation oracles.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod report;
pub mod suite;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, run_experiment_with_data, RunRecord};
pub use report::{parse_records_csv, report, ReportFormat};
pub use suite::{run_suite, Scale, SuiteName, SuiteOptions};

use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sample(#[from] pricenet::sampling::SampleError),
    #[error(transparent)]
    Net(#[from] pricenet::nn::NetError),
    #[error(transparent)]
    Train(#[from] pricenet::optim::TrainError),
    #[error(transparent)]
    Price(#[from] pricenet::pricing::PriceError),
}
