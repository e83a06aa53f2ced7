//! Latin hypercube sampling over the problem parameter boxes, dataset
//! construction with ground-truth labels, splitting, and serialization.

mod dataset;
mod io;
mod lhs;

pub use dataset::{
    build_dataset, build_dataset_with_stats, split_dataset, BuildStats, SampleGrid,
};
pub use io::{read_dataset, write_dataset};
pub use lhs::lhs_sample;

use crate::pricing::PriceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("dimension error: {0}")]
    Dimension(&'static str),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pricing(#[from] PriceError),
    #[error("row resampling failed after {0} attempts")]
    ResampleCap(usize),
}

/// The four supervised learning problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Inputs (m, tau, r, sigma), label = scaled Black-Scholes call price.
    BsPrice,
    /// Inputs (m, tau, r, rho, kappa, vbar, gamma, v0), label = Heston COS
    /// call price per unit spot.
    HestonPrice,
    /// Inputs (m, tau, r, scaled price), label = volatility.
    ImpliedVol,
    /// As `ImpliedVol` with the price input replaced by the log of the
    /// scaled time value.
    TransformedImpliedVol,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::BsPrice,
        ProblemKind::HestonPrice,
        ProblemKind::ImpliedVol,
        ProblemKind::TransformedImpliedVol,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ProblemKind::BsPrice => "bs",
            ProblemKind::HestonPrice => "heston",
            ProblemKind::ImpliedVol => "iv",
            ProblemKind::TransformedImpliedVol => "tiv",
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            ProblemKind::HestonPrice => 8,
            _ => 4,
        }
    }

    pub fn input_names(self) -> &'static [&'static str] {
        match self {
            ProblemKind::BsPrice => &["m", "tau", "r", "sigma"],
            ProblemKind::HestonPrice => {
                &["m", "tau", "r", "rho", "kappa", "vbar", "gamma", "v0"]
            }
            ProblemKind::ImpliedVol => &["m", "tau", "r", "scaled_price"],
            ProblemKind::TransformedImpliedVol => &["m", "tau", "r", "log_time_value"],
        }
    }

    /// The parameter box the raw draws come from. Both implied-volatility
    /// problems are generated from Black-Scholes draws and role-swapped.
    pub fn generating_box(self) -> ParamBox {
        match self {
            ProblemKind::HestonPrice => ParamBox::heston(),
            _ => ParamBox::black_scholes(),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bs" => Ok(ProblemKind::BsPrice),
            "heston" => Ok(ProblemKind::HestonPrice),
            "iv" => Ok(ProblemKind::ImpliedVol),
            "tiv" => Ok(ProblemKind::TransformedImpliedVol),
            other => Err(format!("unknown problem `{other}` (expected bs|heston|iv|tiv)")),
        }
    }
}

/// Axis-aligned sampling box with named dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    dims: Vec<(String, f64, f64)>,
}

impl ParamBox {
    pub fn new(dims: Vec<(String, f64, f64)>) -> Result<Self, SampleError> {
        if dims.is_empty() {
            return Err(SampleError::Dimension("box needs at least one dimension"));
        }
        for (name, lo, hi) in &dims {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SampleError::Format(format!(
                    "invalid bounds for `{name}`: [{lo}, {hi}]"
                )));
            }
        }
        Ok(ParamBox { dims })
    }

    /// Black-Scholes generation box: m, tau, r, sigma.
    pub fn black_scholes() -> Self {
        ParamBox {
            dims: vec![
                ("m".into(), 0.4, 1.6),
                ("tau".into(), 0.2, 1.1),
                ("r".into(), 0.02, 0.1),
                ("sigma".into(), 0.01, 1.0),
            ],
        }
    }

    /// Heston generation box: m, tau, r, rho, kappa, vbar, gamma, v0.
    pub fn heston() -> Self {
        ParamBox {
            dims: vec![
                ("m".into(), 0.4, 1.6),
                ("tau".into(), 0.2, 1.1),
                ("r".into(), 0.02, 0.1),
                ("rho".into(), -0.95, 0.0),
                ("kappa".into(), 0.0, 2.0),
                ("vbar".into(), 0.0, 0.5),
                ("gamma".into(), 0.0, 0.5),
                ("v0".into(), 0.05, 0.5),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|(n, _, _)| n.as_str()).collect()
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.dims[j].1, self.dims[j].2)
    }

    pub fn contains(&self, row: &[f64]) -> bool {
        row.len() == self.dim()
            && row
                .iter()
                .zip(&self.dims)
                .all(|(&v, (_, lo, hi))| v >= *lo && v <= *hi)
    }
}
