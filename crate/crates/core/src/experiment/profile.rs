use std::fmt;
use std::str::FromStr;

use super::FitCriterion;
use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::neuralnet::ArchKind;

/// Dataset sizes, restarts and epoch caps for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    pub name: &'static str,
    /// Training samples under exact fitting.
    pub train_exact: usize,
    /// Training samples under a relaxed (threshold) criterion.
    pub train_threshold: usize,
    pub test_count: usize,
    pub restarts: usize,
    pub exact_epochs: usize,
    pub threshold_epochs: usize,
}

impl Profile {
    /// Laptop-sized runs: small sets, three restarts, halved epoch caps.
    pub const DESK: Profile = Profile {
        name: "desk",
        train_exact: 3_000,
        train_threshold: 3_000,
        test_count: 10_000,
        restarts: 3,
        exact_epochs: 1_500,
        threshold_epochs: 150,
    };

    /// Full-scale protocol: large datasets, 5 restarts.
    pub const PAPER: Profile = Profile {
        name: "paper",
        train_exact: 3_000,
        train_threshold: 1_000_000,
        test_count: 200_000,
        restarts: 5,
        exact_epochs: 3_000,
        threshold_epochs: 300,
    };

    pub fn train_count(&self, criterion: &FitCriterion) -> usize {
        match criterion.threshold_value() {
            None => self.train_exact,
            Some(_) => self.train_threshold,
        }
    }

    /// The criterion with this profile's epoch cap.
    pub fn with_epochs(&self, criterion: FitCriterion) -> FitCriterion {
        let cap = match criterion.threshold_value() {
            None => self.exact_epochs,
            Some(_) => self.threshold_epochs,
        };
        criterion.with_max_epochs(cap)
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::DESK),
            "paper" => Ok(Profile::PAPER),
            _ => Err(Error::InvalidArgument(format!("unknown profile `{s}` (expected desk or paper)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Threshold presets for the relaxed-criterion sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSet {
    FixedDepthMse,
    FixedWidthMse,
    /// One criterion per training loss: scaled, cross-entropy accuracy, MSE.
    LossComparison,
}

impl ThresholdSet {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdSet::FixedDepthMse => "fixed-depth-mse",
            ThresholdSet::FixedWidthMse => "fixed-width-mse",
            ThresholdSet::LossComparison => "loss-comparison",
        }
    }

    /// The MSE threshold for a domain under an architecture.
    pub fn mse_threshold(arch: ArchKind, domain: DomainKind) -> f64 {
        let set = match arch {
            ArchKind::FixedDepth => ThresholdSet::FixedDepthMse,
            ArchKind::FixedWidth => ThresholdSet::FixedWidthMse,
        };
        set.criteria(domain)[0].1
    }

    /// `(metric, threshold)` pairs. Each sweep trains on its own metric.
    pub fn criteria(self, domain: DomainKind) -> Vec<(LossKind, f64)> {
        use DomainKind::*;
        match self {
            ThresholdSet::FixedDepthMse => vec![(
                LossKind::Mse,
                match domain {
                    Pancake => 0.2,
                    Tsp => 0.35,
                    Blocks => 0.2,
                },
            )],
            ThresholdSet::FixedWidthMse => vec![(
                LossKind::Mse,
                match domain {
                    Pancake => 0.1,
                    Tsp => 0.35,
                    Blocks => 0.02,
                },
            )],
            ThresholdSet::LossComparison => vec![
                (LossKind::Scaled, 0.001),
                (LossKind::CrossEntropy, 0.9),
                (LossKind::Mse, 0.2),
            ],
        }
    }

    pub fn fit_criteria(self, domain: DomainKind) -> Vec<FitCriterion> {
        self.criteria(domain)
            .into_iter()
            .map(|(metric, t)| FitCriterion::threshold(metric, t))
            .collect()
    }
}

impl FromStr for ThresholdSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-depth-mse" => Ok(ThresholdSet::FixedDepthMse),
            "fixed-width-mse" => Ok(ThresholdSet::FixedWidthMse),
            "loss-comparison" => Ok(ThresholdSet::LossComparison),
            _ => Err(Error::InvalidArgument(format!("unknown threshold set `{s}`"))),
        }
    }
}
