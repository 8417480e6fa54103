use std::fmt;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::losses::{self, LossConfig, LossKind};

pub const EXACT_MAX_EPOCHS: usize = 3_000;
pub const THRESHOLD_MAX_EPOCHS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriterionKind {
    /// Every training sample predicted within ε/2 (true loss of zero).
    ExactL0,
    /// `metric ≤ threshold`, or accuracy ≥ threshold for cross-entropy.
    Threshold { metric: LossKind, threshold: f64 },
}

/// When a trained network counts as fitting its dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCriterion {
    pub kind: CriterionKind,
    pub max_epochs: usize,
}

/// Outcome of checking a criterion once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionCheck {
    pub metric: f64,
    pub satisfied: bool,
}

impl FitCriterion {
    pub fn exact() -> Self {
        FitCriterion {
            kind: CriterionKind::ExactL0,
            max_epochs: EXACT_MAX_EPOCHS,
        }
    }

    pub fn threshold(metric: LossKind, threshold: f64) -> Self {
        FitCriterion {
            kind: CriterionKind::Threshold { metric, threshold },
            max_epochs: THRESHOLD_MAX_EPOCHS,
        }
    }

    pub fn with_max_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument("criterion needs at least one epoch".into()));
        }
        if let CriterionKind::Threshold { metric, threshold } = self.kind {
            if !(threshold > 0.0 && threshold.is_finite()) {
                return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
            }
            if metric == LossKind::CrossEntropy && threshold > 1.0 {
                return Err(Error::InvalidArgument("accuracy threshold must be <= 1".into()));
            }
        }
        Ok(())
    }

    /// Short label used in results files: `exact` or `<metric>@<T>`.
    pub fn label(&self) -> String {
        match self.kind {
            CriterionKind::ExactL0 => "exact".into(),
            CriterionKind::Threshold { metric, threshold } => format!("{metric}@{threshold}"),
        }
    }

    pub fn threshold_value(&self) -> Option<f64> {
        match self.kind {
            CriterionKind::ExactL0 => None,
            CriterionKind::Threshold { threshold, .. } => Some(threshold),
        }
    }

    /// Whether larger metric values are better (accuracy).
    pub fn higher_is_better(&self) -> bool {
        matches!(
            self.kind,
            CriterionKind::Threshold {
                metric: LossKind::CrossEntropy,
                ..
            }
        )
    }

    /// True if metric `a` is strictly better than `b`.
    pub fn better(&self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }

    pub fn worst_metric(&self) -> f64 {
        if self.higher_is_better() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }

    /// Evaluates the criterion on raw network outputs. `loss` supplies ε,
    /// the class grid and `c`.
    pub fn check(&self, outputs: ArrayView2<'_, f64>, labels: &[f64], loss: &LossConfig) -> Result<CriterionCheck> {
        let preds = loss.heuristic_values(outputs);
        match self.kind {
            CriterionKind::ExactL0 => {
                let metric = losses::loss_true(&preds, labels, loss.epsilon)?;
                Ok(CriterionCheck {
                    metric,
                    satisfied: metric == 0.0,
                })
            }
            CriterionKind::Threshold { metric, threshold } => {
                let value = match metric {
                    LossKind::TrueL => losses::loss_true(&preds, labels, loss.epsilon)?,
                    LossKind::Mse => losses::loss_mse(&preds, labels)?,
                    LossKind::LEps => losses::loss_eps(&preds, labels, loss.epsilon, loss.c)?,
                    LossKind::Scaled => losses::loss_scaled(&preds, labels)?,
                    LossKind::CrossEntropy => losses::cross_entropy_accuracy(outputs, labels, loss.epsilon)?,
                };
                let satisfied = if metric == LossKind::CrossEntropy {
                    value >= threshold
                } else {
                    value <= threshold
                };
                Ok(CriterionCheck {
                    metric: value,
                    satisfied,
                })
            }
        }
    }
}

impl fmt::Display for FitCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
