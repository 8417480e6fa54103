use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::FitCriterion;
use crate::error::{Error, Result};
use crate::losses::{self, LossConfig, LossKind};
use crate::neuralnet::{train, ArchKind, Architecture, Model, TrainOptions};
use crate::rng::derive_seed;

/// Everything `fits` needs besides the size being probed.
#[derive(Debug, Clone)]
pub struct FitContext {
    pub arch: ArchKind,
    pub inputs: Array2<f64>,
    pub labels: Vec<f64>,
    pub loss: LossConfig,
    pub criterion: FitCriterion,
    pub restarts: usize,
    /// Restart seeds are derived from this, the size and the restart index.
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Stop at the first restart that fits. The verdict is the same either
    /// way; only the reported best metric can differ.
    pub stop_at_first_fit: bool,
    /// Train restarts on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl FitContext {
    pub fn new(
        arch: ArchKind,
        inputs: Array2<f64>,
        labels: Vec<f64>,
        loss: LossConfig,
        criterion: FitCriterion,
        seed: u64,
    ) -> Self {
        let batch_size = TrainOptions::default_batch_size(labels.len());
        FitContext {
            arch,
            inputs,
            labels,
            loss,
            criterion,
            restarts: 5,
            seed,
            learning_rate: crate::neuralnet::AdamState::DEFAULT_LEARNING_RATE,
            batch_size,
            stop_at_first_fit: true,
            parallel: false,
        }
    }

    pub fn architecture(&self, units: usize) -> Result<Architecture> {
        Architecture::new(self.arch, self.inputs.ncols(), units, self.loss.output_dim())
    }

    /// Seed for restart `restart` at size `units`.
    pub fn restart_seed(&self, units: usize, restart: usize) -> u64 {
        derive_seed(self.seed, &[units as u64, restart as u64])
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.inputs.nrows() != self.labels.len() {
            return Err(Error::shape(self.labels.len(), self.inputs.nrows()));
        }
        self.loss.validate()?;
        self.criterion.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub seed: u64,
    pub fits: bool,
    pub diverged: bool,
    pub epochs: usize,
    pub metric: f64,
    pub train_loss: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub units: usize,
    pub fits: bool,
    /// Best criterion metric over the restarts that ran.
    pub best_metric: f64,
    /// Training loss of the restart with the best metric.
    pub best_loss: f64,
    /// The first fitting restart, or the best one if none fit.
    pub best_seed: u64,
    pub model: Option<Model>,
    pub restarts: Vec<RestartOutcome>,
}

fn run_restart(ctx: &FitContext, arch: Architecture, seed: u64) -> Result<(RestartOutcome, Option<Model>)> {
    let mut model = Model::new(arch, seed);
    let options = TrainOptions {
        epochs: ctx.criterion.max_epochs,
        batch_size: ctx.batch_size,
        learning_rate: ctx.learning_rate,
        seed,
    };
    match train(&mut model, ctx.inputs.view(), &ctx.labels, &ctx.loss, &options, Some(&ctx.criterion)) {
        Ok(report) => Ok((
            RestartOutcome {
                seed,
                fits: report.criterion_met,
                diverged: false,
                epochs: report.epochs_run,
                metric: report.criterion_metric,
                train_loss: report.final_loss,
            },
            Some(model),
        )),
        Err(Error::Diverged { epoch }) => Ok((
            RestartOutcome {
                seed,
                fits: false,
                diverged: true,
                epochs: epoch,
                metric: ctx.criterion.worst_metric(),
                train_loss: f64::INFINITY,
            },
            None,
        )),
        Err(e) => Err(e),
    }
}

/// Trains up to `ctx.restarts` independently seeded networks with `units`
/// neurons (fixed depth) or layers (fixed width). The size fits if any
/// restart satisfies the criterion.
pub fn fits(units: usize, ctx: &FitContext) -> Result<FitOutcome> {
    if units == 0 {
        return Err(Error::InvalidArgument("architecture size must be >= 1".into()));
    }
    ctx.validate()?;
    let arch = ctx.architecture(units)?;
    let seeds: Vec<u64> = (0..ctx.restarts).map(|r| ctx.restart_seed(units, r)).collect();

    let mut runs = if ctx.parallel {
        seeds
            .par_iter()
            .map(|&s| run_restart(ctx, arch, s))
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut runs = Vec::with_capacity(seeds.len());
        for &s in &seeds {
            let run = run_restart(ctx, arch, s)?;
            let done = run.0.fits && ctx.stop_at_first_fit;
            runs.push(run);
            if done {
                break;
            }
        }
        runs
    };
    // Parallel runs are truncated the same way so the outcome never depends
    // on how restarts were scheduled.
    if ctx.stop_at_first_fit {
        if let Some(first) = runs.iter().position(|(r, _)| r.fits) {
            runs.truncate(first + 1);
        }
    }

    let pick = runs
        .iter()
        .position(|(r, _)| r.fits)
        .unwrap_or_else(|| {
            let mut best = 0;
            for (i, (r, _)) in runs.iter().enumerate() {
                if ctx.criterion.better(r.metric, runs[best].0.metric) {
                    best = i;
                }
            }
            best
        });
    let best_metric = runs
        .iter()
        .map(|(r, _)| r.metric)
        .fold(ctx.criterion.worst_metric(), |a, b| if ctx.criterion.better(b, a) { b } else { a });
    let (restarts, mut models): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    Ok(FitOutcome {
        units,
        fits: restarts[pick].fits,
        best_metric,
        best_loss: restarts[pick].train_loss,
        best_seed: restarts[pick].seed,
        model: models.swap_remove(pick),
        restarts,
    })
}

/// Test metric for the kind of criterion: the true loss for exact fitting,
/// MSE for threshold fitting.
pub fn test_metric_for(criterion: &FitCriterion) -> LossKind {
    match criterion.kind {
        super::CriterionKind::ExactL0 => LossKind::TrueL,
        super::CriterionKind::Threshold { .. } => LossKind::Mse,
    }
}

/// Evaluates a trained model on held-out data in EVAL mode. `loss` is the
/// training loss (it decides how outputs map to heuristic values);
/// `metric` selects the error measure. Cross-entropy yields accuracy.
pub fn test_error(
    model: &Model,
    inputs: ArrayView2<'_, f64>,
    labels: &[f64],
    loss: &LossConfig,
    metric: LossKind,
) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let outputs = model.outputs(inputs)?;
    let preds = loss.heuristic_values(outputs.view());
    match metric {
        LossKind::TrueL => losses::loss_true(&preds, labels, loss.epsilon),
        LossKind::Mse => losses::loss_mse(&preds, labels),
        LossKind::LEps => losses::loss_eps(&preds, labels, loss.epsilon, loss.c),
        LossKind::Scaled => losses::loss_scaled(&preds, labels),
        LossKind::CrossEntropy => losses::cross_entropy_accuracy(outputs.view(), labels, loss.epsilon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn binary_inputs(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = rng_from_seed(seed);
        Array2::from_shape_fn((rows, cols), |_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
    }

    fn constant_ctx() -> FitContext {
        let mut ctx = FitContext::new(
            ArchKind::FixedDepth,
            binary_inputs(48, 4, 1),
            vec![2.0; 48],
            LossConfig::l_eps(1.0, 10.0),
            FitCriterion::exact(),
            9,
        );
        ctx.learning_rate = 1e-2;
        ctx.batch_size = 16;
        ctx
    }

    #[test]
    fn constant_labels_fit_with_one_neuron() {
        let ctx = constant_ctx();
        let out = fits(1, &ctx).unwrap();
        assert!(out.fits);
        assert_eq!(out.best_metric, 0.0);
        assert_eq!(out.restarts.len(), 1, "stops at the first fit");
        let model = out.model.unwrap();
        let err = test_error(&model, ctx.inputs.view(), &ctx.labels, &ctx.loss, LossKind::TrueL).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn winning_seed_reproduces() {
        let ctx = constant_ctx();
        let out = fits(2, &ctx).unwrap();
        let (again, _) = run_restart(&ctx, ctx.architecture(2).unwrap(), out.best_seed).unwrap();
        assert!(again.fits);
        assert_eq!(again.metric, out.best_metric);
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut ctx = FitContext::new(
            ArchKind::FixedDepth,
            binary_inputs(40, 5, 2),
            (0..40).map(|i| (i % 5) as f64).collect(),
            LossConfig::mse(1.0),
            FitCriterion::threshold(LossKind::Mse, 1e-9).with_max_epochs(4),
            3,
        );
        ctx.restarts = 3;
        let a = fits(3, &ctx).unwrap();
        ctx.parallel = true;
        let b = fits(3, &ctx).unwrap();
        assert!(!a.fits);
        assert_eq!(a.restarts, b.restarts);
        assert_eq!(a.best_metric, b.best_metric);
        assert_eq!(a.best_seed, b.best_seed);
    }

    #[test]
    fn rejects_zero_size() {
        assert!(matches!(fits(0, &constant_ctx()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn constant_zero_model_has_full_true_loss() {
        let arch = Architecture::fixed_depth(3, 2, 1).unwrap();
        let mut model = Model::new(arch, 1);
        model.params.values.iter_mut().for_each(|v| *v = 0.0);
        let x = binary_inputs(10, 3, 4);
        let y: Vec<f64> = (1..=10).map(f64::from).collect();
        let loss = LossConfig::mse(1.0);
        assert_eq!(test_error(&model, x.view(), &y, &loss, LossKind::TrueL).unwrap(), 1.0);
        assert!(matches!(
            test_error(&model, x.view(), &[], &loss, LossKind::Mse),
            Err(Error::EmptyInput)
        ));
    }
}
