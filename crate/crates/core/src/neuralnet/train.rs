use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;

use super::network::{backward, forward, Mode, BATCH_NORM_MOMENTUM};
use super::{AdamState, Model};
use crate::error::{Error, Result};
use crate::experiment::FitCriterion;
use crate::losses::LossConfig;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Seeds the mini-batch shuffling.
    pub seed: u64,
}

impl TrainOptions {
    /// Batch size 64 for small training sets, 256 for large ones.
    pub fn default_batch_size(train_len: usize) -> usize {
        if train_len >= 100_000 {
            256
        } else {
            64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean training loss of the last epoch.
    pub final_loss: f64,
    pub best_loss: f64,
    pub criterion_met: bool,
    /// Criterion metric after the last epoch (NaN if no criterion was given).
    pub criterion_metric: f64,
    /// Best criterion metric seen over all epochs.
    pub best_metric: f64,
    pub loss_history: Vec<f64>,
}

/// Mean-batch loss and its gradient with respect to every trainable
/// parameter, in the given mode. Does not touch running statistics.
pub fn loss_and_gradient(
    model: &Model,
    inputs: ArrayView2<'_, f64>,
    labels: &[f64],
    loss: &LossConfig,
    mode: Mode,
) -> Result<(f64, Vec<f64>)> {
    if !loss.is_differentiable() {
        return Err(Error::NondifferentiableLoss(loss.kind.name()));
    }
    let pass = forward(model.layout(), &model.params, inputs, mode)?;
    let (value, d_out) = loss.value_and_grad(pass.output.view(), labels)?;
    let grad = backward(model.layout(), &model.params, &pass, d_out.view())?;
    Ok((value, grad))
}

/// Shuffled mini-batch Adam. The criterion, when given, is checked on the
/// full training set in EVAL mode after every epoch and stops training once
/// it holds.
pub fn train(
    model: &mut Model,
    inputs: ArrayView2<'_, f64>,
    labels: &[f64],
    loss: &LossConfig,
    options: &TrainOptions,
    criterion: Option<&FitCriterion>,
) -> Result<TrainReport> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if inputs.nrows() != labels.len() {
        return Err(Error::shape(labels.len(), inputs.nrows()));
    }
    if !loss.is_differentiable() {
        return Err(Error::NondifferentiableLoss(loss.kind.name()));
    }
    if options.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }

    let mut rng = rng_from_seed(derive_seed(options.seed, &[0x5348_5546]));
    let mut adam = AdamState::new(model.params.values.len(), options.learning_rate);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut report = TrainReport {
        epochs_run: 0,
        final_loss: f64::NAN,
        best_loss: f64::INFINITY,
        criterion_met: false,
        criterion_metric: f64::NAN,
        best_metric: criterion.map_or(f64::NAN, |c| c.worst_metric()),
        loss_history: Vec::with_capacity(options.epochs),
    };
    let mut batch_y = Vec::with_capacity(options.batch_size);

    for epoch in 1..=options.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(options.batch_size) {
            let batch_x = inputs.select(Axis(0), chunk);
            batch_y.clear();
            batch_y.extend(chunk.iter().map(|&i| labels[i]));

            let pass = forward(model.layout(), &model.params, batch_x.view(), Mode::Train)?;
            let (value, d_out) = loss.value_and_grad(pass.output.view(), &batch_y)?;
            if !value.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let grad = backward(model.layout(), &model.params, &pass, d_out.view())?;
            adam.update(&mut model.params.values, &grad);
            model.params.update_running_stats(&pass, BATCH_NORM_MOMENTUM);
            total += value * chunk.len() as f64;
        }
        let epoch_loss = total / labels.len() as f64;
        if !epoch_loss.is_finite() || !model.params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        report.epochs_run = epoch;
        report.final_loss = epoch_loss;
        report.best_loss = report.best_loss.min(epoch_loss);
        report.loss_history.push(epoch_loss);

        if let Some(criterion) = criterion {
            let outputs = model.outputs(inputs)?;
            let check = criterion.check(outputs.view(), labels, loss)?;
            report.criterion_metric = check.metric;
            if criterion.better(check.metric, report.best_metric) {
                report.best_metric = check.metric;
            }
            if check.satisfied {
                report.criterion_met = true;
                break;
            }
        }
    }
    Ok(report)
}
