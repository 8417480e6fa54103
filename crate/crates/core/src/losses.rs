//! The ε-bounded loss family.
//!
//! For a prediction error x = ĥ(s) − h*(s):
//!
//! * the true loss scores 1 when |x| ≥ ε/2 and 0 otherwise;
//! * `l_ε(x) = x² · σ(c((2x/ε)² − 1))`, a smooth surrogate whose sigmoid
//!   gate closes inside the ε/2 band and opens outside it, with `c`
//!   controlling how sharp the transition is;
//! * MSE, categorical cross-entropy over the ε-grid of labels, and the
//!   relative-error scaled loss `(1 − ĥ/h*)²`.
//!
//! Every batch loss is a mean over samples; gradients are of that mean.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    TrueL,
    LEps,
    Mse,
    CrossEntropy,
    Scaled,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::TrueL => "true",
            LossKind::LEps => "l_eps",
            LossKind::Mse => "mse",
            LossKind::CrossEntropy => "cross_entropy",
            LossKind::Scaled => "scaled",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "l" | "true_l" | "l0" => Ok(LossKind::TrueL),
            "l_eps" | "leps" | "eps" => Ok(LossKind::LEps),
            "mse" => Ok(LossKind::Mse),
            "cross_entropy" | "ce" | "xent" => Ok(LossKind::CrossEntropy),
            "scaled" => Ok(LossKind::Scaled),
            other => Err(Error::InvalidArgument(format!("unknown loss `{other}`"))),
        }
    }
}

/// A loss together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub kind: LossKind,
    /// Minimum nonzero cost gap of the domain.
    pub epsilon: f64,
    /// Smoothness of `l_ε`; ignored by the other losses.
    pub c: f64,
    /// Number of classes on the label grid (cross-entropy only).
    pub classes: usize,
}

impl LossConfig {
    pub fn new(kind: LossKind, epsilon: f64) -> Self {
        LossConfig {
            kind,
            epsilon,
            c: 0.0,
            classes: 1,
        }
    }

    pub fn true_l(epsilon: f64) -> Self {
        Self::new(LossKind::TrueL, epsilon)
    }

    pub fn l_eps(epsilon: f64, c: f64) -> Self {
        LossConfig {
            c,
            ..Self::new(LossKind::LEps, epsilon)
        }
    }

    pub fn mse(epsilon: f64) -> Self {
        Self::new(LossKind::Mse, epsilon)
    }

    pub fn scaled(epsilon: f64) -> Self {
        Self::new(LossKind::Scaled, epsilon)
    }

    pub fn cross_entropy(epsilon: f64, classes: usize) -> Self {
        LossConfig {
            classes,
            ..Self::new(LossKind::CrossEntropy, epsilon)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be finite and >= 0, got {}", self.c)));
        }
        if self.kind == LossKind::CrossEntropy && self.classes == 0 {
            return Err(Error::InvalidArgument("cross-entropy needs at least one class".into()));
        }
        Ok(())
    }

    /// Network output width this loss expects.
    pub fn output_dim(&self) -> usize {
        match self.kind {
            LossKind::CrossEntropy => self.classes,
            _ => 1,
        }
    }

    pub fn is_differentiable(&self) -> bool {
        self.kind != LossKind::TrueL
    }

    /// Class index of a label on the ε-grid.
    pub fn class_of(&self, label: f64) -> Result<usize> {
        class_index(label, self.epsilon, self.classes)
    }

    /// Heuristic values implied by raw network outputs: the regression
    /// output, or the arg-max class times ε for cross-entropy.
    pub fn heuristic_values(&self, outputs: ArrayView2<'_, f64>) -> Vec<f64> {
        match self.kind {
            LossKind::CrossEntropy => outputs
                .rows()
                .into_iter()
                .map(|row| argmax(row.iter().copied()) as f64 * self.epsilon)
                .collect(),
            _ => outputs.column(0).to_vec(),
        }
    }

    /// Mean loss over the batch.
    pub fn value(&self, outputs: ArrayView2<'_, f64>, labels: &[f64]) -> Result<f64> {
        self.check_shape(outputs, labels)?;
        match self.kind {
            LossKind::TrueL => loss_true(&outputs.column(0).to_vec(), labels, self.epsilon),
            LossKind::CrossEntropy => Ok(self.cross_entropy_value_and_grad(outputs, labels, false)?.0),
            _ => Ok(self.value_and_grad(outputs, labels)?.0),
        }
    }

    /// Mean loss and its gradient with respect to `outputs`.
    pub fn value_and_grad(&self, outputs: ArrayView2<'_, f64>, labels: &[f64]) -> Result<(f64, Array2<f64>)> {
        self.check_shape(outputs, labels)?;
        if self.kind == LossKind::CrossEntropy {
            return self.cross_entropy_value_and_grad(outputs, labels, true);
        }
        let preds = outputs.column(0).to_vec();
        let (value, grad) = match self.kind {
            LossKind::TrueL => return Err(Error::NondifferentiableLoss("true")),
            LossKind::LEps => loss_eps_grad(&preds, labels, self.epsilon, self.c)?,
            LossKind::Mse => loss_mse_grad(&preds, labels)?,
            LossKind::Scaled => loss_scaled_grad(&preds, labels)?,
            LossKind::CrossEntropy => unreachable!(),
        };
        let grad = Array2::from_shape_vec((grad.len(), 1), grad).expect("column gradient");
        Ok((value, grad))
    }

    fn check_shape(&self, outputs: ArrayView2<'_, f64>, labels: &[f64]) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let expected = (labels.len(), self.output_dim());
        if outputs.dim() != expected {
            return Err(Error::shape(format!("{expected:?}"), format!("{:?}", outputs.dim())));
        }
        Ok(())
    }

    fn cross_entropy_value_and_grad(
        &self,
        logits: ArrayView2<'_, f64>,
        labels: &[f64],
        want_grad: bool,
    ) -> Result<(f64, Array2<f64>)> {
        let classes: Vec<usize> = labels.iter().map(|&y| self.class_of(y)).collect::<Result<_>>()?;
        let (value, grad) = cross_entropy(logits, &classes, want_grad);
        Ok((value, grad))
    }
}

fn argmax(row: impl Iterator<Item = f64>) -> usize {
    row.enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn class_index(label: f64, step: f64, classes: usize) -> Result<usize> {
    let q = label / step;
    let k = q.round();
    if !q.is_finite() || (q - k).abs() > 1e-6 || k < 0.0 || k as usize >= classes {
        return Err(Error::LabelOffGrid { label, step, classes });
    }
    Ok(k as usize)
}

/// Logistic function, evaluated without overflow for large |z|.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `l_ε` for a single error `x`.
pub fn l_eps_point(x: f64, eps: f64, c: f64) -> f64 {
    let r = 2.0 * x / eps;
    x * x * sigmoid(c * (r * r - 1.0))
}

/// d l_ε / dx.
pub fn l_eps_derivative(x: f64, eps: f64, c: f64) -> f64 {
    let r = 2.0 * x / eps;
    let s = sigmoid(c * (r * r - 1.0));
    2.0 * x * s + x * x * s * (1.0 - s) * c * 8.0 * x / (eps * eps)
}

fn check_pair(preds: &[f64], labels: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if preds.len() != labels.len() {
        return Err(Error::shape(preds.len(), labels.len()));
    }
    Ok(())
}

/// Fraction of samples with |pred − label| ≥ ε/2.
pub fn loss_true(preds: &[f64], labels: &[f64], eps: f64) -> Result<f64> {
    check_pair(preds, labels)?;
    let bad = preds
        .iter()
        .zip(labels)
        .filter(|(p, y)| (*p - *y).is_nan() || (*p - *y).abs() >= eps / 2.0)
        .count();
    Ok(bad as f64 / preds.len() as f64)
}

pub fn loss_eps(preds: &[f64], labels: &[f64], eps: f64, c: f64) -> Result<f64> {
    Ok(loss_eps_grad(preds, labels, eps, c)?.0)
}

pub fn loss_eps_grad(preds: &[f64], labels: &[f64], eps: f64, c: f64) -> Result<(f64, Vec<f64>)> {
    check_pair(preds, labels)?;
    let n = preds.len() as f64;
    let mut total = 0.0;
    let grad = preds
        .iter()
        .zip(labels)
        .map(|(p, y)| {
            let x = p - y;
            total += l_eps_point(x, eps, c);
            l_eps_derivative(x, eps, c) / n
        })
        .collect();
    Ok((total / n, grad))
}

pub fn loss_mse(preds: &[f64], labels: &[f64]) -> Result<f64> {
    Ok(loss_mse_grad(preds, labels)?.0)
}

pub fn loss_mse_grad(preds: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_pair(preds, labels)?;
    let n = preds.len() as f64;
    let mut total = 0.0;
    let grad = preds
        .iter()
        .zip(labels)
        .map(|(p, y)| {
            let x = p - y;
            total += x * x;
            2.0 * x / n
        })
        .collect();
    Ok((total / n, grad))
}

/// Mean of (1 − pred/label)². Labels must be nonzero.
pub fn loss_scaled(preds: &[f64], labels: &[f64]) -> Result<f64> {
    Ok(loss_scaled_grad(preds, labels)?.0)
}

pub fn loss_scaled_grad(preds: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_pair(preds, labels)?;
    if labels.contains(&0.0) {
        return Err(Error::ZeroLabel);
    }
    let n = preds.len() as f64;
    let mut total = 0.0;
    let grad = preds
        .iter()
        .zip(labels)
        .map(|(p, y)| {
            let r = 1.0 - p / y;
            total += r * r;
            -2.0 * r / (y * n)
        })
        .collect();
    Ok((total / n, grad))
}

/// Mean negative log-likelihood of `classes` under softmax(`logits`).
pub fn loss_cross_entropy(logits: ArrayView2<'_, f64>, labels: &[f64], eps: f64) -> Result<f64> {
    let config = LossConfig::cross_entropy(eps, logits.ncols());
    config.value(logits, labels)
}

/// Fraction of rows whose arg-max class is the label's class.
pub fn cross_entropy_accuracy(logits: ArrayView2<'_, f64>, labels: &[f64], eps: f64) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if logits.nrows() != labels.len() {
        return Err(Error::shape(labels.len(), logits.nrows()));
    }
    let mut correct = 0usize;
    for (row, &y) in logits.rows().into_iter().zip(labels) {
        let k = class_index(y, eps, logits.ncols())?;
        if argmax(row.iter().copied()) == k {
            correct += 1;
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}

fn cross_entropy(logits: ArrayView2<'_, f64>, classes: &[usize], want_grad: bool) -> (f64, Array2<f64>) {
    let n = classes.len() as f64;
    let mut grad = if want_grad {
        Array2::zeros(logits.dim())
    } else {
        Array2::zeros((0, 0))
    };
    let mut total = 0.0;
    for (i, (row, &k)) in logits.axis_iter(Axis(0)).zip(classes).enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        total += log_z - row[k];
        if want_grad {
            for (j, &v) in row.iter().enumerate() {
                let p = (v - log_z).exp();
                grad[[i, j]] = (p - if j == k { 1.0 } else { 0.0 }) / n;
            }
        }
    }
    (total / n, grad)
}
