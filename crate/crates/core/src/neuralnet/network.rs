//! Forward and reverse-mode passes over a flat parameter vector.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::arch::{Architecture, Layout, LinearSlot, NormSlot, Stage};
use crate::error::{Error, Result};

pub const BATCH_NORM_EPS: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch-norm uses the batch's statistics.
    Train,
    /// Batch-norm uses running statistics; a pure function of the input.
    Eval,
}

/// Trainable values (linear weights and biases, batch-norm scale and shift)
/// in one flat vector, plus batch-norm running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub values: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl Parameters {
    /// All weights and biases zero; batch-norm in pass-through configuration.
    pub fn zeros(layout: &Layout) -> Self {
        let mut params = Parameters {
            values: vec![0.0; layout.trainable],
            running_mean: vec![0.0; layout.stats],
            running_var: vec![1.0; layout.stats],
        };
        for slot in &layout.hidden {
            if let Some(norm) = slot.norm {
                params.values[norm.gamma..norm.gamma + slot.out_dim].fill(1.0);
            }
        }
        params
    }

    /// He-scaled normal weights, zero biases.
    pub fn init<R: Rng + ?Sized>(layout: &Layout, rng: &mut R) -> Self {
        let mut params = Self::zeros(layout);
        for slot in layout.hidden.iter().chain(std::iter::once(&layout.output)) {
            let std = (2.0 / slot.in_dim as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            for w in &mut params.values[slot.weight..slot.bias] {
                *w = normal.sample(rng);
            }
        }
        params
    }

    pub fn check(&self, layout: &Layout) -> Result<()> {
        if self.values.len() != layout.trainable {
            return Err(Error::shape(layout.trainable, self.values.len()));
        }
        if self.running_mean.len() != layout.stats || self.running_var.len() != layout.stats {
            return Err(Error::shape(layout.stats, self.running_mean.len()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn weight(&self, slot: &LinearSlot) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((slot.out_dim, slot.in_dim), &self.values[slot.weight..slot.bias]).expect("slot shape")
    }

    pub fn weight_mut(&mut self, slot: &LinearSlot) -> ArrayViewMut2<'_, f64> {
        ArrayViewMut2::from_shape((slot.out_dim, slot.in_dim), &mut self.values[slot.weight..slot.bias])
            .expect("slot shape")
    }

    pub fn bias(&self, slot: &LinearSlot) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[slot.bias..slot.bias + slot.out_dim])
    }

    pub fn bias_mut(&mut self, slot: &LinearSlot) -> ArrayViewMut1<'_, f64> {
        ArrayViewMut1::from(&mut self.values[slot.bias..slot.bias + slot.out_dim])
    }

    /// Folds batch statistics from a training pass into the running averages.
    pub fn update_running_stats(&mut self, pass: &ForwardPass, momentum: f64) {
        for stats in &pass.batch_stats {
            let range = stats.offset..stats.offset + stats.mean.len();
            for ((rm, rv), (m, v)) in self.running_mean[range.clone()]
                .iter_mut()
                .zip(&mut self.running_var[range])
                .zip(stats.mean.iter().zip(&stats.var))
            {
                *rm = momentum * *rm + (1.0 - momentum) * m;
                *rv = momentum * *rv + (1.0 - momentum) * v;
            }
        }
    }
}

struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

struct LayerCache {
    input: Array2<f64>,
    norm: Option<NormCache>,
    /// Input to the ReLU that follows this layer (for the second layer of a
    /// residual block, after the skip connection is added).
    pre_activation: Array2<f64>,
}

/// Batch mean and (biased) variance of one batch-norm layer.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub offset: usize,
    pub mean: Array1<f64>,
    pub var: Array1<f64>,
}

/// Activations retained for the backward pass.
pub struct ForwardPass {
    pub output: Array2<f64>,
    pub batch_stats: Vec<BatchStats>,
    mode: Mode,
    hidden: Vec<Option<LayerCache>>,
    last_hidden: Array2<f64>,
}

fn affine(params: &Parameters, slot: &LinearSlot, input: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut z = input.dot(&params.weight(slot).t());
    z += &params.bias(slot);
    z
}

fn normalize(
    params: &Parameters,
    slot: &LinearSlot,
    norm: &NormSlot,
    z: Array2<f64>,
    mode: Mode,
) -> (Array2<f64>, NormCache, Option<BatchStats>) {
    let (mean, var, stats) = match mode {
        Mode::Train => {
            let mean = z.mean_axis(Axis(0)).expect("nonempty batch");
            let var = z.var_axis(Axis(0), 0.0);
            let stats = BatchStats {
                offset: norm.stats,
                mean: mean.clone(),
                var: var.clone(),
            };
            (mean, var, Some(stats))
        }
        Mode::Eval => {
            let r = norm.stats..norm.stats + slot.out_dim;
            (
                Array1::from(params.running_mean[r.clone()].to_vec()),
                Array1::from(params.running_var[r].to_vec()),
                None,
            )
        }
    };
    let inv_std = var.mapv(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt());
    let xhat = (z - &mean) * &inv_std;
    let gamma = ArrayView1::from(&params.values[norm.gamma..norm.gamma + slot.out_dim]);
    let beta = ArrayView1::from(&params.values[norm.beta..norm.beta + slot.out_dim]);
    let y = &xhat * &gamma + beta;
    (y, NormCache { xhat, inv_std }, stats)
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { v } else { 0.0 })
}

/// ReLU derivative, taking 0 at 0.
fn relu_backward(grad: &mut Array2<f64>, pre: &Array2<f64>) {
    grad.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0
        }
    });
}

/// Runs `inputs` (batch × d) through the network.
pub fn forward(layout: &Layout, params: &Parameters, inputs: ArrayView2<'_, f64>, mode: Mode) -> Result<ForwardPass> {
    if inputs.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if inputs.ncols() != layout.input_dim() {
        return Err(Error::shape(
            format!("batch x {}", layout.input_dim()),
            format!("{} x {}", inputs.nrows(), inputs.ncols()),
        ));
    }
    params.check(layout)?;

    let mut hidden: Vec<Option<LayerCache>> = (0..layout.hidden.len()).map(|_| None).collect();
    let mut batch_stats = Vec::new();
    let mut layer = |idx: usize, input: Array2<f64>| -> Array2<f64> {
        let slot = &layout.hidden[idx];
        let z = affine(params, slot, input.view());
        let (y, norm) = match &slot.norm {
            Some(norm) => {
                let (y, cache, stats) = normalize(params, slot, norm, z, mode);
                batch_stats.extend(stats);
                (y, Some(cache))
            }
            None => (z, None),
        };
        hidden[idx] = Some(LayerCache {
            input,
            norm,
            pre_activation: Array2::zeros((0, 0)),
        });
        y
    };

    let mut act = inputs.to_owned();
    let mut pre_acts: Vec<(usize, Array2<f64>)> = Vec::new();
    for stage in &layout.stages {
        match *stage {
            Stage::Plain(i) => {
                let y = layer(i, act);
                act = relu(&y);
                pre_acts.push((i, y));
            }
            Stage::Residual(i, j) => {
                let skip = act.clone();
                let y1 = layer(i, act);
                let r1 = relu(&y1);
                let y2 = layer(j, r1);
                let s = y2 + &skip;
                act = relu(&s);
                pre_acts.push((i, y1));
                pre_acts.push((j, s));
            }
        }
    }
    for (i, pre) in pre_acts {
        hidden[i].as_mut().expect("layer evaluated").pre_activation = pre;
    }

    let output = affine(params, &layout.output, act.view());
    Ok(ForwardPass {
        output,
        batch_stats,
        mode,
        hidden,
        last_hidden: act,
    })
}

fn accumulate_affine(
    grad: &mut [f64],
    params: &Parameters,
    slot: &LinearSlot,
    input: ArrayView2<'_, f64>,
    dz: &Array2<f64>,
) -> Array2<f64> {
    let dw = dz.t().dot(&input);
    for (g, d) in grad[slot.weight..slot.bias].iter_mut().zip(dw.iter()) {
        *g += d;
    }
    let db = dz.sum_axis(Axis(0));
    for (g, d) in grad[slot.bias..slot.bias + slot.out_dim].iter_mut().zip(db.iter()) {
        *g += d;
    }
    dz.dot(&params.weight(slot))
}

fn layer_backward(
    grad: &mut [f64],
    params: &Parameters,
    slot: &LinearSlot,
    cache: &LayerCache,
    dy: Array2<f64>,
    mode: Mode,
) -> Array2<f64> {
    let dz = match (&slot.norm, &cache.norm) {
        (Some(norm), Some(nc)) => {
            let gamma = ArrayView1::from(&params.values[norm.gamma..norm.gamma + slot.out_dim]);
            let dgamma = (&dy * &nc.xhat).sum_axis(Axis(0));
            let dbeta = dy.sum_axis(Axis(0));
            for (g, d) in grad[norm.gamma..norm.gamma + slot.out_dim].iter_mut().zip(dgamma.iter()) {
                *g += d;
            }
            for (g, d) in grad[norm.beta..norm.beta + slot.out_dim].iter_mut().zip(dbeta.iter()) {
                *g += d;
            }
            let dxhat = dy * gamma;
            match mode {
                Mode::Eval => dxhat * &nc.inv_std,
                Mode::Train => {
                    let b = dxhat.nrows() as f64;
                    let sum = dxhat.sum_axis(Axis(0));
                    let sum_x = (&dxhat * &nc.xhat).sum_axis(Axis(0));
                    let centered = dxhat * b - &sum - &nc.xhat * &sum_x;
                    centered * &(&nc.inv_std / b)
                }
            }
        }
        _ => dy,
    };
    accumulate_affine(grad, params, slot, cache.input.view(), &dz)
}

/// Gradient of a scalar loss with respect to every trainable parameter,
/// given the loss gradient `d_output` with respect to the network output.
pub fn backward(layout: &Layout, params: &Parameters, pass: &ForwardPass, d_output: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if d_output.dim() != pass.output.dim() {
        return Err(Error::shape(format!("{:?}", pass.output.dim()), format!("{:?}", d_output.dim())));
    }
    let mut grad = vec![0.0; layout.trainable];
    let d_out = d_output.to_owned();
    let mut d_act = accumulate_affine(&mut grad, params, &layout.output, pass.last_hidden.view(), &d_out);

    let cache = |i: usize| pass.hidden[i].as_ref().expect("forward pass populated every layer");
    for stage in layout.stages.iter().rev() {
        match *stage {
            Stage::Plain(i) => {
                let c = cache(i);
                relu_backward(&mut d_act, &c.pre_activation);
                d_act = layer_backward(&mut grad, params, &layout.hidden[i], c, d_act, pass.mode);
            }
            Stage::Residual(i, j) => {
                let (ci, cj) = (cache(i), cache(j));
                relu_backward(&mut d_act, &cj.pre_activation);
                let d_skip = d_act.clone();
                let mut d_r1 = layer_backward(&mut grad, params, &layout.hidden[j], cj, d_act, pass.mode);
                relu_backward(&mut d_r1, &ci.pre_activation);
                let d_in = layer_backward(&mut grad, params, &layout.hidden[i], ci, d_r1, pass.mode);
                d_act = d_in + d_skip;
            }
        }
    }
    Ok(grad)
}

/// Builds a network whose EVAL forward is the identity on non-negative
/// inputs of width `arch.hidden_width()`: identity weights in plain layers,
/// zeroed residual branches, pass-through batch-norm.
pub fn identity_parameters(arch: &Architecture) -> Parameters {
    let layout = arch.layout();
    let mut params = Parameters::zeros(&layout);
    // residual branches stay zero, so each block reduces to ReLU(u) = u
    for stage in &layout.stages {
        if let Stage::Plain(i) = *stage {
            let slot = layout.hidden[i];
            let mut w = params.weight_mut(&slot);
            for k in 0..slot.out_dim.min(slot.in_dim) {
                w[[k, k]] = 1.0;
            }
        }
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use ndarray::array;

    #[test]
    fn zero_network_outputs_zero() {
        let arch = Architecture::fixed_depth(3, 5, 1).unwrap();
        let layout = arch.layout();
        let params = Parameters::zeros(&layout);
        let x = Array2::zeros((4, 3));
        let out = forward(&layout, &params, x.view(), Mode::Eval).unwrap().output;
        assert!(out.iter().all(|&v| v == 0.0));
        assert_eq!(out.dim(), (4, 1));
    }

    #[test]
    fn shape_mismatch() {
        let arch = Architecture::fixed_depth(3, 5, 1).unwrap();
        let layout = arch.layout();
        let params = Parameters::zeros(&layout);
        let x = Array2::zeros((4, 2));
        assert!(matches!(
            forward(&layout, &params, x.view(), Mode::Eval),
            Err(Error::ShapeMismatch { .. })
        ));
        let empty = Array2::zeros((0, 3));
        assert!(matches!(forward(&layout, &params, empty.view(), Mode::Eval), Err(Error::EmptyInput)));
    }

    #[test]
    fn hand_computed_fixed_depth() {
        let arch = Architecture::fixed_depth(2, 2, 1).unwrap();
        let layout = arch.layout();
        let mut p = Parameters::zeros(&layout);
        // hidden W = [[1, -1], [2, 0]], b = [0, -1]; out w = [1, 3], b = 0.5
        p.values[..layout.output.bias + 1].copy_from_slice(&[1.0, -1.0, 2.0, 0.0, 0.0, -1.0, 1.0, 3.0, 0.5]);
        let x = array![[1.0, 2.0], [3.0, 1.0]];
        let out = forward(&layout, &p, x.view(), Mode::Eval).unwrap().output;
        // row 0: h = relu([-1, 1]) = [0, 1] -> 3.5; row 1: relu([2, 5]) -> 2 + 15 + 0.5
        assert_eq!(out, array![[3.5], [17.5]]);
    }

    #[test]
    fn identity_block_passes_input_through() {
        let arch = Architecture::fixed_width(4, 3, 1).unwrap();
        let layout = arch.layout();
        let params = identity_parameters(&arch);
        let mut rng = rng_from_seed(3);
        let x = Array2::from_shape_fn((5, 4), |_| rng.random_range(0.0..2.0));
        let pass = forward(&layout, &params, x.view(), Mode::Eval).unwrap();
        let scale = 1.0 / (1.0 + BATCH_NORM_EPS).sqrt();
        for r in 0..5 {
            for c in 0..4 {
                let expected = x[[r, c]] * scale;
                assert!((pass.last_hidden[[r, c]] - expected).abs() < 1e-12);
            }
            for c in 4..7 {
                assert_eq!(pass.last_hidden[[r, c]], 0.0);
            }
        }
    }

    #[test]
    fn eval_is_deterministic() {
        let arch = Architecture::fixed_width(3, 4, 1).unwrap();
        let layout = arch.layout();
        let params = Parameters::init(&layout, &mut rng_from_seed(1));
        let x = array![[0.1, 0.5, 1.0]];
        let a = forward(&layout, &params, x.view(), Mode::Eval).unwrap().output;
        let b = forward(&layout, &params, x.view(), Mode::Eval).unwrap().output;
        assert_eq!(a, b);
        assert_eq!(a.dim(), (1, 1));
    }

    #[test]
    fn running_stats_move_toward_batch() {
        let arch = Architecture::fixed_width(2, 1, 1).unwrap();
        let layout = arch.layout();
        let mut params = Parameters::init(&layout, &mut rng_from_seed(2));
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]];
        let pass = forward(&layout, &params, x.view(), Mode::Train).unwrap();
        let stats = pass.batch_stats[0].clone();
        params.update_running_stats(&pass, 0.9);
        for k in 0..5 {
            assert!((params.running_mean[k] - 0.1 * stats.mean[k]).abs() < 1e-15);
            assert!((params.running_var[k] - (0.9 + 0.1 * stats.var[k])).abs() < 1e-15);
        }
    }
}
