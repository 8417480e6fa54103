//! Feedforward ReLU networks written from scratch: a fixed-depth network
//! (one hidden layer of variable width) and a fixed-width network (a stack
//! of width-(d+3) batch-normalized layers with residual blocks).
//!
//! Parameters live in a single flat `f64` vector described by a
//! [`Layout`], which keeps Adam, finite-difference checks and checkpoints
//! trivial.

pub mod adam;
pub mod arch;
pub mod checkpoint;
pub mod network;
pub mod train;

pub use adam::AdamState;
pub use arch::{ArchKind, Architecture, Layout, LinearSlot, Stage};
pub use network::{backward, forward, identity_parameters, ForwardPass, Mode, Parameters};
pub use train::{loss_and_gradient, train, TrainOptions, TrainReport};

use ndarray::{Array2, ArrayView2};

use crate::error::Result;
use crate::losses::LossConfig;
use crate::rng::rng_from_seed;

/// An architecture with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    arch: Architecture,
    layout: Layout,
    pub params: Parameters,
}

impl Model {
    /// Randomly initialized network; `seed` fully determines the weights.
    pub fn new(arch: Architecture, seed: u64) -> Self {
        let layout = arch.layout();
        let params = Parameters::init(&layout, &mut rng_from_seed(seed));
        Model { arch, layout, params }
    }

    pub fn from_parameters(arch: Architecture, params: Parameters) -> Result<Self> {
        let layout = arch.layout();
        params.check(&layout)?;
        Ok(Model { arch, layout, params })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.arch.param_count()
    }

    /// Raw outputs in EVAL mode.
    pub fn outputs(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(forward(&self.layout, &self.params, inputs, Mode::Eval)?.output)
    }

    /// Heuristic estimates in EVAL mode, interpreted through `loss`.
    pub fn predict(&self, inputs: ArrayView2<'_, f64>, loss: &LossConfig) -> Result<Vec<f64>> {
        Ok(loss.heuristic_values(self.outputs(inputs)?.view()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_inputs(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = rng_from_seed(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    /// A width-m network embedded into width m+1 with a dead extra unit.
    #[test]
    fn wider_fixed_depth_realizes_the_same_function() {
        for (d, m) in [(3, 1), (5, 4), (8, 8)] {
            let small = Model::new(Architecture::fixed_depth(d, m, 1).unwrap(), 17);
            let big_arch = Architecture::fixed_depth(d, m + 1, 1).unwrap();
            let big_layout = big_arch.layout();
            let mut big = Parameters::zeros(&big_layout);
            let (sh, so) = (&small.layout.hidden[0], &small.layout.output);
            let (bh, bo) = (&big_layout.hidden[0], &big_layout.output);
            big.weight_mut(bh)
                .slice_mut(ndarray::s![..m, ..])
                .assign(&small.params.weight(sh));
            big.bias_mut(bh).slice_mut(ndarray::s![..m]).assign(&small.params.bias(sh));
            big.weight_mut(bo)
                .slice_mut(ndarray::s![.., ..m])
                .assign(&small.params.weight(so));
            big.bias_mut(bo).assign(&small.params.bias(so));
            let big = Model::from_parameters(big_arch, big).unwrap();
            let x = random_inputs(20, d, 5);
            assert_eq!(small.outputs(x.view()).unwrap(), big.outputs(x.view()).unwrap());
        }
    }

    /// Copies every layer of `small` into the matching slot of `big`.
    fn copy_layer(small: &Model, si: usize, big_layout: &Layout, big: &mut Parameters, bi: usize) {
        let (s, b) = (&small.layout.hidden[si], &big_layout.hidden[bi]);
        big.weight_mut(b).assign(&small.params.weight(s));
        big.bias_mut(b).assign(&small.params.bias(s));
        let (sn, bn) = (s.norm.unwrap(), b.norm.unwrap());
        let w = s.out_dim;
        big.values[bn.gamma..bn.gamma + w].copy_from_slice(&small.params.values[sn.gamma..sn.gamma + w]);
        big.values[bn.beta..bn.beta + w].copy_from_slice(&small.params.values[sn.beta..sn.beta + w]);
        big.running_mean[bn.stats..bn.stats + w].copy_from_slice(&small.params.running_mean[sn.stats..sn.stats + w]);
        big.running_var[bn.stats..bn.stats + w].copy_from_slice(&small.params.running_var[sn.stats..sn.stats + w]);
    }

    fn copy_output(small: &Model, big_layout: &Layout, big: &mut Parameters) {
        big.weight_mut(&big_layout.output).assign(&small.params.weight(&small.layout.output));
        big.bias_mut(&big_layout.output).assign(&small.params.bias(&small.layout.output));
    }

    fn scrambled_stats(model: &mut Model, seed: u64) {
        let mut rng = rng_from_seed(seed);
        for v in &mut model.params.running_mean {
            *v = rng.random_range(-0.5..0.5);
        }
        for v in &mut model.params.running_var {
            *v = rng.random_range(0.5..2.0);
        }
    }

    /// Appending a residual block with a zeroed branch leaves the EVAL
    /// function unchanged (h -> h + 2).
    #[test]
    fn deeper_fixed_width_with_zero_residual_branch() {
        for h in 1..=5 {
            let d = 4;
            let mut small = Model::new(Architecture::fixed_width(d, h, 1).unwrap(), 23 + h as u64);
            scrambled_stats(&mut small, h as u64);
            let big_arch = Architecture::fixed_width(d, h + 2, 1).unwrap();
            let big_layout = big_arch.layout();
            let mut big = Parameters::zeros(&big_layout);
            for i in 0..h {
                copy_layer(&small, i, &big_layout, &mut big, i);
            }
            copy_output(&small, &big_layout, &mut big);
            let big = Model::from_parameters(big_arch, big).unwrap();
            let x = random_inputs(16, d, 8);
            let (a, b) = (small.outputs(x.view()).unwrap(), big.outputs(x.view()).unwrap());
            for (u, v) in a.iter().zip(b.iter()) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "h={h}: {u} vs {v}");
            }
        }
    }

    /// Odd h -> h + 1 inserts an identity plain layer after the first one,
    /// with batch-norm configured to pass through.
    #[test]
    fn deeper_fixed_width_with_identity_layer() {
        for h in [1, 3, 5] {
            let d = 3;
            let mut small = Model::new(Architecture::fixed_width(d, h, 1).unwrap(), 40 + h as u64);
            scrambled_stats(&mut small, 90 + h as u64);
            let big_arch = Architecture::fixed_width(d, h + 1, 1).unwrap();
            let big_layout = big_arch.layout();
            let mut big = Parameters::zeros(&big_layout);
            copy_layer(&small, 0, &big_layout, &mut big, 0);
            let inserted = big_layout.hidden[1];
            {
                let mut w = big.weight_mut(&inserted);
                for k in 0..inserted.out_dim {
                    w[[k, k]] = 1.0;
                }
            }
            // pass-through: gamma * (z - 0) / sqrt(var + eps) == z
            let norm = inserted.norm.unwrap();
            let var = 1.0 - network::BATCH_NORM_EPS;
            for k in 0..inserted.out_dim {
                big.running_var[norm.stats + k] = var;
                big.values[norm.gamma + k] = (var + network::BATCH_NORM_EPS).sqrt();
            }
            for i in 1..h {
                copy_layer(&small, i, &big_layout, &mut big, i + 1);
            }
            copy_output(&small, &big_layout, &mut big);
            let big = Model::from_parameters(big_arch, big).unwrap();
            let x = random_inputs(16, d, 9);
            let (a, b) = (small.outputs(x.view()).unwrap(), big.outputs(x.view()).unwrap());
            for (u, v) in a.iter().zip(b.iter()) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "h={h}: {u} vs {v}");
            }
        }
    }
}
