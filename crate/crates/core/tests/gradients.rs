mod common;

use common::*;
use hstar_core::neuralnet::Mode;
use hstar_core::{ArchKind, LossConfig};

#[test]
fn every_loss_on_both_architectures() {
    for (i, case) in grad_cases(48, 11).iter().enumerate() {
        let err = run_grad_case(case);
        assert!(err < 1e-4, "case {i} {case:?}: relative error {err}");
    }
}

#[test]
fn fixed_width_eval_mode() {
    for seed in 0..6 {
        let case = GradCase {
            arch: ArchKind::FixedWidth,
            d: 5,
            units: 3 + seed as usize % 3,
            batch: 6,
            loss: LossConfig::l_eps(1.0, 10.0),
            seed,
        };
        // run_grad_case uses TRAIN statistics for fixed width; check EVAL too.
        let mut rng = hstar_core::rng::rng_from_seed(seed);
        let x = ndarray::Array2::from_shape_fn((case.batch, case.d), |_| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let y = vec![1.0, 2.0, 3.0, 1.0, 4.0, 2.0];
        let arch = hstar_core::Architecture::fixed_width(case.d, case.units, 1).unwrap();
        let model = hstar_core::Model::new(arch, seed);
        let err = gradient_error(&model, &x, &y, &case.loss, Mode::Eval);
        assert!(err < 1e-4, "seed {seed}: {err}");
        assert!(run_grad_case(&case) < 1e-4);
    }
}

#[test]
fn single_sample_fixed_depth() {
    let case = GradCase {
        arch: ArchKind::FixedDepth,
        d: 8,
        units: 8,
        batch: 1,
        loss: LossConfig::scaled(0.1),
        seed: 5,
    };
    assert!(run_grad_case(&case) < 1e-4);
}
