//! Independent oracles and helpers shared by the integration tests and the
//! acceptance suite. Nothing here calls the library's own reference
//! solvers.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use hstar_core::domains::TspInstance;
use hstar_core::neuralnet::{forward, Mode};
use hstar_core::{ArchKind, Architecture, LossConfig, LossKind, Model, SearchDomain};
use ndarray::Array2;
use rand::Rng;

/// Distances from `root` over successor edges, assuming unit costs and
/// reversible moves.
pub fn bfs_all<D: SearchDomain>(domain: &D, root: D::State) -> HashMap<D::State, u64>
where
    D::State: Hash + Eq + Clone,
{
    let mut dist = HashMap::from([(root.clone(), 0u64)]);
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for (t, c) in domain.successors(&s) {
            assert_eq!(c, 1, "unit-cost domain");
            dist.entry(t.clone()).or_insert_with(|| {
                queue.push_back(t);
                d + 1
            });
        }
    }
    dist
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Cheapest completion (in tenths) from `current` through every city in
/// `remaining` and back to the start, by trying every order.
pub fn tsp_completion_brute(inst: &TspInstance, current: usize, remaining: &[usize]) -> u64 {
    let start = inst.start();
    let mut order = remaining.to_vec();
    order.sort_unstable();
    let mut best = u64::MAX;
    loop {
        let mut cost = 0u64;
        let mut prev = current;
        for &c in &order {
            cost += u64::from(inst.tenths(prev, c));
            prev = c;
        }
        cost += u64::from(inst.tenths(prev, start));
        best = best.min(cost);
        if !next_permutation(&mut order) {
            return best;
        }
    }
}

pub fn tsp_tour_brute(inst: &TspInstance) -> u64 {
    let rest: Vec<usize> = (0..inst.n()).filter(|&c| c != inst.start()).collect();
    tsp_completion_brute(inst, inst.start(), &rest)
}

/// Loss of the model on a batch, recomputed from scratch.
pub fn batch_loss(model: &Model, x: &Array2<f64>, y: &[f64], loss: &LossConfig, mode: Mode) -> f64 {
    let pass = forward(model.layout(), &model.params, x.view(), mode).unwrap();
    loss.value(pass.output.view(), y).unwrap()
}

/// Norm-wise relative error between the analytic gradient and central
/// finite differences.
pub fn gradient_error(model: &Model, x: &Array2<f64>, y: &[f64], loss: &LossConfig, mode: Mode) -> f64 {
    let (_, analytic) = hstar_core::neuralnet::loss_and_gradient(model, x.view(), y, loss, mode).unwrap();
    let h = 1e-6;
    let mut probe = model.clone();
    let mut diff = 0.0;
    let mut norm_a = 0.0;
    let mut norm_n = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let orig = probe.params.values[i];
        probe.params.values[i] = orig + h;
        let up = batch_loss(&probe, x, y, loss, mode);
        probe.params.values[i] = orig - h;
        let down = batch_loss(&probe, x, y, loss, mode);
        probe.params.values[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        diff += (a - numeric).powi(2);
        norm_a += a * a;
        norm_n += numeric.powi(2);
    }
    let denom = norm_a.sqrt() + norm_n.sqrt();
    if denom == 0.0 {
        0.0
    } else {
        diff.sqrt() / denom
    }
}

#[derive(Debug, Clone)]
pub struct GradCase {
    pub arch: ArchKind,
    pub d: usize,
    pub units: usize,
    pub batch: usize,
    pub loss: LossConfig,
    pub seed: u64,
}

/// The loss variants covered by the gradient suite.
pub fn gradient_losses(eps: f64, classes: usize) -> Vec<LossConfig> {
    vec![
        LossConfig::l_eps(eps, 0.0),
        LossConfig::l_eps(eps, 1.0),
        LossConfig::l_eps(eps, 10.0),
        LossConfig::mse(eps),
        LossConfig::cross_entropy(eps, classes),
        LossConfig::scaled(eps),
    ]
}

/// Runs one configuration and returns its relative gradient error.
/// Labels are nonzero multiples of ε so every loss is defined.
pub fn run_grad_case(case: &GradCase) -> f64 {
    let mut rng = hstar_core::rng::rng_from_seed(case.seed);
    let eps = case.loss.epsilon;
    let x = Array2::from_shape_fn((case.batch, case.d), |_| rng.random_range(-1.0..1.0));
    let y: Vec<f64> = (0..case.batch)
        .map(|_| {
            let k = if case.loss.kind == LossKind::CrossEntropy {
                rng.random_range(1..case.loss.classes)
            } else {
                rng.random_range(1..6)
            };
            k as f64 * eps
        })
        .collect();
    let arch = Architecture::new(case.arch, case.d, case.units, case.loss.output_dim()).unwrap();
    let mut model = Model::new(arch, case.seed ^ 0x9e37);
    // Move batch-norm parameters off their defaults so their gradients
    // are exercised too.
    for v in model.params.values.iter_mut() {
        *v += rng.random_range(-0.1..0.1);
    }
    let mode = if case.arch == ArchKind::FixedWidth { Mode::Train } else { Mode::Eval };
    gradient_error(&model, &x, &y, &case.loss, mode)
}

/// `count` random configurations cycling through every loss on both
/// architectures with input dimension at most 8.
pub fn grad_cases(count: usize, seed: u64) -> Vec<GradCase> {
    let mut rng = hstar_core::rng::rng_from_seed(seed);
    (0..count)
        .map(|i| {
            let classes = rng.random_range(2..6);
            let eps = if rng.random_bool(0.5) { 1.0 } else { 0.1 };
            let losses = gradient_losses(eps, classes);
            let arch = if (i / losses.len()).is_multiple_of(2) { ArchKind::FixedDepth } else { ArchKind::FixedWidth };
            GradCase {
                arch,
                d: rng.random_range(1..=8),
                units: match arch {
                    ArchKind::FixedDepth => rng.random_range(1..=8),
                    ArchKind::FixedWidth => rng.random_range(1..=5),
                },
                batch: rng.random_range(3..=8),
                loss: losses[i % losses.len()],
                seed: rng.random(),
            }
        })
        .collect()
}
