use rand::Rng;
use rayon::prelude::*;

use super::{Dataset, DatasetMeta};
use crate::domains::{BlocksDomain, DomainKind, DomainSpec, PancakeDomain, SearchDomain, TspDomain, TspInstance};
use crate::error::{Error, Result};
use crate::oracles::{held_karp_units, ExactOracle, DEFAULT_HELD_KARP_CAP};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    /// Longest pancake random walk; `None` means 2n.
    pub max_walk: Option<usize>,
    pub held_karp_cap: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_walk: None,
            held_karp_cap: DEFAULT_HELD_KARP_CAP,
        }
    }
}

/// Generates `count` samples for any domain.
pub fn gen_dataset(spec: DomainSpec, count: usize, seed: u64, options: &GenOptions) -> Result<Dataset> {
    match spec.kind {
        DomainKind::Pancake => gen_pancake_dataset(spec.n, count, options.max_walk.unwrap_or(2 * spec.n), seed),
        DomainKind::Tsp => gen_tsp_dataset_capped(spec.n, count, seed, options.held_karp_cap),
        DomainKind::Blocks => gen_bw_dataset(spec.n, count, seed),
    }
}

fn assemble(spec: DomainSpec, seed: u64, rows: Vec<(Vec<f32>, f64)>) -> Result<Dataset> {
    let meta = DatasetMeta::new(spec, rows.len(), seed);
    let mut features = Vec::with_capacity(rows.len() * meta.dim);
    let mut labels = Vec::with_capacity(rows.len());
    for (f, y) in rows {
        features.extend(f);
        labels.push(y);
    }
    Dataset::new(meta, features, labels)
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    Ok(())
}

/// Random walks of uniform length in `0..=max_walk` from the sorted stack,
/// labelled by A* with the gap heuristic.
pub fn gen_pancake_dataset(n: usize, count: usize, max_walk: usize, seed: u64) -> Result<Dataset> {
    check_count(count)?;
    if max_walk == 0 {
        return Err(Error::InvalidArgument("max_walk must be >= 1".into()));
    }
    let domain = PancakeDomain::new(n)?;
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let steps = rng.random_range(0..=max_walk);
            let state = domain.random_walk(steps, &mut rng);
            let label = domain.hstar(&state)?;
            Ok((domain.encode(&state).0, label))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(domain.spec(), seed, rows)
}

/// Fresh random instances at their initial state, labelled by Held–Karp.
pub fn gen_tsp_dataset(n: usize, count: usize, seed: u64) -> Result<Dataset> {
    gen_tsp_dataset_capped(n, count, seed, DEFAULT_HELD_KARP_CAP)
}

fn gen_tsp_dataset_capped(n: usize, count: usize, seed: u64, cap: usize) -> Result<Dataset> {
    check_count(count)?;
    let spec = DomainSpec::new(DomainKind::Tsp, n)?;
    if n > cap {
        return Err(Error::SizeLimit { n, cap });
    }
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let instance = TspInstance::random(n, &mut rng)?;
            let units = held_karp_units(&instance, cap)?;
            let domain = TspDomain::new(instance);
            Ok((domain.encode(&domain.initial_state()).0, spec.to_real(units)))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(spec, seed, rows)
}

/// Uniform random start states, labelled by A* with the misplaced-blocks
/// heuristic against the ordered stack.
pub fn gen_bw_dataset(n: usize, count: usize, seed: u64) -> Result<Dataset> {
    check_count(count)?;
    let domain = BlocksDomain::new(n)?;
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let state = domain.random_state(&mut rng)?;
            let label = domain.hstar(&state)?;
            Ok((domain.encode(&state).0, label))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(domain.spec(), seed, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{BlocksState, PancakeState};
    use crate::oracles::reference::bfs_cost;

    #[test]
    fn pancake_labels_bounded_by_walk() {
        let ds = gen_pancake_dataset(6, 300, 4, 1).unwrap();
        assert_eq!(ds.len(), 300);
        assert!(ds.labels().iter().all(|&y| (0.0..=4.0).contains(&y)));
        assert!(ds.labels().contains(&0.0));
        assert!(ds.labels_on_grid());
    }

    #[test]
    fn pancake_labels_match_bfs() {
        let ds = gen_pancake_dataset(5, 100, 10, 2).unwrap();
        let d = PancakeDomain::new(5).unwrap();
        for s in ds.iter() {
            // decode the one-hot stack
            let stack: Vec<u8> = s
                .features
                .chunks(5)
                .map(|c| c.iter().position(|&v| v == 1.0).unwrap() as u8 + 1)
                .collect();
            let state = PancakeState::new(stack).unwrap();
            assert_eq!(bfs_cost(&d, state).unwrap() as f64, s.label);
        }
    }

    #[test]
    fn same_seed_same_data() {
        let a = gen_pancake_dataset(5, 50, 10, 9).unwrap();
        let b = gen_pancake_dataset(5, 50, 10, 9).unwrap();
        let c = gen_pancake_dataset(5, 50, 10, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(gen_bw_dataset(4, 30, 3).unwrap(), gen_bw_dataset(4, 30, 3).unwrap());
        assert_eq!(gen_tsp_dataset(4, 30, 3).unwrap(), gen_tsp_dataset(4, 30, 3).unwrap());
    }

    #[test]
    fn tsp_labels() {
        let ds = gen_tsp_dataset(2, 50, 4).unwrap();
        for s in ds.iter() {
            let expected = f64::from(s.features[1]) as f32 + s.features[2];
            assert!((s.label as f32 - expected).abs() < 1e-5);
        }
        let ds = gen_tsp_dataset(6, 50, 5).unwrap();
        assert!(ds.labels().iter().all(|&y| y >= 0.6));
        assert!(ds.labels_on_grid());
        for s in ds.iter() {
            for (i, &w) in s.features[..36].iter().enumerate() {
                if i / 6 != i % 6 {
                    let tenths = (w * 10.0).round();
                    assert!((1.0..=50.0).contains(&tenths));
                    assert!((w * 10.0 - tenths).abs() < 1e-4);
                }
            }
        }
        assert!(matches!(
            gen_dataset(DomainSpec::new(DomainKind::Tsp, 6).unwrap(), 1, 0, &GenOptions { max_walk: None, held_karp_cap: 5 }),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn bw_labels_match_bfs_and_goal_is_zero() {
        let ds = gen_bw_dataset(4, 200, 6).unwrap();
        let d = BlocksDomain::new(4).unwrap();
        let goal_code = d.encode(&d.goal()).0;
        for s in ds.iter() {
            let below: Vec<u8> = s
                .features
                .chunks(5)
                .map(|c| c.iter().position(|&v| v == 1.0).unwrap() as u8)
                .collect();
            let state = BlocksState::new(below).unwrap();
            assert_eq!(bfs_cost(&d, state).unwrap() as f64, s.label);
            if s.features == goal_code.as_slice() {
                assert_eq!(s.label, 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gen_pancake_dataset(1, 10, 2, 0).is_err());
        assert!(gen_pancake_dataset(4, 0, 2, 0).is_err());
        assert!(gen_pancake_dataset(4, 10, 0, 0).is_err());
        assert!(gen_bw_dataset(0, 10, 0).is_err());
    }
}
