//! Exact labelling: A*, admissible heuristics, Held–Karp, reference solvers
//! and the heuristic-based decision procedure.

pub mod astar;
pub mod decision;
pub mod held_karp;
pub mod heuristics;
pub mod reference;

pub use astar::{astar, AStar, SearchResult, TieBreak, DEFAULT_EXPANSION_CAP};
pub use decision::{decide_via_heuristic, decide_with};
pub use held_karp::{held_karp, held_karp_units, CompletionTable, DEFAULT_HELD_KARP_CAP};
pub use heuristics::{gap_heuristic, misplaced_blocks_heuristic, GapHeuristic, Heuristic, MisplacedBlocks};

use crate::domains::{BlocksDomain, Cost, PancakeDomain, SearchDomain, TspDomain};
use crate::error::Result;

/// Domains that can compute the optimal cost-to-goal of any state.
pub trait ExactOracle: SearchDomain {
    /// `h*(state)` in cost units.
    fn hstar_units(&self, state: &Self::State) -> Result<Cost>;

    /// `h*(state)` in real cost.
    fn hstar(&self, state: &Self::State) -> Result<f64> {
        Ok(self.spec().to_real(self.hstar_units(state)?))
    }
}

impl ExactOracle for PancakeDomain {
    fn hstar_units(&self, state: &Self::State) -> Result<Cost> {
        Ok(astar(self, state.clone(), &GapHeuristic, TieBreak::HighG)?.optimal_cost)
    }
}

impl ExactOracle for BlocksDomain {
    fn hstar_units(&self, state: &Self::State) -> Result<Cost> {
        Ok(astar(self, state.clone(), &MisplacedBlocks, TieBreak::HighG)?.optimal_cost)
    }
}

impl ExactOracle for TspDomain {
    fn hstar_units(&self, state: &Self::State) -> Result<Cost> {
        held_karp::held_karp_from_state(self.instance(), state, DEFAULT_HELD_KARP_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{BlocksState, PancakeState, TspInstance};
    use crate::rng::rng_from_seed;

    #[test]
    fn hstar_dispatch() {
        let p = PancakeDomain::new(4).unwrap();
        assert_eq!(p.hstar(&p.goal()).unwrap(), 0.0);
        let s = PancakeState::new(vec![2, 1, 3, 4]).unwrap();
        assert_eq!(p.hstar(&s).unwrap(), 1.0);

        let b = BlocksDomain::new(3).unwrap();
        assert_eq!(b.hstar(&BlocksState::all_on_table(3)).unwrap(), 2.0);

        let t = TspDomain::new(TspInstance::from_weights(2, &[0.0, 0.3, 0.4, 0.0], 1).unwrap());
        assert_eq!(t.hstar(&t.initial_state()).unwrap(), 0.7);
    }

    #[test]
    fn pancake_hstar_is_at_least_gap_count() {
        let p = PancakeDomain::new(7).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let s = p.random_walk(14, &mut rng);
            assert!(p.hstar_units(&s).unwrap() as f64 >= gap_heuristic(&s));
        }
    }
}
