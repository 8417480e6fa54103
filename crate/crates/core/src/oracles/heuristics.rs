use crate::domains::{BlocksState, PancakeState};

/// A cost-to-goal estimate, in the domain's cost units.
pub trait Heuristic<S> {
    fn estimate(&self, state: &S) -> f64;

    /// Whether the estimate is known never to exceed `h*`.
    fn is_admissible(&self) -> bool {
        false
    }
}

impl<S, F: Fn(&S) -> f64> Heuristic<S> for F {
    fn estimate(&self, state: &S) -> f64 {
        self(state)
    }
}

/// Number of adjacent stack positions holding non-consecutive pancakes,
/// with the plate as pancake n+1 below the stack.
pub fn gap_heuristic(state: &PancakeState) -> f64 {
    let stack = state.stack();
    let plate = stack.len() as i16 + 1;
    let gaps = stack
        .iter()
        .map(|&p| i16::from(p))
        .chain(std::iter::once(plate))
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| (w[0] - w[1]).abs() > 1)
        .count();
    gaps as f64
}

/// Blocks whose support differs from the ordered-stack goal.
pub fn misplaced_blocks_heuristic(state: &BlocksState) -> f64 {
    state
        .supports()
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s as usize != i)
        .count() as f64
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GapHeuristic;

impl Heuristic<PancakeState> for GapHeuristic {
    fn estimate(&self, state: &PancakeState) -> f64 {
        gap_heuristic(state)
    }

    fn is_admissible(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MisplacedBlocks;

impl Heuristic<BlocksState> for MisplacedBlocks {
    fn estimate(&self, state: &BlocksState) -> f64 {
        misplaced_blocks_heuristic(state)
    }

    fn is_admissible(&self) -> bool {
        true
    }
}
