use rand::Rng;

use super::{Cost, DomainKind, DomainSpec, FeatureVector, SearchDomain};
use crate::error::{Error, Result};

/// A pancake stack, top first. Pancake ids run from 1 to n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PancakeState {
    stack: Vec<u8>,
}

impl PancakeState {
    pub fn new(stack: Vec<u8>) -> Result<Self> {
        let n = stack.len();
        if n < 2 {
            return Err(Error::InvalidState(format!("pancake stack needs n >= 2, got {n}")));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidState(format!("pancake stack too large: {n}")));
        }
        let mut seen = vec![false; n + 1];
        for &p in &stack {
            let p = p as usize;
            if p == 0 || p > n || seen[p] {
                return Err(Error::InvalidState(format!("{stack:?} is not a permutation of 1..={n}")));
            }
            seen[p] = true;
        }
        Ok(PancakeState { stack })
    }

    pub fn sorted(n: usize) -> Self {
        PancakeState {
            stack: (1..=n as u8).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.stack.len()
    }

    pub fn stack(&self) -> &[u8] {
        &self.stack
    }

    /// Reverses the top `len` pancakes.
    pub fn flip(&self, len: usize) -> Self {
        let mut stack = self.stack.clone();
        stack[..len].reverse();
        PancakeState { stack }
    }

    pub fn is_sorted(&self) -> bool {
        self.stack.iter().enumerate().all(|(i, &p)| p as usize == i + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PancakeDomain {
    n: usize,
}

impl PancakeDomain {
    pub fn new(n: usize) -> Result<Self> {
        DomainSpec::new(DomainKind::Pancake, n)?;
        if n > u8::MAX as usize {
            return Err(Error::InvalidArgument(format!("pancake n={n} too large")));
        }
        Ok(PancakeDomain { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn goal(&self) -> PancakeState {
        PancakeState::sorted(self.n)
    }

    /// Applies `steps` uniformly random non-trivial flips starting at the goal.
    pub fn random_walk<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> PancakeState {
        let mut state = self.goal();
        for _ in 0..steps {
            let len = rng.random_range(2..=self.n);
            state.stack[..len].reverse();
        }
        state
    }

    /// All n! stacks, in lexicographic order. Only sensible for small n.
    pub fn all_states(&self) -> Vec<PancakeState> {
        let mut out = Vec::new();
        let mut perm: Vec<u8> = (1..=self.n as u8).collect();
        loop {
            out.push(PancakeState { stack: perm.clone() });
            // next lexicographic permutation
            let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
                break;
            };
            let j = (i + 1..perm.len()).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        out
    }
}

impl SearchDomain for PancakeDomain {
    type State = PancakeState;

    fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: DomainKind::Pancake,
            n: self.n,
        }
    }

    fn successors(&self, state: &PancakeState) -> Vec<(PancakeState, Cost)> {
        (2..=state.n()).map(|len| (state.flip(len), 1)).collect()
    }

    fn is_goal(&self, state: &PancakeState) -> bool {
        state.is_sorted()
    }

    /// One-hot of the pancake id at each stack position, top first.
    fn encode(&self, state: &PancakeState) -> FeatureVector {
        let n = state.n();
        let mut values = vec![0.0f32; n * n];
        for (pos, &p) in state.stack.iter().enumerate() {
            values[pos * n + (p as usize - 1)] = 1.0;
        }
        FeatureVector(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn st(v: &[u8]) -> PancakeState {
        PancakeState::new(v.to_vec()).unwrap()
    }

    #[test]
    fn successors_of_small_stacks() {
        let d = PancakeDomain::new(2).unwrap();
        assert_eq!(d.successors(&st(&[2, 1])), vec![(st(&[1, 2]), 1)]);

        let d = PancakeDomain::new(3).unwrap();
        assert_eq!(
            d.successors(&st(&[1, 2, 3])),
            vec![(st(&[2, 1, 3]), 1), (st(&[3, 2, 1]), 1)]
        );
    }

    #[test]
    fn flips_are_involutions() {
        let d = PancakeDomain::new(5).unwrap();
        for s in d.all_states() {
            for len in 2..=5 {
                assert_eq!(s.flip(len).flip(len), s);
            }
        }
    }

    #[test]
    fn goal_test() {
        let d = PancakeDomain::new(3).unwrap();
        assert!(d.is_goal(&st(&[1, 2, 3])));
        assert!(!d.is_goal(&st(&[2, 1, 3])));
        assert!(PancakeState::new(vec![1]).is_err());
        assert!(PancakeDomain::new(1).is_err());
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(PancakeState::new(vec![1, 1, 3]).is_err());
        assert!(PancakeState::new(vec![0, 1, 2]).is_err());
        assert!(PancakeState::new(vec![1, 2, 4]).is_err());
    }

    #[test]
    fn encodings() {
        let d2 = PancakeDomain::new(2).unwrap();
        assert_eq!(d2.encode(&st(&[1, 2])).0, vec![1., 0., 0., 1.]);
        assert_eq!(d2.encode(&st(&[2, 1])).0, vec![0., 1., 1., 0.]);
        let d3 = PancakeDomain::new(3).unwrap();
        assert_eq!(
            d3.encode(&st(&[2, 1, 3])).0,
            vec![0., 1., 0., 1., 0., 0., 0., 0., 1.]
        );
    }

    #[test]
    fn encoding_is_injective_up_to_six() {
        for n in 2..=6 {
            let d = PancakeDomain::new(n).unwrap();
            let states = d.all_states();
            let codes: HashSet<Vec<u32>> = states
                .iter()
                .map(|s| d.encode(s).0.iter().map(|x| x.to_bits()).collect())
                .collect();
            assert_eq!(codes.len(), states.len());
            assert_eq!(states.len(), (1..=n).product::<usize>());
        }
    }

    #[test]
    fn successor_symmetry_and_branching() {
        let d = PancakeDomain::new(5).unwrap();
        for s in d.all_states() {
            let succ = d.successors(&s);
            assert_eq!(succ.len(), 4);
            for (t, c) in succ {
                assert!(d.successors(&t).contains(&(s.clone(), c)));
            }
        }
    }
}
