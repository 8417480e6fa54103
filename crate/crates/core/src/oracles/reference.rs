//! Slow, independent solvers used to cross-check the exact oracles.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::domains::{Cost, SearchDomain, TspInstance};
use crate::error::{Error, Result};

/// Breadth-first search cost for unit-cost domains.
pub fn bfs_cost<D: SearchDomain>(domain: &D, start: D::State) -> Result<Cost> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back((start, 0));
    while let Some((s, depth)) = queue.pop_front() {
        if domain.is_goal(&s) {
            return Ok(depth);
        }
        for (t, _) in domain.successors(&s) {
            if seen.insert(t.clone()) {
                queue.push_back((t, depth + 1));
            }
        }
    }
    Err(Error::Unsolvable)
}

/// Unit-cost distances from `root` to every reachable state.
///
/// In domains with reversible unit-cost moves (pancake, blocks world),
/// rooting this at the goal yields `h*` for the whole state space.
pub fn bfs_distances<D: SearchDomain>(domain: &D, root: D::State) -> HashMap<D::State, Cost> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(root.clone(), 0);
    queue.push_back(root);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for (t, _) in domain.successors(&s) {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Minimum tour cost (tenths) by enumerating all (n-1)! city orders.
pub fn tsp_brute_force_units(instance: &TspInstance) -> Cost {
    let n = instance.n();
    let start = instance.start();
    let mut rest: Vec<usize> = (0..n).filter(|&c| c != start).collect();
    let mut best = Cost::MAX;
    permute(&mut rest, 0, &mut |order| {
        let mut cost = 0;
        let mut prev = start;
        for &c in order {
            cost += Cost::from(instance.tenths(prev, c));
            prev = c;
        }
        cost += Cost::from(instance.tenths(prev, start));
        best = best.min(cost);
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{PancakeDomain, PancakeState};

    #[test]
    fn bfs_small() {
        let d = PancakeDomain::new(3).unwrap();
        assert_eq!(bfs_cost(&d, PancakeState::new(vec![3, 2, 1]).unwrap()).unwrap(), 1);
        assert_eq!(bfs_cost(&d, PancakeState::new(vec![1, 3, 2]).unwrap()).unwrap(), 3);
        let all = bfs_distances(&d, d.goal());
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn brute_force_hand_instance() {
        // 0->1->2->0 costs 1+1+1, the reverse direction 5+5+5
        let w = [0.0, 0.1, 0.5, 0.5, 0.0, 0.1, 0.1, 0.5, 0.0];
        let inst = TspInstance::from_weights(3, &w, 0).unwrap();
        assert_eq!(tsp_brute_force_units(&inst), 3);
    }
}
