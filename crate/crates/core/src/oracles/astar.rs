use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet};

use super::heuristics::Heuristic;
use crate::domains::{Cost, SearchDomain};
use crate::error::{Error, Result};

pub const DEFAULT_EXPANSION_CAP: usize = 10_000_000;

/// Order among fringe entries with equal f.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Prefer the deeper (larger g) entry.
    #[default]
    HighG,
    LowG,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<S> {
    /// Cost in domain cost units.
    pub optimal_cost: Cost,
    /// Start to goal, inclusive.
    pub path: Vec<S>,
    pub expanded_count: usize,
    pub generated_count: usize,
}

impl<S> SearchResult<S> {
    /// Number of edges on the returned path.
    pub fn path_len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

/// A* configuration.
#[derive(Debug, Clone, Copy)]
pub struct AStar {
    pub tie_break: TieBreak,
    pub expansion_cap: usize,
}

impl Default for AStar {
    fn default() -> Self {
        AStar {
            tie_break: TieBreak::HighG,
            expansion_cap: DEFAULT_EXPANSION_CAP,
        }
    }
}

struct Node<S> {
    state: S,
    g: Cost,
    parent: Option<usize>,
}

struct OpenEntry {
    f: f64,
    g: Cost,
    seq: u64,
    node: usize,
    high_g: bool,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap pops the greatest entry: smallest f, then g per tie-break,
    // then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        let by_g = if self.high_g {
            self.g.cmp(&other.g)
        } else {
            other.g.cmp(&self.g)
        };
        other
            .f
            .total_cmp(&self.f)
            .then(by_g)
            .then(other.seq.cmp(&self.seq))
    }
}

impl AStar {
    /// Best-first search on f = g + h with closed-set duplicate detection.
    ///
    /// Closed states are never re-opened, so optimality needs a consistent
    /// heuristic. Heuristic values are in cost units.
    pub fn search<D, H>(&self, domain: &D, start: D::State, heuristic: &H) -> Result<SearchResult<D::State>>
    where
        D: SearchDomain,
        H: Heuristic<D::State> + ?Sized,
    {
        let high_g = self.tie_break == TieBreak::HighG;
        let mut nodes: Vec<Node<D::State>> = Vec::new();
        let mut open = BinaryHeap::new();
        let mut best_g: HashMap<D::State, Cost> = HashMap::new();
        let mut closed: HashSet<D::State> = HashSet::new();
        let mut seq = 0u64;
        let mut expanded = 0usize;
        let mut generated = 1usize;

        let h0 = heuristic.estimate(&start);
        best_g.insert(start.clone(), 0);
        nodes.push(Node {
            state: start,
            g: 0,
            parent: None,
        });
        open.push(OpenEntry {
            f: h0,
            g: 0,
            seq,
            node: 0,
            high_g,
        });

        while let Some(entry) = open.pop() {
            let idx = entry.node;
            if closed.contains(&nodes[idx].state) {
                continue;
            }
            if best_g.get(&nodes[idx].state).is_some_and(|&g| g < nodes[idx].g) {
                continue;
            }
            if expanded >= self.expansion_cap {
                return Err(Error::ResourceLimit {
                    cap: self.expansion_cap,
                });
            }
            expanded += 1;
            closed.insert(nodes[idx].state.clone());

            if domain.is_goal(&nodes[idx].state) {
                let mut path = Vec::new();
                let mut cur = Some(idx);
                while let Some(i) = cur {
                    path.push(nodes[i].state.clone());
                    cur = nodes[i].parent;
                }
                path.reverse();
                return Ok(SearchResult {
                    optimal_cost: nodes[idx].g,
                    path,
                    expanded_count: expanded,
                    generated_count: generated,
                });
            }

            let g = nodes[idx].g;
            for (succ, cost) in domain.successors(&nodes[idx].state) {
                if closed.contains(&succ) {
                    continue;
                }
                let g2 = g + cost;
                match best_g.entry(succ.clone()) {
                    Entry::Occupied(mut e) => {
                        if *e.get() <= g2 {
                            continue;
                        }
                        e.insert(g2);
                    }
                    Entry::Vacant(e) => {
                        e.insert(g2);
                    }
                }
                generated += 1;
                seq += 1;
                let f = g2 as f64 + heuristic.estimate(&succ);
                nodes.push(Node {
                    state: succ,
                    g: g2,
                    parent: Some(idx),
                });
                open.push(OpenEntry {
                    f,
                    g: g2,
                    seq,
                    node: nodes.len() - 1,
                    high_g,
                });
            }
        }
        Err(Error::Unsolvable)
    }
}

/// A* with the default expansion cap.
pub fn astar<D, H>(domain: &D, start: D::State, heuristic: &H, tie_break: TieBreak) -> Result<SearchResult<D::State>>
where
    D: SearchDomain,
    H: Heuristic<D::State> + ?Sized,
{
    AStar {
        tie_break,
        ..AStar::default()
    }
    .search(domain, start, heuristic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{BlocksDomain, BlocksState, PancakeDomain, PancakeState};
    use crate::oracles::heuristics::{GapHeuristic, MisplacedBlocks};
    use crate::oracles::reference::bfs_cost;

    #[test]
    fn start_at_goal() {
        let d = PancakeDomain::new(4).unwrap();
        let r = astar(&d, d.goal(), &GapHeuristic, TieBreak::HighG).unwrap();
        assert_eq!(r.optimal_cost, 0);
        assert_eq!(r.path.len(), 1);
        assert_eq!(r.expanded_count, 1);
        assert!(r.expanded_count <= r.generated_count);
    }

    #[test]
    fn small_pancake() {
        let d = PancakeDomain::new(2).unwrap();
        let s = PancakeState::new(vec![2, 1]).unwrap();
        let r = astar(&d, s.clone(), &GapHeuristic, TieBreak::HighG).unwrap();
        assert_eq!(r.optimal_cost, 1);
        assert_eq!(bfs_cost(&d, s).unwrap(), 1);
    }

    #[test]
    fn blocks_all_on_table() {
        let d = BlocksDomain::new(3).unwrap();
        let s = BlocksState::all_on_table(3);
        let r = astar(&d, s.clone(), &MisplacedBlocks, TieBreak::HighG).unwrap();
        assert_eq!(r.optimal_cost, 2);
        assert_eq!(bfs_cost(&d, s).unwrap(), 2);
        assert_eq!(r.path.first(), Some(&BlocksState::all_on_table(3)));
        assert!(d.is_goal(r.path.last().unwrap()));
    }

    #[test]
    fn path_cost_matches_and_agrees_with_bfs() {
        let d = PancakeDomain::new(5).unwrap();
        for s in d.all_states() {
            for tb in [TieBreak::HighG, TieBreak::LowG] {
                let r = astar(&d, s.clone(), &GapHeuristic, tb).unwrap();
                assert_eq!(r.optimal_cost, bfs_cost(&d, s.clone()).unwrap());
                assert_eq!(r.path_len() as u64, r.optimal_cost);
                for w in r.path.windows(2) {
                    assert!(d.successors(&w[0]).iter().any(|(t, _)| t == &w[1]));
                }
            }
        }
    }

    #[test]
    fn expansion_cap_is_enforced() {
        let d = PancakeDomain::new(7).unwrap();
        let s = PancakeState::new(vec![7, 1, 6, 2, 5, 3, 4]).unwrap();
        let zero = |_: &PancakeState| 0.0;
        let err = AStar {
            tie_break: TieBreak::HighG,
            expansion_cap: 10,
        }
        .search(&d, s, &zero)
        .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { cap: 10 }));
    }

    #[test]
    fn tie_break_ordering() {
        let mk = |f, g, seq| OpenEntry {
            f,
            g,
            seq,
            node: 0,
            high_g: true,
        };
        let mut heap = BinaryHeap::new();
        heap.push(mk(3.0, 1, 0));
        heap.push(mk(3.0, 2, 1));
        heap.push(mk(2.0, 0, 2));
        heap.push(mk(3.0, 2, 3));
        assert_eq!(heap.pop().unwrap().seq, 2);
        assert_eq!(heap.pop().unwrap().seq, 1);
        assert_eq!(heap.pop().unwrap().seq, 3);
        assert_eq!(heap.pop().unwrap().seq, 0);
    }
}
