//! Held–Karp subset dynamic programs over integer-tenth weights.

use crate::domains::{Cost, TspInstance, TspState};
use crate::error::{Error, Result};

/// Default city limit; the table is O(2^n · n).
pub const DEFAULT_HELD_KARP_CAP: usize = 20;

/// Largest instance [`CompletionTable`] will build.
pub const COMPLETION_TABLE_CAP: usize = 16;

const INF: u32 = u32::MAX;

/// Optimal tour cost from the instance's start city, in real units.
pub fn held_karp(instance: &TspInstance) -> Result<f64> {
    Ok(held_karp_units(instance, DEFAULT_HELD_KARP_CAP)? as f64 / 10.0)
}

/// Optimal tour cost in tenths. Fails with `SizeLimit` above `cap` cities.
pub fn held_karp_units(instance: &TspInstance, cap: usize) -> Result<Cost> {
    held_karp_from_state(instance, &instance.initial_state(), cap)
}

/// Cheapest completion of a partial tour: visit every unvisited city from
/// the current one, then return to the start.
pub fn held_karp_from_state(instance: &TspInstance, state: &TspState, cap: usize) -> Result<Cost> {
    let n = instance.n();
    if n > cap {
        return Err(Error::SizeLimit { n, cap });
    }
    if state.is_closed() {
        return Ok(0);
    }
    let start = instance.start();
    let cur = state.current();
    let cities: Vec<usize> = (0..n).filter(|&c| !state.is_visited(c)).collect();
    let r = cities.len();
    if r == 0 {
        return Ok(Cost::from(instance.tenths(cur, start)));
    }

    let w = |a: usize, b: usize| u32::from(instance.tenths(a, b));
    let full = (1usize << r) - 1;
    // dp[mask * r + j]: cheapest path from `cur` through exactly `mask`, ending at cities[j]
    let mut dp = vec![INF; (full + 1) * r];
    for (j, &c) in cities.iter().enumerate() {
        dp[(1 << j) * r + j] = w(cur, c);
    }
    for mask in 1..=full {
        for j in 0..r {
            let here = dp[mask * r + j];
            if here == INF || mask & (1 << j) == 0 {
                continue;
            }
            for (k, &ck) in cities.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = here + w(cities[j], ck);
                let slot = &mut dp[next * r + k];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    let best = cities
        .iter()
        .enumerate()
        .map(|(j, &c)| dp[full * r + j].saturating_add(w(c, start)))
        .min()
        .expect("at least one unvisited city");
    Ok(Cost::from(best))
}

/// Exact cost-to-go for every partial tour of one instance, filled backward
/// from the completed tours.
#[derive(Debug, Clone)]
pub struct CompletionTable {
    n: usize,
    remaining: Vec<u32>,
}

impl CompletionTable {
    pub fn new(instance: &TspInstance) -> Result<Self> {
        let n = instance.n();
        if n > COMPLETION_TABLE_CAP {
            return Err(Error::SizeLimit {
                n,
                cap: COMPLETION_TABLE_CAP,
            });
        }
        let start = instance.start();
        let full = (1usize << n) - 1;
        let mut remaining = vec![INF; (full + 1) * n];
        for j in 0..n {
            remaining[full * n + j] = u32::from(instance.tenths(j, start));
        }
        for mask in (1..full).rev() {
            if mask & (1 << start) == 0 {
                continue;
            }
            for j in (0..n).filter(|&j| mask & (1 << j) != 0) {
                let best = (0..n)
                    .filter(|&k| mask & (1 << k) == 0)
                    .map(|k| u32::from(instance.tenths(j, k)) + remaining[(mask | (1 << k)) * n + k])
                    .min()
                    .unwrap_or(INF);
                remaining[mask * n + j] = best;
            }
        }
        Ok(CompletionTable { n, remaining })
    }

    /// `h*(state)` in tenths.
    pub fn hstar_units(&self, state: &TspState) -> Cost {
        if state.is_closed() {
            return 0;
        }
        Cost::from(self.remaining[state.visited() as usize * self.n + state.current()])
    }
}
