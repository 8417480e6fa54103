use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{Cost, DomainKind, DomainSpec, FeatureVector, SearchDomain};
use crate::error::{Error, Result};

/// Support value meaning "on the table".
pub const TABLE: u8 = 0;

/// Largest block count for which the uniform sampler's counts fit in `u128`.
pub const MAX_SAMPLED_BLOCKS: usize = 30;

/// A forest of towers. `below[b - 1]` is the support of block `b`:
/// [`TABLE`] or another block id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlocksState {
    below: Vec<u8>,
}

impl BlocksState {
    pub fn new(below: Vec<u8>) -> Result<Self> {
        let n = below.len();
        if n == 0 || n > u8::MAX as usize {
            return Err(Error::InvalidState(format!("blocks world needs 1..=255 blocks, got {n}")));
        }
        let mut supports = vec![false; n + 1];
        for (i, &s) in below.iter().enumerate() {
            let b = i + 1;
            let s = s as usize;
            if s > n || s == b {
                return Err(Error::InvalidState(format!("block {b} has invalid support {s}")));
            }
            if s != 0 {
                if supports[s] {
                    return Err(Error::InvalidState(format!("block {s} supports two blocks")));
                }
                supports[s] = true;
            }
        }
        // With in-degree <= 1, a cycle is the only way to never reach the table.
        for start in 1..=n {
            let mut cur = start;
            let mut steps = 0;
            while cur != 0 {
                cur = below[cur - 1] as usize;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidState(format!("support cycle through block {start}")));
                }
            }
        }
        Ok(BlocksState { below })
    }

    /// Builds a state from towers listed bottom to top.
    pub fn from_towers(n: usize, towers: &[Vec<u8>]) -> Result<Self> {
        let mut below = vec![u8::MAX; n];
        for tower in towers {
            let mut support = TABLE;
            for &b in tower {
                let idx = (b as usize)
                    .checked_sub(1)
                    .filter(|&i| i < n)
                    .ok_or_else(|| Error::InvalidState(format!("block id {b} out of range")))?;
                if below[idx] != u8::MAX {
                    return Err(Error::InvalidState(format!("block {b} appears twice")));
                }
                below[idx] = support;
                support = b;
            }
        }
        if below.contains(&u8::MAX) {
            return Err(Error::InvalidState("every block must appear in a tower".into()));
        }
        Self::new(below)
    }

    pub fn all_on_table(n: usize) -> Self {
        BlocksState { below: vec![TABLE; n] }
    }

    /// The single ordered tower with block 1 at the bottom.
    pub fn ordered_stack(n: usize) -> Self {
        BlocksState {
            below: (0..n as u8).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.below.len()
    }

    pub fn support(&self, block: usize) -> u8 {
        self.below[block - 1]
    }

    pub fn supports(&self) -> &[u8] {
        &self.below
    }

    fn clear_mask(&self) -> Vec<bool> {
        let mut clear = vec![true; self.n() + 1];
        clear[0] = false;
        for &s in &self.below {
            clear[s as usize] = false;
        }
        clear
    }

    pub fn clear_blocks(&self) -> Vec<usize> {
        let clear = self.clear_mask();
        (1..=self.n()).filter(|&b| clear[b]).collect()
    }

    /// Towers bottom to top, ordered by their bottom block.
    pub fn towers(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        let mut above = vec![0u8; n + 1];
        for (i, &s) in self.below.iter().enumerate() {
            if s != TABLE {
                above[s as usize] = (i + 1) as u8;
            }
        }
        (1..=n)
            .filter(|&b| self.below[b - 1] == TABLE)
            .map(|bottom| {
                let mut tower = vec![bottom as u8];
                let mut cur = bottom;
                while above[cur] != 0 {
                    cur = above[cur] as usize;
                    tower.push(cur as u8);
                }
                tower
            })
            .collect()
    }

    fn moved(&self, block: usize, onto: u8) -> Self {
        let mut below = self.below.clone();
        below[block - 1] = onto;
        BlocksState { below }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlocksDomain {
    n: usize,
}

impl BlocksDomain {
    pub fn new(n: usize) -> Result<Self> {
        DomainSpec::new(DomainKind::Blocks, n)?;
        if n > u8::MAX as usize {
            return Err(Error::InvalidArgument(format!("blocks world n={n} too large")));
        }
        Ok(BlocksDomain { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn goal(&self) -> BlocksState {
        BlocksState::ordered_stack(self.n)
    }

    /// Number of valid states (tower forests) of `n` labelled blocks.
    pub fn state_count(n: usize) -> Option<u128> {
        lah_row(n).map(|row| row.iter().sum())
    }

    /// Draws a state uniformly over all tower forests.
    ///
    /// A forest with k towers corresponds to exactly k! (permutation,
    /// composition into k parts) pairs, so drawing k with weight equal to the
    /// Lah number L(n, k), then a uniform permutation and a uniform
    /// composition, is uniform over forests.
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BlocksState> {
        let n = self.n;
        let row = lah_row(n).ok_or(Error::SizeLimit {
            n,
            cap: MAX_SAMPLED_BLOCKS,
        })?;
        let total: u128 = row.iter().sum();
        let mut pick = rng.random_range(0..total);
        let mut towers = 1;
        for (k, &count) in row.iter().enumerate() {
            if pick < count {
                towers = k + 1;
                break;
            }
            pick -= count;
        }

        let mut perm: Vec<u8> = (1..=n as u8).collect();
        perm.shuffle(rng);
        let mut cuts: Vec<usize> = index::sample(rng, n - 1, towers - 1)
            .into_iter()
            .map(|c| c + 1)
            .collect();
        cuts.sort_unstable();

        let mut below = vec![TABLE; n];
        let mut next_cut = cuts.iter().peekable();
        for pos in 0..n {
            if pos > 0 && next_cut.peek() != Some(&&pos) {
                below[perm[pos] as usize - 1] = perm[pos - 1];
            } else if pos > 0 {
                next_cut.next();
            }
        }
        Ok(BlocksState { below })
    }

    /// Every state, generated by inserting block k into each forest of
    /// blocks 1..k-1 (new tower, on top of a tower, or beneath a block).
    pub fn all_states(&self) -> Vec<BlocksState> {
        let mut forests: Vec<Vec<u8>> = vec![vec![TABLE]];
        for k in 2..=self.n {
            let mut next = Vec::new();
            for f in &forests {
                let k8 = k as u8;
                let mut clear = vec![true; k];
                for &s in f {
                    clear[s as usize] = false;
                }
                // new tower
                let mut g = f.clone();
                g.push(TABLE);
                next.push(g);
                // on top of a clear block
                for (b, _) in clear.iter().enumerate().skip(1).filter(|(_, &c)| c) {
                    let mut g = f.clone();
                    g.push(b as u8);
                    next.push(g);
                }
                // beneath block b
                for b in 1..k {
                    let mut g = f.clone();
                    g.push(f[b - 1]);
                    g[b - 1] = k8;
                    next.push(g);
                }
            }
            forests = next;
        }
        forests.into_iter().map(|below| BlocksState { below }).collect()
    }
}

/// Lah numbers L(n, k) for k = 1..=n.
fn lah_row(n: usize) -> Option<Vec<u128>> {
    if n == 0 || n > MAX_SAMPLED_BLOCKS {
        return None;
    }
    let mut row = Vec::with_capacity(n);
    let mut value: u128 = (1..=n as u128).try_fold(1u128, |acc, x| acc.checked_mul(x))?;
    row.push(value);
    for k in 1..n as u128 {
        // L(n, k+1) = L(n, k) (n - k) / (k (k + 1))
        value = value.checked_mul(n as u128 - k)? / (k * (k + 1));
        row.push(value);
    }
    Some(row)
}

impl SearchDomain for BlocksDomain {
    type State = BlocksState;

    fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: DomainKind::Blocks,
            n: self.n,
        }
    }

    fn successors(&self, state: &BlocksState) -> Vec<(BlocksState, Cost)> {
        let clear = state.clear_blocks();
        let mut out = Vec::with_capacity(clear.len() * clear.len());
        for &b in &clear {
            for &c in &clear {
                if c != b {
                    out.push((state.moved(b, c as u8), 1));
                }
            }
            if state.support(b) != TABLE {
                out.push((state.moved(b, TABLE), 1));
            }
        }
        out
    }

    fn is_goal(&self, state: &BlocksState) -> bool {
        state.below.iter().enumerate().all(|(i, &s)| s as usize == i)
    }

    /// Per block, a one-hot over {table, 1..n} marking its support.
    fn encode(&self, state: &BlocksState) -> FeatureVector {
        let n = state.n();
        let mut values = vec![0.0f32; n * (n + 1)];
        for (i, &s) in state.below.iter().enumerate() {
            values[i * (n + 1) + s as usize] = 1.0;
        }
        FeatureVector(values)
    }
}
