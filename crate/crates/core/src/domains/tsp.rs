use rand::Rng;

use super::{Cost, DomainKind, DomainSpec, FeatureVector, SearchDomain};
use crate::error::{Error, Result};

/// Smallest and largest edge weight, in tenths.
pub const MIN_WEIGHT_TENTHS: u16 = 1;
pub const MAX_WEIGHT_TENTHS: u16 = 50;

/// Largest instance representable by the visited bitmask.
pub const MAX_CITIES: usize = 32;

/// A complete directed graph with weights on the 0.1 grid in [0.1, 5.0].
///
/// Weights are stored as integer tenths so tour costs compare exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TspInstance {
    n: usize,
    tenths: Vec<u16>,
    start: usize,
}

impl TspInstance {
    /// `tenths` is the row-major n×n weight matrix; the diagonal is ignored.
    pub fn from_tenths(n: usize, mut tenths: Vec<u16>, start: usize) -> Result<Self> {
        DomainSpec::new(DomainKind::Tsp, n)?;
        if n > MAX_CITIES {
            return Err(Error::InvalidArgument(format!("tsp supports at most {MAX_CITIES} cities")));
        }
        if tenths.len() != n * n {
            return Err(Error::shape(format!("{n}x{n} weights"), tenths.len()));
        }
        if start >= n {
            return Err(Error::InvalidState(format!("start city {start} out of range for n={n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let w = tenths[i * n + j];
                if i == j {
                    tenths[i * n + j] = 0;
                } else if !(MIN_WEIGHT_TENTHS..=MAX_WEIGHT_TENTHS).contains(&w) {
                    return Err(Error::InvalidState(format!(
                        "weight {i}->{j} = {} outside [0.1, 5.0]",
                        f64::from(w) / 10.0
                    )));
                }
            }
        }
        Ok(TspInstance { n, tenths, start })
    }

    /// Builds an instance from real weights, which must lie on the 0.1 grid.
    pub fn from_weights(n: usize, weights: &[f64], start: usize) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::shape(format!("{n}x{n} weights"), weights.len()));
        }
        let mut tenths = Vec::with_capacity(n * n);
        for (idx, &w) in weights.iter().enumerate() {
            if idx / n == idx % n {
                tenths.push(0);
                continue;
            }
            let scaled = w * 10.0;
            let rounded = scaled.round();
            if !w.is_finite() || (scaled - rounded).abs() > 1e-6 || !(0.0..=u16::MAX as f64).contains(&rounded) {
                return Err(Error::InvalidState(format!("weight {w} is not a multiple of 0.1")));
            }
            tenths.push(rounded as u16);
        }
        Self::from_tenths(n, tenths, start)
    }

    /// Weights uniform over {0.1, 0.2, ..., 5.0}; start city uniform.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut tenths = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    tenths[i * n + j] = rng.random_range(MIN_WEIGHT_TENTHS..=MAX_WEIGHT_TENTHS);
                }
            }
        }
        let start = rng.random_range(0..n.max(1));
        Self::from_tenths(n, tenths, start)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Edge cost in tenths.
    pub fn tenths(&self, from: usize, to: usize) -> u16 {
        self.tenths[from * self.n + to]
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        f64::from(self.tenths(from, to)) / 10.0
    }

    pub fn initial_state(&self) -> TspState {
        TspState {
            visited: 1 << self.start,
            current: self.start as u8,
            closed: false,
        }
    }

    pub fn all_visited_mask(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

/// Position in a partial tour: visited cities and the current city.
///
/// `closed` marks the state reached by the final return-to-start arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TspState {
    visited: u32,
    current: u8,
    closed: bool,
}

impl TspState {
    pub fn new(instance: &TspInstance, visited: u32, current: usize, closed: bool) -> Result<Self> {
        let start_bit = 1u32 << instance.start;
        if visited & !instance.all_visited_mask() != 0 {
            return Err(Error::InvalidState(format!("visited mask {visited:#b} has bits beyond n")));
        }
        if visited & start_bit == 0 {
            return Err(Error::InvalidState("start city must be visited".into()));
        }
        if current >= instance.n || visited & (1 << current) == 0 {
            return Err(Error::InvalidState(format!("current city {current} not visited")));
        }
        if closed && (visited != instance.all_visited_mask() || current != instance.start) {
            return Err(Error::InvalidState("closed tour must have visited every city".into()));
        }
        Ok(TspState {
            visited,
            current: current as u8,
            closed,
        })
    }

    pub fn visited(&self) -> u32 {
        self.visited
    }

    pub fn current(&self) -> usize {
        self.current as usize
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_visited(&self, city: usize) -> bool {
        self.visited & (1 << city) != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspDomain {
    instance: TspInstance,
}

impl TspDomain {
    pub fn new(instance: TspInstance) -> Self {
        TspDomain { instance }
    }

    pub fn instance(&self) -> &TspInstance {
        &self.instance
    }

    pub fn initial_state(&self) -> TspState {
        self.instance.initial_state()
    }
}

impl SearchDomain for TspDomain {
    type State = TspState;

    fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: DomainKind::Tsp,
            n: self.instance.n,
        }
    }

    fn successors(&self, state: &TspState) -> Vec<(TspState, Cost)> {
        let inst = &self.instance;
        if state.closed {
            return Vec::new();
        }
        let cur = state.current();
        if state.visited == inst.all_visited_mask() {
            let back = TspState {
                visited: state.visited,
                current: inst.start as u8,
                closed: true,
            };
            return vec![(back, Cost::from(inst.tenths(cur, inst.start)))];
        }
        (0..inst.n)
            .filter(|&j| !state.is_visited(j))
            .map(|j| {
                let next = TspState {
                    visited: state.visited | (1 << j),
                    current: j as u8,
                    closed: false,
                };
                (next, Cost::from(inst.tenths(cur, j)))
            })
            .collect()
    }

    fn is_goal(&self, state: &TspState) -> bool {
        state.closed
    }

    /// Weight matrix (diagonal 0), visited indicator, start one-hot.
    fn encode(&self, state: &TspState) -> FeatureVector {
        let inst = &self.instance;
        let n = inst.n;
        let mut values = Vec::with_capacity(n * n + 2 * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f32::from(inst.tenths(i, j)) / 10.0);
            }
        }
        values.extend((0..n).map(|c| if state.is_visited(c) { 1.0 } else { 0.0 }));
        values.extend((0..n).map(|c| if c == inst.start { 1.0 } else { 0.0 }));
        FeatureVector(values)
    }
}
