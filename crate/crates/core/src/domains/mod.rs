//! Search domains and their state encodings.
//!
//! Step costs are carried as integer [`Cost`] units. One unit is the domain's
//! ε (1 for pancake and blocks world, 0.1 for TSP), so every cost comparison
//! in search and labelling is exact. [`DomainSpec::to_real`] converts back.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};

pub mod blocks;
pub mod pancake;
pub mod tsp;

pub use blocks::{BlocksDomain, BlocksState};
pub use pancake::{PancakeDomain, PancakeState};
pub use tsp::{TspDomain, TspInstance, TspState};

/// Path cost in multiples of the domain's ε.
pub type Cost = u64;

/// The encoding φ(s) of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f32>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Pancake,
    Tsp,
    Blocks,
}

impl DomainKind {
    pub const ALL: [DomainKind; 3] = [DomainKind::Pancake, DomainKind::Tsp, DomainKind::Blocks];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Pancake => "pancake",
            DomainKind::Tsp => "tsp",
            DomainKind::Blocks => "bw",
        }
    }

    /// Cost units per unit of real cost.
    pub fn cost_scale(self) -> u32 {
        match self {
            DomainKind::Tsp => 10,
            DomainKind::Pancake | DomainKind::Blocks => 1,
        }
    }

    pub fn epsilon(self) -> f64 {
        1.0 / f64::from(self.cost_scale())
    }

    pub fn min_size(self) -> usize {
        match self {
            DomainKind::Pancake | DomainKind::Tsp => 2,
            DomainKind::Blocks => 1,
        }
    }

    pub fn feature_dim(self, n: usize) -> usize {
        match self {
            DomainKind::Pancake => n * n,
            DomainKind::Tsp => n * n + 2 * n,
            DomainKind::Blocks => n * (n + 1),
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pancake" => Ok(DomainKind::Pancake),
            "tsp" => Ok(DomainKind::Tsp),
            "bw" | "blocks" | "blocksworld" | "blocks-world" => Ok(DomainKind::Blocks),
            other => Err(Error::InvalidArgument(format!("unknown domain `{other}`"))),
        }
    }
}

/// A domain family at a fixed problem size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, n: usize) -> Result<Self> {
        if n < kind.min_size() {
            return Err(Error::InvalidArgument(format!(
                "{kind} requires n >= {}, got {n}",
                kind.min_size()
            )));
        }
        Ok(DomainSpec { kind, n })
    }

    pub fn epsilon(&self) -> f64 {
        self.kind.epsilon()
    }

    pub fn feature_dim(&self) -> usize {
        self.kind.feature_dim(self.n)
    }

    /// Converts integer cost units to a real cost.
    pub fn to_real(&self, units: Cost) -> f64 {
        units as f64 / f64::from(self.kind.cost_scale())
    }

    /// Cost of a single step in real units, for unit-cost domains.
    pub fn step_cost(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Tsp => None,
            _ => Some(1.0),
        }
    }
}

/// A deterministic state space with non-negative integer step costs.
pub trait SearchDomain {
    type State: Clone + Eq + Hash + fmt::Debug;

    fn spec(&self) -> DomainSpec;

    /// Successors of `state` with their step costs, in a fixed order.
    fn successors(&self, state: &Self::State) -> Vec<(Self::State, Cost)>;

    fn is_goal(&self, state: &Self::State) -> bool;

    fn encode(&self, state: &Self::State) -> FeatureVector;
}
