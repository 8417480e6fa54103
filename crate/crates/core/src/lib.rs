//! Measuring how large a neural network must be to fit optimal cost-to-goal
//! values (`h*`) on NP-hard search domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`domains`] defines pancake sorting, TSP and blocks world as search
//!   domains with fixed-length feature encodings.
//! * [`oracles`] holds A*, the admissible heuristics, Held–Karp and the
//!   heuristic-based decision procedure used to label data with exact `h*`.
//! * [`datasets`] generates labelled samples and reads/writes them.
//! * [`losses`] implements the ε-bounded loss family.
//! * [`neuralnet`] is a from-scratch fixed-depth / fixed-width network with
//!   reverse-mode gradients and Adam.
//! * [`experiment`] runs the binary search for minimal network size and the
//!   problem-size sweeps.
//! * [`report`], [`config`] and [`verify`] back the command-line tool.

pub mod config;
pub mod datasets;
pub mod domains;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod neuralnet;
pub mod oracles;
pub mod report;
pub mod rng;
pub mod verify;

pub use domains::{Cost, DomainKind, DomainSpec, FeatureVector, SearchDomain};
pub use error::{Error, Result};
pub use experiment::{FitCriterion, ResultRecord};
pub use losses::{LossConfig, LossKind};
pub use neuralnet::{ArchKind, Architecture, Model, Parameters};
