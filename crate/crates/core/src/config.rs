//! Run configuration shared by every command. A config file holds UTF-8
//! `key=value` lines using the same names as the command-line flags
//! (without the leading dashes); flags override file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::datasets::GenOptions;
use crate::domains::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::experiment::{FitCriterion, Profile, SweepConfig, ThresholdSet, Trial};
use crate::losses::LossKind;
use crate::neuralnet::ArchKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GenData,
    Sweep,
    Report,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GenData => "gen-data",
            Command::Sweep => "sweep",
            Command::Report => "report",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionChoice {
    Exact,
    Threshold,
}

pub const KEYS: &[&str] = &[
    "seed",
    "profile",
    "out",
    "domain",
    "n",
    "sizes",
    "arch",
    "loss",
    "epsilon",
    "c",
    "criterion",
    "threshold",
    "threshold-set",
    "count",
    "train-count",
    "test-count",
    "restarts",
    "max-epochs",
    "size-cap",
    "lr",
    "batch-size",
    "max-walk",
    "parallel",
    "exhaustive-restarts",
    "cache-data",
    "csv",
    "results",
    "c-values",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub profile: Profile,
    pub out: PathBuf,
    pub domain: Option<DomainKind>,
    pub n: Option<usize>,
    pub sizes: Vec<usize>,
    pub arch: ArchKind,
    pub loss: Option<LossKind>,
    pub epsilon: Option<f64>,
    pub c: f64,
    pub criterion: CriterionChoice,
    pub thresholds: Vec<f64>,
    pub threshold_set: Option<ThresholdSet>,
    pub count: Option<usize>,
    pub train_count: Option<usize>,
    pub test_count: Option<usize>,
    pub restarts: Option<usize>,
    pub max_epochs: Option<usize>,
    pub size_cap: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_walk: Option<usize>,
    pub parallel: bool,
    pub exhaustive_restarts: bool,
    pub cache_data: bool,
    pub csv: bool,
    pub results: Option<PathBuf>,
    pub c_values: Vec<f64>,
}

/// Ordered `key=value` settings; later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Settings::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.0.insert(key, value.into().trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Parses config-file text. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
            s.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(s)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse(&text)
    }

    /// `other` wins on shared keys.
    pub fn overlay(mut self, other: &Settings) -> Self {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn value<T: FromStr>(s: &Settings, key: &str) -> Result<Option<T>> {
    match s.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`"))),
    }
}

fn flag(s: &Settings, key: &str) -> Result<bool> {
    match s.get(key) {
        None => Ok(false),
        Some("true" | "1" | "yes" | "") => Ok(true),
        Some("false" | "0" | "no") => Ok(false),
        Some(v) => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
    }
}

fn list<T: FromStr>(s: &Settings, key: &str) -> Result<Vec<T>> {
    match s.get(key) {
        None => Ok(Vec::new()),
        Some(v) => v
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid list item `{p}` for `{key}`")))
            })
            .collect(),
    }
}

/// `4..7` (inclusive), `4,5,6` or a single size.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid size range `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn positive(key: &str, v: Option<usize>) -> Result<Option<usize>> {
    if v == Some(0) {
        return Err(Error::Config(format!("`{key}` must be >= 1")));
    }
    Ok(v)
}

impl RunConfig {
    pub const DEFAULT_SEED: u64 = 1;
    pub const DEFAULT_C: f64 = 10.0;
    pub const DEFAULT_CURVE_EPSILON: f64 = 2.0;

    /// Builds and validates a configuration. Nothing is computed or
    /// written here.
    pub fn from_settings(command: Command, s: &Settings) -> Result<Self> {
        let config = RunConfig {
            command,
            seed: value(s, "seed")?.unwrap_or(Self::DEFAULT_SEED),
            profile: value(s, "profile")?.unwrap_or(Profile::DESK),
            out: value(s, "out")?.unwrap_or_else(|| PathBuf::from("out")),
            domain: value(s, "domain")?,
            n: positive("n", value(s, "n")?)?,
            sizes: match s.get("sizes") {
                Some(t) => parse_sizes(t)?,
                None => Vec::new(),
            },
            arch: value(s, "arch")?.unwrap_or(ArchKind::FixedDepth),
            loss: value(s, "loss")?,
            epsilon: value(s, "epsilon")?,
            c: value(s, "c")?.unwrap_or(Self::DEFAULT_C),
            criterion: match s.get("criterion") {
                None | Some("exact") => CriterionChoice::Exact,
                Some("threshold") => CriterionChoice::Threshold,
                Some(v) => return Err(Error::Config(format!("invalid criterion `{v}` (exact or threshold)"))),
            },
            thresholds: list(s, "threshold")?,
            threshold_set: value(s, "threshold-set")?,
            count: positive("count", value(s, "count")?)?,
            train_count: positive("train-count", value(s, "train-count")?)?,
            test_count: positive("test-count", value(s, "test-count")?)?,
            restarts: positive("restarts", value(s, "restarts")?)?,
            max_epochs: positive("max-epochs", value(s, "max-epochs")?)?,
            size_cap: positive("size-cap", value(s, "size-cap")?)?,
            learning_rate: value(s, "lr")?,
            batch_size: positive("batch-size", value(s, "batch-size")?)?,
            max_walk: positive("max-walk", value(s, "max-walk")?)?,
            parallel: flag(s, "parallel")?,
            exhaustive_restarts: flag(s, "exhaustive-restarts")?,
            cache_data: flag(s, "cache-data")?,
            csv: flag(s, "csv")?,
            results: value(s, "results")?,
            c_values: list(s, "c-values")?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return err(format!("lr must be positive, got {lr}"));
            }
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return err(format!("c must be >= 0, got {}", self.c));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return err(format!("epsilon must be positive, got {e}"));
            }
        }
        if self.c_values.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return err("c-values must be >= 0".into());
        }
        if self.thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return err("thresholds must be positive".into());
        }
        let mut sorted = self.thresholds.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return err("thresholds must be distinct".into());
        }
        if self.loss == Some(LossKind::TrueL) {
            return err("the true loss cannot be trained on; use l_eps, mse, scaled or cross_entropy".into());
        }
        if !self.thresholds.is_empty() && self.threshold_set.is_some() {
            return err("give either threshold or threshold-set, not both".into());
        }
        if self.criterion == CriterionChoice::Exact && (!self.thresholds.is_empty() || self.threshold_set.is_some()) {
            return err("thresholds need criterion=threshold".into());
        }
        if self.threshold_set == Some(ThresholdSet::LossComparison) && self.loss.is_some() {
            return err("the loss-comparison set chooses its own losses; drop `loss`".into());
        }
        match self.command {
            Command::GenData => {
                let domain = self.require_domain()?;
                let n = self.n.ok_or_else(|| Error::Config("gen-data needs --n".into()))?;
                DomainSpec::new(domain, n)?;
                if self.count.is_none() {
                    return err("gen-data needs --count".into());
                }
            }
            Command::Sweep => {
                let domain = self.require_domain()?;
                let sizes = self.sweep_sizes();
                if sizes.is_empty() {
                    return err("sweep needs --sizes (e.g. 4..7) or --n".into());
                }
                if sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return err("sizes must be strictly ascending".into());
                }
                for &n in &sizes {
                    DomainSpec::new(domain, n)?;
                }
                if let Some(e) = self.epsilon {
                    if e != domain.epsilon() {
                        return err(format!("{domain} uses epsilon {}; got {e}", domain.epsilon()));
                    }
                }
                self.sweep_config()?.validate()?;
            }
            Command::Verify => {
                if let (Some(domain), Some(n)) = (self.domain, self.n) {
                    DomainSpec::new(domain, n)?;
                } else if self.n.is_some() {
                    return err("verify --n needs --domain".into());
                }
            }
            Command::Report => {}
        }
        Ok(())
    }

    fn require_domain(&self) -> Result<DomainKind> {
        self.domain
            .ok_or_else(|| Error::Config(format!("{} needs --domain (pancake, tsp or bw)", self.command)))
    }

    fn sweep_sizes(&self) -> Vec<usize> {
        if self.sizes.is_empty() {
            self.n.into_iter().collect()
        } else {
            self.sizes.clone()
        }
    }

    /// Criteria and losses of the sweep.
    pub fn trials(&self) -> Result<Vec<Trial>> {
        let domain = self.require_domain()?;
        let c = self.c;
        let trials = match self.criterion {
            CriterionChoice::Exact => {
                vec![Trial::new(self.loss.unwrap_or(LossKind::LEps), c, FitCriterion::exact())]
            }
            CriterionChoice::Threshold => {
                if self.threshold_set == Some(ThresholdSet::LossComparison) {
                    ThresholdSet::LossComparison
                        .fit_criteria(domain)
                        .into_iter()
                        .map(|crit| match crit.kind {
                            crate::experiment::CriterionKind::Threshold { metric, .. } => Trial::new(metric, c, crit),
                            crate::experiment::CriterionKind::ExactL0 => unreachable!("threshold set"),
                        })
                        .collect()
                } else {
                    let loss = self.loss.unwrap_or(LossKind::Mse);
                    // The criterion metric follows the loss, except that
                    // the ε-bounded loss is judged by MSE.
                    let metric = match loss {
                        LossKind::LEps => LossKind::Mse,
                        other => other,
                    };
                    let thresholds = if !self.thresholds.is_empty() {
                        self.thresholds.clone()
                    } else {
                        let set = self.threshold_set.unwrap_or(match self.arch {
                            ArchKind::FixedDepth => ThresholdSet::FixedDepthMse,
                            ArchKind::FixedWidth => ThresholdSet::FixedWidthMse,
                        });
                        set.criteria(domain).into_iter().map(|(_, t)| t).collect()
                    };
                    thresholds
                        .into_iter()
                        .map(|t| Trial::new(loss, c, FitCriterion::threshold(metric, t)))
                        .collect()
                }
            }
        };
        Ok(trials
            .into_iter()
            .map(|t| {
                let crit = self.profile.with_epochs(t.criterion);
                let crit = match self.max_epochs {
                    Some(e) => crit.with_max_epochs(e),
                    None => crit,
                };
                Trial { criterion: crit, ..t }
            })
            .collect())
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let domain = self.require_domain()?;
        let trials = self.trials()?;
        let mut cfg = SweepConfig::new(
            domain,
            self.sweep_sizes(),
            self.arch,
            trials[0],
            &self.profile,
            self.seed,
        );
        cfg.trials = trials;
        if let Some(v) = self.train_count {
            cfg.train_count = v;
        }
        if let Some(v) = self.test_count {
            cfg.test_count = v;
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.size_cap {
            cfg.size_cap = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        cfg.batch_size = self.batch_size;
        cfg.gen = GenOptions {
            max_walk: self.max_walk,
            ..GenOptions::default()
        };
        cfg.data_dir = self.cache_data.then(|| self.out.join("data"));
        cfg.parallel = self.parallel;
        cfg.stop_at_first_fit = !self.exhaustive_restarts;
        Ok(cfg)
    }

    pub fn gen_options(&self) -> GenOptions {
        GenOptions {
            max_walk: self.max_walk,
            ..GenOptions::default()
        }
    }

    pub fn results_path(&self) -> PathBuf {
        self.results
            .clone()
            .unwrap_or_else(|| self.out.join(crate::experiment::ResultsStore::RESULTS_FILE))
    }

    pub fn curve_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(Self::DEFAULT_CURVE_EPSILON)
    }

    pub fn curve_c_values(&self) -> Vec<f64> {
        if self.c_values.is_empty() {
            vec![1.0, 10.0, 100.0]
        } else {
            self.c_values.clone()
        }
    }
}
