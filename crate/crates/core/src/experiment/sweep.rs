use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use super::fit::{fits, test_error, test_metric_for, FitContext, FitOutcome};
use super::record::{RecordStatus, ResultRecord, ResultsStore};
use super::search::find_min_size;
use super::{FitCriterion, Profile};
use crate::datasets::{self, gen_dataset, Dataset, GenOptions};
use crate::domains::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::losses::{LossConfig, LossKind};
use crate::neuralnet::{AdamState, ArchKind};
use crate::rng::derive_seed;

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const FIT_STREAM: u64 = 3;

/// A training loss paired with the criterion that decides fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub loss: LossKind,
    /// Sharpness of the ε-bounded loss; ignored by other losses.
    pub c: f64,
    pub criterion: FitCriterion,
}

impl Trial {
    pub fn new(loss: LossKind, c: f64, criterion: FitCriterion) -> Self {
        Trial { loss, c, criterion }
    }

    fn loss_config(&self, epsilon: f64, classes: usize) -> LossConfig {
        match self.loss {
            LossKind::CrossEntropy => LossConfig::cross_entropy(epsilon, classes),
            LossKind::LEps => LossConfig::l_eps(epsilon, self.c),
            kind => LossConfig::new(kind, epsilon),
        }
    }

    fn c_value(&self) -> f64 {
        if self.loss == LossKind::LEps {
            self.c
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub domain: DomainKind,
    pub sizes: Vec<usize>,
    pub arch: ArchKind,
    pub trials: Vec<Trial>,
    pub train_count: usize,
    pub test_count: usize,
    pub restarts: usize,
    pub seed: u64,
    /// First size probed by the doubling search.
    pub size_lo: usize,
    pub size_cap: usize,
    /// Sizes above the minimum probed to detect non-monotone outcomes.
    pub confirm: usize,
    pub learning_rate: f64,
    /// `None` picks 64 or 256 from the training-set size.
    pub batch_size: Option<usize>,
    pub gen: GenOptions,
    /// Dataset cache; datasets are regenerated when absent.
    pub data_dir: Option<PathBuf>,
    /// Run sizes and restarts on the rayon pool. Records are identical
    /// either way but may be appended in a different order.
    pub parallel: bool,
    pub stop_at_first_fit: bool,
}

impl SweepConfig {
    /// A single-trial sweep with the given profile's dataset sizes,
    /// restarts and epoch caps.
    pub fn new(
        domain: DomainKind,
        sizes: Vec<usize>,
        arch: ArchKind,
        trial: Trial,
        profile: &Profile,
        seed: u64,
    ) -> Self {
        let trial = Trial {
            criterion: profile.with_epochs(trial.criterion),
            ..trial
        };
        SweepConfig {
            domain,
            sizes,
            arch,
            train_count: profile.train_count(&trial.criterion),
            test_count: profile.test_count,
            restarts: profile.restarts,
            trials: vec![trial],
            seed,
            size_lo: 1,
            size_cap: arch.default_size_cap(),
            confirm: 1,
            learning_rate: AdamState::DEFAULT_LEARNING_RATE,
            batch_size: None,
            gen: GenOptions::default(),
            data_dir: None,
            parallel: false,
            stop_at_first_fit: true,
        }
    }

    /// The same sweep once per threshold, with the first trial's loss.
    pub fn with_thresholds(mut self, thresholds: &[f64]) -> Result<Self> {
        let base = *self
            .trials
            .first()
            .ok_or_else(|| Error::InvalidArgument("sweep has no trial".into()))?;
        let metric = match base.criterion.kind {
            super::CriterionKind::Threshold { metric, .. } => metric,
            super::CriterionKind::ExactL0 => base.loss,
        };
        self.trials = thresholds
            .iter()
            .map(|&t| Trial {
                criterion: FitCriterion::threshold(metric, t).with_max_epochs(base.criterion.max_epochs),
                ..base
            })
            .collect();
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.sizes.is_empty() {
            return bad("sweep needs at least one problem size".into());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("problem sizes must be strictly ascending: {:?}", self.sizes));
        }
        for &n in &self.sizes {
            DomainSpec::new(self.domain, n)?;
        }
        if self.trials.is_empty() {
            return bad("sweep needs at least one criterion".into());
        }
        for (i, t) in self.trials.iter().enumerate() {
            t.criterion.validate()?;
            if t.loss == LossKind::TrueL {
                return Err(Error::NondifferentiableLoss(t.loss.name()));
            }
            if self.trials[..i].iter().any(|u| u.criterion.label() == t.criterion.label() && u.loss == t.loss) {
                return bad(format!("duplicate criterion {}", t.criterion));
            }
        }
        if self.train_count == 0 || self.test_count == 0 {
            return bad("dataset sizes must be >= 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be >= 1".into());
        }
        if self.size_lo == 0 || self.size_lo > self.size_cap {
            return bad(format!("bad size range [{}, {}]", self.size_lo, self.size_cap));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be >= 1".into());
        }
        Ok(())
    }

    /// `key=value` lines describing everything that affects the results.
    pub fn manifest(&self) -> String {
        let mut m = String::new();
        let sizes: Vec<String> = self.sizes.iter().map(ToString::to_string).collect();
        let trials: Vec<String> = self
            .trials
            .iter()
            .map(|t| format!("{}/c={}/{}/epochs={}", t.loss, t.c_value(), t.criterion, t.criterion.max_epochs))
            .collect();
        let _ = writeln!(m, "domain={}", self.domain);
        let _ = writeln!(m, "sizes={}", sizes.join(","));
        let _ = writeln!(m, "arch={}", self.arch.name());
        let _ = writeln!(m, "trials={}", trials.join(","));
        let _ = writeln!(m, "train_count={}", self.train_count);
        let _ = writeln!(m, "test_count={}", self.test_count);
        let _ = writeln!(m, "restarts={}", self.restarts);
        let _ = writeln!(m, "seed={}", self.seed);
        let _ = writeln!(m, "size_lo={}", self.size_lo);
        let _ = writeln!(m, "size_cap={}", self.size_cap);
        let _ = writeln!(m, "confirm={}", self.confirm);
        let _ = writeln!(m, "learning_rate={}", self.learning_rate);
        let _ = writeln!(
            m,
            "batch_size={}",
            self.batch_size.map_or("auto".into(), |b| b.to_string())
        );
        let _ = writeln!(
            m,
            "max_walk={}",
            self.gen.max_walk.map_or("2n".into(), |w| w.to_string())
        );
        let _ = writeln!(m, "held_karp_cap={}", self.gen.held_karp_cap);
        let _ = writeln!(m, "stop_at_first_fit={}", self.stop_at_first_fit);
        m
    }
}

/// Progress notifications. [`Progress::line`] renders them as
/// tab-separated fields.
#[derive(Debug, Clone, Copy)]
pub enum Progress<'a> {
    Dataset {
        n: usize,
        train: usize,
        test: usize,
        seconds: f64,
    },
    Probe {
        n: usize,
        criterion: &'a FitCriterion,
        outcome: &'a FitOutcome,
        params: usize,
    },
    Record {
        record: &'a ResultRecord,
        seconds: f64,
    },
    Skipped {
        n: usize,
        criterion: &'a FitCriterion,
    },
}

impl Progress<'_> {
    pub fn line(&self) -> String {
        match *self {
            Progress::Dataset { n, train, test, seconds } => {
                format!("data\tn={n}\ttrain={train}\ttest={test}\tseconds={seconds:.2}")
            }
            Progress::Probe {
                n,
                criterion,
                outcome,
                params,
            } => format!(
                "probe\tn={n}\tcriterion={criterion}\tunits={}\tparams={params}\tfit={}\tmetric={}\trestarts={}",
                outcome.units,
                u8::from(outcome.fits),
                outcome.best_metric,
                outcome.restarts.len()
            ),
            Progress::Record { record, seconds } => format!(
                "record\tn={}\tcriterion={}\tstatus={}\tunits={}\tparams={}\ttest_error={}\tseconds={seconds:.2}",
                record.n,
                record.criterion,
                record.status.name(),
                record.min_units.map_or(String::new(), |v| v.to_string()),
                record.param_count.map_or(String::new(), |v| v.to_string()),
                record.test_error.map_or(String::new(), |v| v.to_string()),
            ),
            Progress::Skipped { n, criterion } => format!("skip\tn={n}\tcriterion={criterion}"),
        }
    }
}

pub type ProgressFn<'a> = &'a (dyn Fn(Progress<'_>) + Sync);

/// Loads a cached dataset or generates (and caches) it.
pub fn load_or_generate(
    spec: DomainSpec,
    count: usize,
    seed: u64,
    gen: &GenOptions,
    cache: Option<&std::path::Path>,
) -> Result<Dataset> {
    let Some(dir) = cache else {
        return gen_dataset(spec, count, seed, gen);
    };
    let walk = match spec.kind {
        DomainKind::Pancake => format!("_w{}", gen.max_walk.unwrap_or(2 * spec.n)),
        _ => String::new(),
    };
    let path = dir.join(format!("{}_n{}{walk}_{count}_{seed:016x}.hslb", spec.kind, spec.n));
    if path.exists() {
        if let Ok(ds) = datasets::load(&path) {
            if ds.meta.spec() == spec && ds.meta.count == count && ds.meta.seed == seed {
                return Ok(ds);
            }
        }
    }
    let ds = gen_dataset(spec, count, seed, gen)?;
    std::fs::create_dir_all(dir)?;
    datasets::save(&ds, &path)?;
    Ok(ds)
}

/// Runs the minimal-size search for every problem size and trial,
/// appending one record per (size, trial) to the store. Pairs already in
/// the store are skipped. Errors for one size become `error` records.
pub fn run_scaling_sweep(
    config: &SweepConfig,
    store: &mut ResultsStore,
    progress: ProgressFn<'_>,
) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let store = Mutex::new(store);
    let written = Mutex::new(Vec::new());
    let run = |n: usize| run_size(config, n, &store, &written, progress);
    if config.parallel {
        config.sizes.par_iter().try_for_each(|&n| run(n))?;
    } else {
        for &n in &config.sizes {
            run(n)?;
        }
    }
    Ok(written.into_inner().expect("results lock"))
}

/// One sweep per threshold over shared datasets and seeds.
pub fn run_threshold_sweep(
    config: &SweepConfig,
    thresholds: &[f64],
    store: &mut ResultsStore,
    progress: ProgressFn<'_>,
) -> Result<Vec<ResultRecord>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument("threshold list is empty".into()));
    }
    let config = config.clone().with_thresholds(thresholds)?;
    run_scaling_sweep(&config, store, progress)
}

fn key_for(config: &SweepConfig, n: usize, trial: &Trial) -> super::record::RecordKey {
    super::record::RecordKey {
        domain: config.domain.name().into(),
        n,
        arch: config.arch.name().into(),
        criterion: trial.criterion.label(),
        loss: trial.loss.name().into(),
        c: trial.c_value().to_string(),
    }
}

fn run_size(
    config: &SweepConfig,
    n: usize,
    store: &Mutex<&mut ResultsStore>,
    written: &Mutex<Vec<ResultRecord>>,
    progress: ProgressFn<'_>,
) -> Result<()> {
    let pending: Vec<&Trial> = {
        let store = store.lock().expect("results lock");
        config
            .trials
            .iter()
            .filter(|t| {
                let done = store.contains(&key_for(config, n, t));
                if done {
                    progress(Progress::Skipped { n, criterion: &t.criterion });
                }
                !done
            })
            .collect()
    };
    if pending.is_empty() {
        return Ok(());
    }
    let emit = |record: ResultRecord, seconds: f64| -> Result<()> {
        store.lock().expect("results lock").append(&record)?;
        progress(Progress::Record {
            record: &record,
            seconds,
        });
        written.lock().expect("results lock").push(record);
        Ok(())
    };

    let started = Instant::now();
    let spec = DomainSpec::new(config.domain, n)?;
    let data = (|| {
        let cache = config.data_dir.as_deref();
        let train = load_or_generate(
            spec,
            config.train_count,
            derive_seed(config.seed, &[n as u64, TRAIN_STREAM]),
            &config.gen,
            cache,
        )?;
        let test = load_or_generate(
            spec,
            config.test_count,
            derive_seed(config.seed, &[n as u64, TEST_STREAM]),
            &config.gen,
            cache,
        )?;
        Ok::<_, Error>((train, test))
    })();
    let (train, test) = match data {
        Ok(d) => d,
        Err(e) => {
            for trial in pending {
                let mut r = blank_record(config, spec, trial);
                r.status = RecordStatus::Error;
                r.message = format!("dataset: {e}");
                emit(r, started.elapsed().as_secs_f64())?;
            }
            return Ok(());
        }
    };
    progress(Progress::Dataset {
        n,
        train: train.len(),
        test: test.len(),
        seconds: started.elapsed().as_secs_f64(),
    });

    for trial in pending {
        let started = Instant::now();
        let record = match run_trial(config, spec, trial, &train, &test, progress) {
            Ok(r) => r,
            Err(e) => {
                let mut r = blank_record(config, spec, trial);
                r.status = RecordStatus::Error;
                r.message = e.to_string();
                r
            }
        };
        emit(record, started.elapsed().as_secs_f64())?;
    }
    Ok(())
}

fn blank_record(config: &SweepConfig, spec: DomainSpec, trial: &Trial) -> ResultRecord {
    ResultRecord {
        domain: spec.kind,
        n: spec.n,
        arch: config.arch,
        criterion: trial.criterion.label(),
        threshold: trial.criterion.threshold_value(),
        loss: trial.loss,
        c: trial.c_value(),
        epsilon: spec.epsilon(),
        status: RecordStatus::Ok,
        min_units: None,
        param_count: None,
        best_train_metric: None,
        best_train_loss: None,
        test_metric: test_metric_for(&trial.criterion),
        test_error: None,
        restarts: config.restarts,
        master_seed: config.seed,
        winning_seed: None,
        train_count: config.train_count,
        test_count: config.test_count,
        zero_labels_removed: 0,
        approximate: true,
        non_monotone: false,
        probes: String::new(),
        message: String::new(),
    }
}

fn run_trial(
    config: &SweepConfig,
    spec: DomainSpec,
    trial: &Trial,
    train: &Dataset,
    test: &Dataset,
    progress: ProgressFn<'_>,
) -> Result<ResultRecord> {
    let mut record = blank_record(config, spec, trial);
    let eps = spec.epsilon();
    let classes = (train.max_label().max(test.max_label()) / eps).round() as usize + 1;
    let loss = trial.loss_config(eps, classes);
    loss.validate()?;

    let filtered;
    let train = if trial.loss == LossKind::Scaled {
        let (kept, removed) = train.without_zero_labels();
        record.zero_labels_removed = removed;
        if kept.is_empty() {
            return Err(Error::ZeroLabel);
        }
        filtered = kept;
        &filtered
    } else {
        train
    };

    let mut ctx = FitContext::new(
        config.arch,
        train.feature_matrix(),
        train.labels().to_vec(),
        loss,
        trial.criterion,
        derive_seed(config.seed, &[spec.n as u64, FIT_STREAM]),
    );
    ctx.restarts = config.restarts;
    ctx.learning_rate = config.learning_rate;
    if let Some(b) = config.batch_size {
        ctx.batch_size = b;
    }
    ctx.stop_at_first_fit = config.stop_at_first_fit;
    ctx.parallel = config.parallel;

    let mut best: Option<FitOutcome> = None;
    let mut at_cap: Option<FitOutcome> = None;
    let mut probes: Vec<(usize, bool)> = Vec::new();
    let search = find_min_size(config.size_lo, config.size_cap, config.confirm, |units| {
        let outcome = fits(units, &ctx)?;
        progress(Progress::Probe {
            n: spec.n,
            criterion: &trial.criterion,
            outcome: &outcome,
            params: ctx.architecture(units)?.param_count(),
        });
        probes.push((units, outcome.fits));
        let verdict = outcome.fits;
        if verdict && best.as_ref().is_none_or(|b| units < b.units) {
            best = Some(outcome);
        } else if units == config.size_cap {
            at_cap = Some(outcome);
        }
        Ok(verdict)
    });

    match search {
        Ok(found) => {
            let best = best.expect("a fitting probe exists");
            debug_assert_eq!(best.units, found.min_size);
            let arch = ctx.architecture(found.min_size)?;
            let model = best.model.as_ref().expect("fitting restarts keep their model");
            record.min_units = Some(found.min_size);
            record.param_count = Some(arch.param_count());
            record.best_train_metric = Some(best.best_metric);
            record.best_train_loss = Some(best.best_loss);
            record.winning_seed = Some(best.best_seed);
            record.non_monotone = found.non_monotone;
            record.probes = found.probe_string();
            record.test_error = Some(test_error(
                model,
                test.feature_matrix().view(),
                test.labels(),
                &loss,
                record.test_metric,
            )?);
        }
        Err(Error::NoFit { cap }) => {
            record.status = RecordStatus::NoFit;
            record.min_units = Some(cap);
            record.param_count = Some(ctx.architecture(cap)?.param_count());
            if let Some(o) = at_cap {
                if o.best_metric.is_finite() {
                    record.best_train_metric = Some(o.best_metric);
                }
                if o.best_loss.is_finite() {
                    record.best_train_loss = Some(o.best_loss);
                }
            }
            record.probes = probes
                .iter()
                .map(|&(s, ok)| format!("{s}:{}", u8::from(ok)))
                .collect::<Vec<_>>()
                .join(";");
            record.message = format!("no fit up to {cap} units");
        }
        Err(e) => return Err(e),
    }
    Ok(record)
}
