use std::collections::BTreeSet;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::neuralnet::ArchKind;

pub const RESULTS_SCHEMA: &str = "# hstar-results schema=1";

pub const RESULTS_COLUMNS: [&str; 25] = [
    "domain",
    "n",
    "arch",
    "criterion",
    "threshold",
    "loss",
    "c",
    "epsilon",
    "status",
    "min_units",
    "param_count",
    "best_train_metric",
    "best_train_loss",
    "test_metric",
    "test_error",
    "restarts",
    "master_seed",
    "winning_seed",
    "train_count",
    "test_count",
    "zero_labels_removed",
    "approximate",
    "non_monotone",
    "probes",
    "message",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordStatus {
    Ok,
    /// The size cap was reached without a fit; `min_units` holds the cap.
    NoFit,
    Error,
}

impl RecordStatus {
    pub fn name(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::NoFit => "no_fit",
            RecordStatus::Error => "error",
        }
    }
}

impl FromStr for RecordStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RecordStatus::Ok),
            "no_fit" => Ok(RecordStatus::NoFit),
            "error" => Ok(RecordStatus::Error),
            _ => Err(Error::Format(format!("unknown record status `{s}`"))),
        }
    }
}

/// One row of the results store: the outcome of a minimal-size search for
/// one problem size.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub domain: DomainKind,
    pub n: usize,
    pub arch: ArchKind,
    /// Criterion label, e.g. `exact` or `mse@0.2`.
    pub criterion: String,
    pub threshold: Option<f64>,
    pub loss: LossKind,
    pub c: f64,
    pub epsilon: f64,
    pub status: RecordStatus,
    pub min_units: Option<usize>,
    pub param_count: Option<usize>,
    pub best_train_metric: Option<f64>,
    pub best_train_loss: Option<f64>,
    pub test_metric: LossKind,
    pub test_error: Option<f64>,
    pub restarts: usize,
    pub master_seed: u64,
    pub winning_seed: Option<u64>,
    pub train_count: usize,
    pub test_count: usize,
    pub zero_labels_removed: usize,
    pub approximate: bool,
    pub non_monotone: bool,
    pub probes: String,
    pub message: String,
}

/// Identity of a record for resuming.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordKey {
    pub domain: String,
    pub n: usize,
    pub arch: String,
    pub criterion: String,
    pub loss: String,
    pub c: String,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn parse<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("bad value `{value}` in column `{field}`")))
}

fn parse_opt<T: FromStr>(field: &str, value: &str) -> Result<Option<T>> {
    if value.is_empty() {
        Ok(None)
    } else {
        parse(field, value).map(Some)
    }
}

impl ResultRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            domain: self.domain.name().into(),
            n: self.n,
            arch: self.arch.name().into(),
            criterion: self.criterion.clone(),
            loss: self.loss.name().into(),
            c: self.c.to_string(),
        }
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.domain.name().into(),
            self.n.to_string(),
            self.arch.name().into(),
            self.criterion.clone(),
            opt(&self.threshold),
            self.loss.name().into(),
            self.c.to_string(),
            self.epsilon.to_string(),
            self.status.name().into(),
            opt(&self.min_units),
            opt(&self.param_count),
            opt(&self.best_train_metric),
            opt(&self.best_train_loss),
            self.test_metric.name().into(),
            opt(&self.test_error),
            self.restarts.to_string(),
            self.master_seed.to_string(),
            opt(&self.winning_seed),
            self.train_count.to_string(),
            self.test_count.to_string(),
            self.zero_labels_removed.to_string(),
            self.approximate.to_string(),
            self.non_monotone.to_string(),
            self.probes.clone(),
            self.message.clone(),
        ]
    }

    pub fn from_fields(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != RESULTS_COLUMNS.len() {
            return Err(Error::Format(format!(
                "results row has {} fields, expected {}",
                row.len(),
                RESULTS_COLUMNS.len()
            )));
        }
        let f = |i: usize| &row[i];
        let c = |i: usize| RESULTS_COLUMNS[i];
        Ok(ResultRecord {
            domain: parse(c(0), f(0))?,
            n: parse(c(1), f(1))?,
            arch: parse(c(2), f(2))?,
            criterion: f(3).to_string(),
            threshold: parse_opt(c(4), f(4))?,
            loss: parse(c(5), f(5))?,
            c: parse(c(6), f(6))?,
            epsilon: parse(c(7), f(7))?,
            status: f(8).parse()?,
            min_units: parse_opt(c(9), f(9))?,
            param_count: parse_opt(c(10), f(10))?,
            best_train_metric: parse_opt(c(11), f(11))?,
            best_train_loss: parse_opt(c(12), f(12))?,
            test_metric: parse(c(13), f(13))?,
            test_error: parse_opt(c(14), f(14))?,
            restarts: parse(c(15), f(15))?,
            master_seed: parse(c(16), f(16))?,
            winning_seed: parse_opt(c(17), f(17))?,
            train_count: parse(c(18), f(18))?,
            test_count: parse(c(19), f(19))?,
            zero_labels_removed: parse(c(20), f(20))?,
            approximate: parse(c(21), f(21))?,
            non_monotone: parse(c(22), f(22))?,
            probes: f(23).to_string(),
            message: f(24).to_string(),
        })
    }
}

/// Reads a results CSV (schema comment, header, rows).
pub fn read_results<R: BufRead>(input: R) -> Result<Vec<ResultRecord>> {
    let mut lines = input.lines();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(first) => {
            let first = first?;
            if first.trim_end() != RESULTS_SCHEMA {
                return Err(Error::Format(format!("unsupported results schema line `{first}`")));
            }
        }
    }
    let rest: String = lines.map(|l| l.map(|l| l + "\n")).collect::<std::io::Result<_>>()?;
    let csv_err = |e: csv::Error| Error::Format(format!("malformed results CSV: {e}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(rest.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(RESULTS_COLUMNS.iter().copied()) {
        return Err(Error::Format("results header does not match schema 1".into()));
    }
    reader
        .records()
        .map(|row| ResultRecord::from_fields(&row.map_err(csv_err)?))
        .collect()
}

pub fn read_results_file(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    read_results(BufReader::new(File::open(path)?))
}

/// Append-only results CSV with a manifest next to it.
#[derive(Debug)]
pub struct ResultsStore {
    path: PathBuf,
    done: BTreeSet<RecordKey>,
}

impl ResultsStore {
    pub const RESULTS_FILE: &'static str = "results.csv";
    pub const MANIFEST_FILE: &'static str = "manifest.txt";

    /// Opens (or creates) `dir/results.csv`. If a manifest exists it must
    /// match `manifest` exactly, so a resumed run cannot silently mix
    /// configurations.
    pub fn open(dir: impl AsRef<Path>, manifest: &str) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let manifest_path = dir.join(Self::MANIFEST_FILE);
        if manifest_path.exists() {
            let existing = fs::read_to_string(&manifest_path)?;
            if existing != manifest {
                return Err(Error::Config(format!(
                    "{} holds results for a different configuration; use another output directory",
                    dir.display()
                )));
            }
        } else {
            fs::write(&manifest_path, manifest)?;
        }
        let path = dir.join(Self::RESULTS_FILE);
        let mut done = BTreeSet::new();
        if path.exists() && fs::metadata(&path)?.len() > 0 {
            for r in read_results_file(&path)? {
                done.insert(r.key());
            }
        } else {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(RESULTS_COLUMNS)?;
            let header = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            let mut file = File::create(&path)?;
            writeln!(file, "{RESULTS_SCHEMA}")?;
            file.write_all(&header)?;
            file.sync_data()?;
        }
        Ok(ResultsStore { path, done })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.done.contains(key)
    }

    pub fn append(&mut self, record: &ResultRecord) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(record.fields())?;
        let row = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let mut file = OpenOptions::new().append(true).open(&self.path)?;
        file.write_all(&row)?;
        file.sync_data()?;
        self.done.insert(record.key());
        Ok(())
    }

    pub fn records(&self) -> Result<Vec<ResultRecord>> {
        read_results_file(&self.path)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_record(n: usize) -> ResultRecord {
        ResultRecord {
            domain: DomainKind::Pancake,
            n,
            arch: ArchKind::FixedDepth,
            criterion: "mse@0.2".into(),
            threshold: Some(0.2),
            loss: LossKind::Mse,
            c: 0.0,
            epsilon: 1.0,
            status: RecordStatus::Ok,
            min_units: Some(12),
            param_count: Some(12 * (n * n + 2) + 1),
            best_train_metric: Some(0.1875),
            best_train_loss: Some(0.19),
            test_metric: LossKind::Mse,
            test_error: Some(0.25),
            restarts: 3,
            master_seed: 42,
            winning_seed: Some(u64::MAX),
            train_count: 3000,
            test_count: 10_000,
            zero_labels_removed: 0,
            approximate: true,
            non_monotone: false,
            probes: "1:0;2:1".into(),
            message: "a, \"quoted\" note".into(),
        }
    }

    #[test]
    fn roundtrip_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultsStore::open(dir.path(), "seed=1\n").unwrap();
        let a = sample_record(5);
        let mut b = sample_record(6);
        b.status = RecordStatus::NoFit;
        b.best_train_metric = None;
        b.winning_seed = None;
        store.append(&a).unwrap();
        store.append(&b).unwrap();
        assert_eq!(store.records().unwrap(), vec![a.clone(), b.clone()]);

        let reopened = ResultsStore::open(dir.path(), "seed=1\n").unwrap();
        assert!(reopened.contains(&a.key()));
        assert!(reopened.contains(&b.key()));
        assert!(!reopened.contains(&sample_record(7).key()));
        assert!(matches!(ResultsStore::open(dir.path(), "seed=2\n"), Err(Error::Config(_))));

        let text = fs::read_to_string(reopened.path()).unwrap();
        assert!(text.starts_with("# hstar-results schema=1\ndomain,n,arch,"));
    }

    #[test]
    fn malformed_rows_are_format_errors() {
        let bad = format!("{RESULTS_SCHEMA}\n{}\npancake,x\n", RESULTS_COLUMNS.join(","));
        assert!(matches!(read_results(bad.as_bytes()), Err(Error::Format(_))));
        assert!(matches!(read_results("nonsense\n".as_bytes()), Err(Error::Format(_))));
        assert_eq!(read_results("".as_bytes()).unwrap(), vec![]);
    }
}
