//! `hstar`: generate datasets, run scaling sweeps, draw reports and verify
//! the exact oracles.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hstar_core::config::{Command as Cmd, RunConfig, Settings};
use hstar_core::datasets::{gen_dataset, save, write_csv};
use hstar_core::experiment::{read_results_file, run_scaling_sweep, Progress, RecordStatus, ResultsStore};
use hstar_core::report::write_report;
use hstar_core::verify::{run_verify, VerifyOptions};
use hstar_core::DomainSpec;

#[derive(Debug, Parser)]
#[command(name = "hstar", version, about = "Minimal network size needed to fit optimal heuristics")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// desk or paper.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// File of key=value lines; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled dataset.
    GenData(GenDataArgs),
    /// Find the minimal fitting network for each problem size.
    Sweep(Box<SweepArgs>),
    /// Draw charts and loss curves from a results CSV.
    Report(ReportArgs),
    /// Cross-check the exact oracles against slow solvers.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// pancake, tsp or bw.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    /// Longest pancake random walk (default 2n).
    #[arg(long)]
    max_walk: Option<usize>,
    /// Also write a CSV export.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    domain: Option<String>,
    /// Problem sizes: `4..7`, `4,6` or a single size.
    #[arg(long)]
    sizes: Option<String>,
    /// A single problem size.
    #[arg(long)]
    n: Option<usize>,
    /// fixed-depth or fixed-width.
    #[arg(long)]
    arch: Option<String>,
    /// l_eps, mse, scaled or cross_entropy.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sharpness of the ε-bounded loss.
    #[arg(long)]
    c: Option<f64>,
    /// exact or threshold.
    #[arg(long)]
    criterion: Option<String>,
    /// Comma-separated thresholds.
    #[arg(long)]
    threshold: Option<String>,
    /// fixed-depth-mse, fixed-width-mse or loss-comparison.
    #[arg(long)]
    threshold_set: Option<String>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Largest width (fixed depth) or depth (fixed width) searched.
    #[arg(long)]
    size_cap: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_walk: Option<usize>,
    /// Run sizes and restarts in parallel.
    #[arg(long)]
    parallel: bool,
    /// Run every restart even after one fits.
    #[arg(long)]
    exhaustive_restarts: bool,
    /// Cache generated datasets under <out>/data.
    #[arg(long)]
    cache_data: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Results CSV (default <out>/results.csv).
    #[arg(long)]
    results: Option<PathBuf>,
    /// ε for the loss-curve data.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated c values for the loss curves.
    #[arg(long)]
    c_values: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

struct Flags(Settings);

impl Flags {
    fn put(&mut self, key: &str, v: Option<impl Display>) -> Result<()> {
        if let Some(v) = v {
            self.0.set(key, v.to_string())?;
        }
        Ok(())
    }

    fn switch(&mut self, key: &str, on: bool) -> Result<()> {
        self.put(key, on.then_some("true"))
    }
}

impl Cli {
    /// Config file values overlaid with the command-line flags.
    fn settings(&self) -> Result<(Cmd, Settings)> {
        let mut f = Flags(Settings::new());
        f.put("seed", self.seed)?;
        f.put("profile", self.profile.as_ref())?;
        f.put("out", self.out.as_ref().map(|p| p.display()))?;
        let cmd = match &self.command {
            Command::GenData(a) => {
                f.put("domain", a.domain.as_ref())?;
                f.put("n", a.n)?;
                f.put("count", a.count)?;
                f.put("max-walk", a.max_walk)?;
                f.switch("csv", a.csv)?;
                Cmd::GenData
            }
            Command::Sweep(a) => {
                f.put("domain", a.domain.as_ref())?;
                f.put("sizes", a.sizes.as_ref())?;
                f.put("n", a.n)?;
                f.put("arch", a.arch.as_ref())?;
                f.put("loss", a.loss.as_ref())?;
                f.put("epsilon", a.epsilon)?;
                f.put("c", a.c)?;
                f.put("criterion", a.criterion.as_ref())?;
                f.put("threshold", a.threshold.as_ref())?;
                f.put("threshold-set", a.threshold_set.as_ref())?;
                f.put("train-count", a.train_count)?;
                f.put("test-count", a.test_count)?;
                f.put("restarts", a.restarts)?;
                f.put("max-epochs", a.max_epochs)?;
                f.put("size-cap", a.size_cap)?;
                f.put("lr", a.lr)?;
                f.put("batch-size", a.batch_size)?;
                f.put("max-walk", a.max_walk)?;
                f.switch("parallel", a.parallel)?;
                f.switch("exhaustive-restarts", a.exhaustive_restarts)?;
                f.switch("cache-data", a.cache_data)?;
                Cmd::Sweep
            }
            Command::Report(a) => {
                f.put("results", a.results.as_ref().map(|p| p.display()))?;
                f.put("epsilon", a.epsilon)?;
                f.put("c-values", a.c_values.as_ref())?;
                Cmd::Report
            }
            Command::Verify(a) => {
                f.put("domain", a.domain.as_ref())?;
                f.put("n", a.n)?;
                Cmd::Verify
            }
        };
        let base = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        Ok((cmd, base.overlay(&f.0)))
    }
}

fn gen_data(cfg: &RunConfig) -> Result<()> {
    let domain = cfg.domain.context("missing domain")?;
    let n = cfg.n.context("missing n")?;
    let count = cfg.count.context("missing count")?;
    let spec = DomainSpec::new(domain, n)?;
    let ds = gen_dataset(spec, count, cfg.seed, &cfg.gen_options())?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let stem = format!("{domain}_n{n}_{count}_seed{}", cfg.seed);
    let path = cfg.out.join(format!("{stem}.hslb"));
    save(&ds, &path)?;
    println!("wrote\t{}", path.display());
    if cfg.csv {
        let csv_path = cfg.out.join(format!("{stem}.csv"));
        let mut w = BufWriter::new(File::create(&csv_path)?);
        write_csv(&ds, &mut w)?;
        w.flush()?;
        println!("wrote\t{}", csv_path.display());
    }
    let labels = ds.labels();
    let min = labels.iter().copied().fold(f64::INFINITY, f64::min);
    let max = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = labels.iter().sum::<f64>() / labels.len() as f64;
    println!("summary\tcount={}\tlabel_min={min}\tlabel_mean={mean:.4}\tlabel_max={max}", ds.len());
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<bool> {
    let sweep = cfg.sweep_config()?;
    let mut store = ResultsStore::open(&cfg.out, &sweep.manifest())?;
    let progress = |p: Progress<'_>| {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", p.line());
        let _ = out.flush();
    };
    let written = run_scaling_sweep(&sweep, &mut store, &progress)?;
    println!("results\t{}\tnew_records={}", store.path().display(), written.len());
    Ok(written.iter().all(|r| r.status != RecordStatus::Error))
}

fn report(cfg: &RunConfig) -> Result<()> {
    let path = cfg.results_path();
    let records = if path.exists() || cfg.results.is_some() {
        read_results_file(&path).with_context(|| format!("reading {}", path.display()))?
    } else {
        Vec::new()
    };
    let files = write_report(&records, &cfg.out, cfg.curve_epsilon(), &cfg.curve_c_values())?;
    for chart in &files.charts {
        println!("wrote\t{}", chart.display());
    }
    for p in [&files.points, &files.loss_curves, &files.loss_chart] {
        println!("wrote\t{}", p.display());
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<bool> {
    let opts = VerifyOptions {
        domain: cfg.domain,
        n: cfg.n,
        seed: cfg.seed,
        ..VerifyOptions::default()
    };
    let report = run_verify(&opts)?;
    print!("{}", report.table());
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<bool> {
    let (cmd, settings) = cli.settings()?;
    let cfg = RunConfig::from_settings(cmd, &settings)?;
    match cmd {
        Cmd::GenData => gen_data(&cfg).map(|()| true),
        Cmd::Sweep => sweep(&cfg),
        Cmd::Report => report(&cfg).map(|()| true),
        Cmd::Verify => verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
