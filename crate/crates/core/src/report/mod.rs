//! Charts and tidy CSVs from a results file, plus the loss-curve table.

pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::{RecordStatus, ResultRecord};
use crate::losses::l_eps_point;
pub use svg::{Chart, ChartPoint, Series};

/// One plotted point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub domain: String,
    pub series: String,
    pub n: usize,
    pub status: RecordStatus,
    pub param_count: usize,
    pub test_metric: String,
    pub test_error: Option<f64>,
}

fn series_label(r: &ResultRecord) -> String {
    let loss = if r.c != 0.0 {
        format!("{}(c={})", r.loss, r.c)
    } else {
        r.loss.to_string()
    };
    format!("{} {} {}", r.arch.name(), r.criterion, loss)
}

/// Plottable points grouped by domain. Error records are skipped; no-fit
/// records keep the cap's parameter count.
pub fn plot_points(records: &[ResultRecord]) -> BTreeMap<String, Vec<PlotPoint>> {
    let mut by_domain: BTreeMap<String, Vec<PlotPoint>> = BTreeMap::new();
    for r in records {
        if r.status == RecordStatus::Error {
            continue;
        }
        let Some(param_count) = r.param_count else { continue };
        by_domain.entry(r.domain.name().to_string()).or_default().push(PlotPoint {
            domain: r.domain.name().into(),
            series: series_label(r),
            n: r.n,
            status: r.status,
            param_count,
            test_metric: r.test_metric.name().into(),
            test_error: r.test_error,
        });
    }
    for points in by_domain.values_mut() {
        points.sort_by(|a, b| a.series.cmp(&b.series).then(a.n.cmp(&b.n)));
        // A resumed store could hold the same point twice; keep the first.
        points.dedup_by(|b, a| a.series == b.series && a.n == b.n);
    }
    by_domain
}

pub fn domain_chart(domain: &str, points: &[PlotPoint]) -> Chart {
    let mut grouped: BTreeMap<&str, Vec<&PlotPoint>> = BTreeMap::new();
    for p in points {
        grouped.entry(&p.series).or_default().push(p);
    }
    let metrics: Vec<&str> = {
        let mut m: Vec<&str> = points.iter().map(|p| p.test_metric.as_str()).collect();
        m.sort_unstable();
        m.dedup();
        m
    };
    let series = grouped
        .into_iter()
        .map(|(label, pts)| Series {
            label: label.to_string(),
            params: pts
                .iter()
                .map(|p| ChartPoint {
                    x: p.n as f64,
                    y: p.param_count as f64,
                    open: p.status == RecordStatus::NoFit,
                })
                .collect(),
            error: pts
                .iter()
                .filter_map(|p| {
                    p.test_error.map(|e| ChartPoint {
                        x: p.n as f64,
                        y: e,
                        open: false,
                    })
                })
                .collect(),
        })
        .collect();
    Chart {
        title: format!("{domain}: minimal parameters to fit"),
        x_label: "problem size".into(),
        left_label: "parameters (log10)".into(),
        right_label: if metrics.is_empty() {
            "test error".into()
        } else {
            format!("test error ({})", metrics.join(", "))
        },
        series,
    }
}

pub fn points_csv(by_domain: &BTreeMap<String, Vec<PlotPoint>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["domain", "series", "n", "status", "param_count", "log10_params", "test_metric", "test_error"])?;
    for p in by_domain.values().flatten() {
        w.write_record([
            p.domain.clone(),
            p.series.clone(),
            p.n.to_string(),
            p.status.name().to_string(),
            p.param_count.to_string(),
            format!("{:.6}", (p.param_count as f64).log10()),
            p.test_metric.clone(),
            p.test_error.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?).expect("utf-8"))
}

/// Step between loss-curve samples as a fraction of ε.
pub const CURVE_STEPS_PER_EPSILON: i64 = 20;

/// Rows `x, l, l_eps(c)...` for x in [-3ε, 3ε]. The true loss is the
/// indicator |x| ≥ ε/2.
pub fn loss_curves(epsilon: f64, c_values: &[f64]) -> Vec<(f64, f64, Vec<f64>)> {
    let half = 3 * CURVE_STEPS_PER_EPSILON;
    (-half..=half)
        .map(|i| {
            let x = i as f64 * epsilon / CURVE_STEPS_PER_EPSILON as f64;
            let l = if x.abs() < epsilon / 2.0 { 0.0 } else { 1.0 };
            let ls = c_values.iter().map(|&c| l_eps_point(x, epsilon, c)).collect();
            (x, l, ls)
        })
        .collect()
}

pub fn loss_curves_csv(epsilon: f64, c_values: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string(), "l".to_string()];
    header.extend(c_values.iter().map(|c| format!("l_eps_c{c}")));
    w.write_record(&header)?;
    for (x, l, ls) in loss_curves(epsilon, c_values) {
        let mut row = vec![x.to_string(), l.to_string()];
        row.extend(ls.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?).expect("utf-8"))
}

pub fn loss_curves_chart(epsilon: f64, c_values: &[f64]) -> String {
    // Reuses the chart's linear right axis by plotting on `error`.
    let rows = loss_curves(epsilon, c_values);
    let mut series = vec![Series {
        label: "l (true loss)".into(),
        params: vec![],
        error: rows.iter().map(|(x, l, _)| ChartPoint { x: *x, y: *l, open: false }).collect(),
    }];
    for (j, c) in c_values.iter().enumerate() {
        series.push(Series {
            label: format!("l_eps c={c}"),
            params: vec![],
            error: rows.iter().map(|(x, _, ls)| ChartPoint { x: *x, y: ls[j], open: false }).collect(),
        });
    }
    Chart {
        title: format!("losses at epsilon = {epsilon}"),
        x_label: "error x".into(),
        left_label: String::new(),
        right_label: "loss".into(),
        series,
    }
    .render()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub charts: Vec<PathBuf>,
    pub points: PathBuf,
    pub loss_curves: PathBuf,
    pub loss_chart: PathBuf,
}

/// Writes `<domain>.svg` per domain (or an empty `results.svg`),
/// `points.csv`, `loss_curves.csv` and `loss_curves.svg` into `out_dir`.
pub fn write_report(records: &[ResultRecord], out_dir: &Path, epsilon: f64, c_values: &[f64]) -> Result<ReportFiles> {
    fs::create_dir_all(out_dir)?;
    let by_domain = plot_points(records);
    let mut charts = Vec::new();
    if by_domain.is_empty() {
        let path = out_dir.join("results.svg");
        fs::write(&path, domain_chart("no results", &[]).render())?;
        charts.push(path);
    }
    for (domain, points) in &by_domain {
        let path = out_dir.join(format!("{domain}.svg"));
        fs::write(&path, domain_chart(domain, points).render())?;
        charts.push(path);
    }
    let points = out_dir.join("points.csv");
    fs::write(&points, points_csv(&by_domain)?)?;
    let loss_curves = out_dir.join("loss_curves.csv");
    fs::write(&loss_curves, loss_curves_csv(epsilon, c_values)?)?;
    let loss_chart = out_dir.join("loss_curves.svg");
    fs::write(&loss_chart, loss_curves_chart(epsilon, c_values))?;
    Ok(ReportFiles {
        charts,
        points,
        loss_curves,
        loss_chart,
    })
}
