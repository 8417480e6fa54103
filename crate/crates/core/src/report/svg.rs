//! A minimal dual-axis line chart written straight to SVG text. Every
//! number is printed with fixed precision so identical input gives
//! identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 110.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
    /// Drawn as an open marker (no fit within the search cap).
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Plotted against the left axis in log10.
    pub params: Vec<ChartPoint>,
    /// Plotted against the right axis, dashed.
    pub error: Vec<ChartPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub left_label: String,
    pub right_label: String,
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        if self.hi == self.lo {
            return (self.a + self.b) / 2.0;
        }
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }
}

fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if v <= m * mag + 1e-12 {
            return m * mag;
        }
    }
    10.0 * mag
}

impl Chart {
    pub fn render(&self) -> String {
        let xs: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.params.iter().chain(&s.error).map(|p| p.x))
            .collect();
        let (x_lo, x_hi) = if xs.is_empty() {
            (0.0, 1.0)
        } else {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi { (lo - 1.0, hi + 1.0) } else { (lo, hi) }
        };
        let logs: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.params.iter().map(|p| p.y.max(1.0).log10()))
            .collect();
        let (l_lo, l_hi) = if logs.is_empty() {
            (0.0, 1.0)
        } else {
            let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
            let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
            if lo == hi { (lo, lo + 1.0) } else { (lo, hi) }
        };
        let e_max = self
            .series
            .iter()
            .flat_map(|s| s.error.iter().map(|p| p.y))
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let e_hi = if e_max <= 1.0 { 1.0 } else { nice_ceiling(e_max) };

        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = Scale { lo: x_lo, hi: x_hi, a: LEFT, b: LEFT + plot_w };
        let sl = Scale { lo: l_lo, hi: l_hi, a: TOP + plot_h, b: TOP };
        let se = Scale { lo: 0.0, hi: e_hi, a: TOP + plot_h, b: TOP };

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );

        // Log gridlines: major at powers of ten, minor at 2..9 times them.
        let mut k = l_lo as i64;
        while k as f64 <= l_hi {
            let y = sl.map(k as f64);
            let _ = writeln!(
                o,
                r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#bbbbbb" stroke-width="1"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#,
                LEFT - 6.0,
                y + 4.0
            );
            for m in 2..10 {
                let v = k as f64 + (m as f64).log10();
                if v < l_hi {
                    let y = sl.map(v);
                    let _ = writeln!(
                        o,
                        r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eeeeee" stroke-width="1"/>"##,
                        LEFT + plot_w
                    );
                }
            }
            k += 1;
        }
        for i in 0..=4 {
            let v = e_hi * i as f64 / 4.0;
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                LEFT + plot_w + 6.0,
                se.map(v) + 4.0,
                trim(v)
            );
        }
        let x_ticks: Vec<f64> = if x_hi - x_lo <= 20.0 && x_lo.fract() == 0.0 {
            (x_lo as i64..=x_hi as i64).map(|v| v as f64).collect()
        } else {
            (0..=5).map(|i| x_lo + (x_hi - x_lo) * i as f64 / 5.0).collect()
        };
        for v in x_ticks {
            let x = sx.map(v);
            let _ = writeln!(
                o,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + plot_h + 18.0,
                trim(v)
            );
        }
        let _ = writeln!(
            o,
            r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            TOP + plot_h + 38.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + plot_h / 2.0,
            esc(&self.left_label)
        );
        let _ = writeln!(
            o,
            r#"<text transform="translate({:.2},{:.2}) rotate(90)" text-anchor="middle">{}</text>"#,
            WIDTH - 14.0,
            TOP + plot_h / 2.0,
            esc(&self.right_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path = |pts: &[ChartPoint], scale: &Scale, log: bool| {
                pts.iter()
                    .map(|p| {
                        let y = if log { p.y.max(1.0).log10() } else { p.y };
                        format!("{:.2},{:.2}", sx.map(p.x), scale.map(y))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            if s.params.len() > 1 {
                let _ = writeln!(
                    o,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    path(&s.params, &sl, true)
                );
            }
            for p in &s.params {
                let fill = if p.open { "white" } else { color };
                let _ = writeln!(
                    o,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#,
                    sx.map(p.x),
                    sl.map(p.y.max(1.0).log10())
                );
            }
            if s.error.len() > 1 {
                let _ = writeln!(
                    o,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="5,4"/>"#,
                    path(&s.error, &se, false)
                );
            }
            for p in &s.error {
                let _ = writeln!(
                    o,
                    r#"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="{color}"/>"#,
                    sx.map(p.x) - 3.0,
                    se.map(p.y) - 3.0
                );
            }
            let ly = TOP + plot_h + 58.0 + 16.0 * (i / 2) as f64;
            let lx = LEFT + (i % 2) as f64 * plot_w / 2.0;
            let _ = writeln!(
                o,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                esc(&s.label)
            );
        }
        o.push_str("</svg>\n");
        o
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
