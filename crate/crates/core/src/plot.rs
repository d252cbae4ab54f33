//! Static SVG charts of experiment CSV files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::theta::{theta, LimitProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Tvprofile,
    CurvatureVsC,
    GiantVsC,
}

impl FromStr for PlotKind {
    type Err = PlotError;
    fn from_str(s: &str) -> Result<Self, PlotError> {
        match s {
            "tvprofile" => Ok(PlotKind::Tvprofile),
            "curvature_vs_c" => Ok(PlotKind::CurvatureVsC),
            "giant_vs_c" => Ok(PlotKind::GiantVsC),
            other => Err(PlotError::Schema(format!("unknown plot kind {other:?}"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Model(#[from] crate::Error),
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, PlotError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if headers.iter().all(String::is_empty) {
            return Err(PlotError::Schema("missing header row".into()));
        }
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_owned).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        if rows.is_empty() {
            return Err(PlotError::Empty);
        }
        Ok(Table { headers, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize, PlotError> {
        self.column(name)
            .ok_or_else(|| PlotError::Schema(format!("missing column {name:?}")))
    }

    fn numbers(&self, col: usize) -> Result<Vec<f64>, PlotError> {
        self.rows
            .iter()
            .map(|r| {
                let cell = r.get(col).map(String::as_str).unwrap_or("");
                match cell {
                    "true" => Ok(1.0),
                    "false" => Ok(0.0),
                    _ => cell
                        .parse::<f64>()
                        .map_err(|_| PlotError::Schema(format!("non-numeric value {cell:?} in column {}", self.headers[col]))),
                }
            })
            .collect()
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    /// Series drawn with one marker group per point.
    data: Vec<Series>,
    /// Curves drawn as lines only.
    overlays: Vec<Series>,
}

/// Means of `value` grouped by `key`, in increasing key order.
fn grouped_means(keys: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for (&k, &v) in keys.iter().zip(values) {
        let e = groups.entry(order_key(k)).or_insert((k, 0.0, 0));
        e.1 += v;
        e.2 += 1;
    }
    groups.into_values().map(|(k, s, m)| (k, s / m as f64)).collect()
}

fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if x.is_sign_negative() {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn build_chart(kind: PlotKind, table: &Table, profile: &LimitProfile) -> Result<Chart, PlotError> {
    match kind {
        PlotKind::Tvprofile => {
            let t = table.numbers(table.require("t")?)?;
            let coset = table.numbers(table.require("tv_coset")?)?;
            let pois = table.numbers(table.require("tv_poissonized")?)?;
            Ok(Chart {
                title: "Total variation distance to stationarity".into(),
                x_label: "t".into(),
                y_label: "TV".into(),
                data: vec![
                    Series {
                        label: "tv_coset".into(),
                        points: t.iter().copied().zip(coset).collect(),
                    },
                    Series {
                        label: "tv_poissonized".into(),
                        points: t.iter().copied().zip(pois).collect(),
                    },
                ],
                overlays: vec![],
            })
        }
        PlotKind::CurvatureVsC => {
            let c = table.numbers(table.require("c")?)?;
            let col = table
                .column("final_distance")
                .or_else(|| table.column("pair_increment"))
                .ok_or_else(|| PlotError::Schema("missing column \"final_distance\"".into()))?;
            let d = table.numbers(col)?;
            let points = grouped_means(&c, &d)
                .into_iter()
                .map(|(c, m)| (c, 1.0 - m / 2.0))
                .collect();
            Ok(Chart {
                title: "Curvature estimate".into(),
                x_label: "c".into(),
                y_label: "curvature".into(),
                data: vec![Series {
                    label: "estimate".into(),
                    points,
                }],
                overlays: vec![],
            })
        }
        PlotKind::GiantVsC => {
            let c = table.numbers(table.require("c")?)?;
            let frac = table.numbers(table.require("largest_frac")?)?;
            let points = grouped_means(&c, &frac);
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(c, _)| (lo.min(c), hi.max(c)));
            let (lo, hi) = if hi > lo { (lo, hi) } else { ((lo - 0.5).max(0.01), hi + 0.5) };
            let curve = (0..=200)
                .map(|i| {
                    let c = lo + (hi - lo) * i as f64 / 200.0;
                    theta(c, profile).map(|r| (c, r.theta))
                })
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(Chart {
                title: "Largest component fraction".into(),
                x_label: "c".into(),
                y_label: "largest / n".into(),
                data: vec![Series {
                    label: "largest_frac".into(),
                    points,
                }],
                overlays: vec![Series {
                    label: "theta".into(),
                    points: curve,
                }],
            })
        }
    }
}

fn bounds(chart: &Chart) -> (f64, f64, f64, f64) {
    let all = chart.data.iter().chain(&chart.overlays).flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    (x0, x1, y0, y1)
}

fn render_chart(chart: &Chart) -> String {
    let (x0, x1, y0, y1) = bounds(chart);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        chart.title
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/></g>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(fx),
            bottom + 16.0,
            tick_label(fx)
        );
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        chart.x_label
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        chart.y_label
    );
    let polyline = |pts: &[(f64, f64)]| {
        pts.iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (i, series) in chart.overlays.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<polyline class="overlay" data-label="{}" fill="none" stroke="{}" stroke-dasharray="4 3" points="{}"/>"#,
            series.label,
            COLORS[(i + chart.data.len()) % COLORS.len()],
            polyline(&series.points)
        );
    }
    for (i, series) in chart.data.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{}" points="{}"/>"#,
            series.label,
            COLORS[i % COLORS.len()],
            polyline(&series.points)
        );
    }
    let rows = chart.data.iter().map(|d| d.points.len()).max().unwrap_or(0);
    for r in 0..rows {
        let _ = write!(s, r#"<g class="data-point">"#);
        for (i, series) in chart.data.iter().enumerate() {
            if let Some(&(x, y)) = series.points.get(r).filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = write!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    px(x),
                    py(y),
                    COLORS[i % COLORS.len()]
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    for (i, series) in chart.data.iter().chain(&chart.overlays).enumerate() {
        let y = top + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{:.1}" y="{:.1}" fill="{}">{}</text>"#,
            right - 110.0,
            y,
            COLORS[i % COLORS.len()],
            series.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.into() }
}

/// Renders CSV text as an SVG document. `profile` supplies the θ overlay of
/// [`PlotKind::GiantVsC`].
pub fn render(kind: PlotKind, csv_text: &str, profile: &LimitProfile) -> Result<String, PlotError> {
    let table = Table::parse(csv_text)?;
    let chart = build_chart(kind, &table, profile)?;
    Ok(render_chart(&chart))
}

pub fn plot_file(csv_path: &Path, kind: PlotKind, profile: &LimitProfile) -> Result<String, PlotError> {
    render(kind, &std::fs::read_to_string(csv_path)?, profile)
}
