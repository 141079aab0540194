//! CSV tables and standalone SVG line charts for sweeps and IOU decay.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluator::ApSummary;
use crate::sweep::{PerturbationKind, Regime, SweepResult};
use crate::synthetic::DecayTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub const SWEEP_HEADER: [&str; 15] = [
    "offset",
    "regime",
    "direction",
    "map",
    "ap50",
    "ap75",
    "ap_small",
    "ap_medium",
    "ap_large",
    "drop_map",
    "drop_ap50",
    "drop_ap75",
    "drop_ap_small",
    "drop_ap_medium",
    "drop_ap_large",
];

pub const DECAY_HEADER: [&str; 4] = ["offset", "iou_mean", "iou_min", "iou_max"];

/// Marker written for a drop whose baseline is not positive.
pub const UNDEFINED: &str = "NA";

fn fixed6(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Contract(format!("csv encoding failed: {e}"))
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    writer
        .into_inner()
        .map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
}

/// Sweep table, one row per offset.
pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    let (regime, direction) = match result.kind {
        PerturbationKind::Translate(Regime::RandomDirection) => ("random", "none".to_string()),
        PerturbationKind::Translate(Regime::Fixed(d)) => ("fixed", d.to_string()),
        PerturbationKind::Scale(_) => ("none", "none".to_string()),
    };
    for row in &result.rows {
        let mut rec = vec![fixed6(row.spec.offset), regime.to_string(), direction.clone()];
        rec.extend(row.summary.to_array().map(fixed6));
        rec.extend(
            row.relative_drop
                .0
                .map(|d| d.map_or_else(|| UNDEFINED.to_string(), fixed6)),
        );
        w.write_record(&rec).map_err(csv_error)?;
    }
    finish(w)
}

/// Decay table with mean/min/max IOU across boxes per offset.
pub fn decay_csv(table: &DecayTable) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(DECAY_HEADER).map_err(csv_error)?;
    for (i, &offset) in table.offsets.iter().enumerate() {
        let s = table.stats(i);
        w.write_record([fixed6(offset), fixed6(s.mean), fixed6(s.min), fixed6(s.max)])
            .map_err(csv_error)?;
    }
    finish(w)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_sweep_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &sweep_csv(result)?)
}

pub fn write_decay_csv(table: &DecayTable, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &decay_csv(table)?)
}

/// Metric values recovered from a sweep CSV, one `(offset, summary)` per row.
pub fn parse_sweep_csv(bytes: &[u8]) -> Result<Vec<(f64, ApSummary)>> {
    let mut r = csv::Reader::from_reader(bytes);
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::parse("sweep csv", format!("`{s}`: {e}")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse("sweep csv", e))?;
        if rec.len() != SWEEP_HEADER.len() {
            return Err(Error::parse("sweep csv", format!("row has {} fields", rec.len())));
        }
        let mut m = [0.0; 6];
        for (i, slot) in m.iter_mut().enumerate() {
            *slot = num(&rec[3 + i])?;
        }
        rows.push((num(&rec[0])?, ApSummary::from_array(m)));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl ChartSpec {
    fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::Validation(format!("chart `{}` has no series", self.title)));
        }
        for s in &self.series {
            if s.points.is_empty() {
                return Err(Error::Validation(format!("series `{}` is empty", s.name)));
            }
            if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::Validation(format!("series `{}` has non-finite points", s.name)));
            }
            if s.points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Validation(format!(
                    "series `{}` x values are not strictly increasing",
                    s.name
                )));
            }
        }
        Ok(())
    }
}

/// AP versus offset, one series per headline metric. Sentinel values are skipped.
pub fn sweep_chart(result: &SweepResult, title: &str) -> ChartSpec {
    let labels = ["mAP", "AP50", "AP75", "AP small", "AP medium", "AP large"];
    let series = labels
        .iter()
        .enumerate()
        .map(|(m, name)| Series {
            name: name.to_string(),
            points: result
                .rows
                .iter()
                .map(|r| (r.spec.offset, r.summary.to_array()[m]))
                .filter(|(_, y)| *y >= 0.0)
                .collect(),
        })
        .filter(|s| !s.points.is_empty())
        .collect();
    ChartSpec {
        title: title.to_string(),
        x_label: "offset (pixels)".into(),
        y_label: "AP".into(),
        series,
    }
}

/// Per-box IOU curves for the first `max_curves` boxes, labelled by size.
pub fn decay_chart(table: &DecayTable, title: &str, x_label: &str, max_curves: usize) -> ChartSpec {
    let series = (0..table.boxes.len().min(max_curves))
        .map(|i| {
            let b = &table.boxes[i];
            Series {
                name: format!("{:.0}x{:.0}", b.width(), b.height()),
                points: table.offsets.iter().copied().zip(table.curve(i)).collect(),
            }
        })
        .collect();
    ChartSpec {
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: "IOU".into(),
        series,
    }
}

/// Tick spacing from {1, 2, 5} x 10^k giving at most about ten intervals.
fn nice_step(span: f64) -> f64 {
    if span <= 0.0 {
        return 1.0;
    }
    let raw = span / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = nice_step(hi - lo);
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), decimals)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders a self-contained SVG 1.1 document.
pub fn render_svg(spec: &ChartSpec) -> Result<String> {
    spec.validate()?;
    let points = spec.series.iter().flat_map(|s| s.points.iter());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if (0.0..=1.0).contains(&y_lo) && y_hi <= 1.0 {
        y_hi = 1.0;
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let (x_ticks, x_dec) = ticks(x_lo, x_hi);
    let (y_ticks, y_dec) = ticks(y_lo, y_hi);
    let (x_lo, x_hi) = (x_ticks[0], *x_ticks.last().unwrap());
    let (y_lo, y_hi) = (y_ticks[0], *y_ticks.last().unwrap());

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(&spec.title)
    );

    // grid and tick labels
    let _ = writeln!(svg, r##"<g stroke="#dddddd" stroke-width="1">"##);
    for &t in &x_ticks {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
            px(t),
            MARGIN,
            HEIGHT - MARGIN
        );
    }
    for &t in &y_ticks {
        let _ = writeln!(
            svg,
            r#"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}"/>"#,
            py(t),
            MARGIN,
            WIDTH - MARGIN
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g font-size="11" fill="black">"#);
    for &t in &x_ticks {
        let _ = writeln!(
            svg,
            r#"<text class="x-tick" x="{:.2}" y="{:.2}" text-anchor="middle">{:.*}</text>"#,
            px(t),
            HEIGHT - MARGIN + 16.0,
            x_dec,
            t
        );
    }
    for &t in &y_ticks {
        let _ = writeln!(
            svg,
            r#"<text class="y-tick" x="{:.2}" y="{:.2}" text-anchor="end">{:.*}</text>"#,
            MARGIN - 6.0,
            py(t) + 4.0,
            y_dec,
            t
        );
    }
    let _ = writeln!(svg, "</g>");

    // axes
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1.5"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN / 4.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{y}" text-anchor="middle" font-size="13" transform="rotate(-90 {x} {y})">{}</text>"#,
        escape(&spec.y_label),
        x = MARGIN / 4.0,
        y = HEIGHT / 2.0
    );

    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&s.name)
        );
    }

    // legend, top right inside the plot area
    let _ = writeln!(svg, r#"<g class="legend" font-size="11">"#);
    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN + 12.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 130.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(&s.name)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg_chart(spec: &ChartSpec, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), render_svg(spec)?.as_bytes())
}
