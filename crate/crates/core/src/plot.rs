//! Minimal static SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::table::ResultTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: String,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Axis> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi == lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Axis { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            (a..=b)
                .map(|e| 10f64.powi(e))
                .filter(|v| (self.lo..=self.hi).contains(&v.log10()))
                .collect()
        } else {
            (0..=4)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
                .collect()
        }
    }
}

fn usable(v: f64, log: bool) -> bool {
    v.is_finite() && (!log || v > 0.0)
}

/// Render the selected columns of `table` as an SVG document.
pub fn render_svg(table: &ResultTable, spec: &PlotSpec) -> Result<String> {
    if spec.ys.is_empty() {
        return Err(LabError::param("y", "no columns to plot"));
    }
    let xs = table.column(&spec.x)?;
    let series: Vec<(String, Vec<f64>)> = spec
        .ys
        .iter()
        .map(|y| Ok((y.clone(), table.column(y)?)))
        .collect::<Result<_>>()?;
    if xs.is_empty() {
        return Err(LabError::EmptyData("table has no data rows".into()));
    }
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, ys)| {
            xs.iter()
                .zip(ys)
                .filter(|(x, y)| usable(**x, spec.log_x) && usable(**y, spec.log_y))
                .map(|(x, y)| (*x, *y))
                .collect()
        })
        .collect();
    let ax = Axis::fit(points.iter().flatten().map(|p| p.0), spec.log_x)
        .ok_or_else(|| LabError::EmptyData("no plottable points".into()))?;
    let ay = Axis::fit(points.iter().flatten().map(|p| p.1), spec.log_y).expect("same points");
    let px = |v: f64| MARGIN + ax.frac(v) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - ay.frac(v) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for t in ax.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in ay.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let axis_note = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x),
        axis_note(spec.log_x)
    );
    for (i, ((name, _), pts)) in series.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}{}</text>"#,
            WIDTH - MARGIN,
            escape(name),
            axis_note(spec.log_y)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{:.3}", v)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Read `input`, plot it, and write `output`. Nothing is written on error.
pub fn report(input: &Path, spec: &PlotSpec, output: &Path) -> Result<()> {
    let table = ResultTable::read_file(input)?;
    if table.rows().is_empty() {
        return Err(LabError::EmptyData(format!(
            "{} has no data rows",
            input.display()
        )));
    }
    let svg = render_svg(&table, spec)?;
    std::fs::write(output, svg).map_err(|e| LabError::io(output, e))
}
