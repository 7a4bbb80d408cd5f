//! Self-contained SVG plots with deterministic output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Markers in the complex plane.
    SpectrumScatter,
    /// One polyline per ray, `|λ|·‖R(λ)‖` against `log10 |λ|`.
    SectorCurves,
    /// One polyline per series against time.
    DecayTraces,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Series { label: label.into(), points }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// Renders the series; identical input gives identical bytes.
pub fn render_svg(series: &[Series], kind: PlotKind) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::InvalidParameter("plot needs a nonempty series".into()));
    }
    let transform = |p: [f64; 2]| -> [f64; 2] {
        match kind {
            PlotKind::SectorCurves => [p[0].max(f64::MIN_POSITIVE).log10(), p[1]],
            _ => p,
        }
    };
    let pts: Vec<Vec<[f64; 2]>> = series.iter().map(|s| s.points.iter().map(|&p| transform(p)).filter(|p| p[0].is_finite() && p[1].is_finite()).collect()).collect();
    let (x0, x1) = range(pts.iter().flatten().map(|p| p[0]));
    let (y0, y1) = range(pts.iter().flatten().map(|p| p[1]));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
    let (xlabel, ylabel, title) = match kind {
        PlotKind::SpectrumScatter => ("Re λ", "Im λ", "Spectrum"),
        PlotKind::SectorCurves => ("log10 |λ|", "|λ| ‖R(λ)‖", "Resolvent along rays"),
        PlotKind::DecayTraces => ("t", "value", "Decay traces"),
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, fmt(LEFT + pw / 2.0), escape(title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#, fmt(pw), fmt(ph));
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#, fmt(px), fmt(TOP + ph), fmt(TOP + ph + 4.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, fmt(px), fmt(TOP + ph + 16.0), tick_label(fx));
        let _ = writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#, fmt(LEFT - 4.0), fmt(py), fmt(LEFT));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, fmt(LEFT - 6.0), fmt(py + 4.0), tick_label(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, fmt(LEFT + pw / 2.0), fmt(HEIGHT - 12.0), escape(xlabel));
    let _ = writeln!(s, r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#, fmt(TOP + ph / 2.0), escape(ylabel));

    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        match kind {
            PlotKind::SpectrumScatter => {
                for q in p {
                    let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#, fmt(sx(q[0])), fmt(sy(q[1])));
                }
            }
            _ => {
                if p.len() == 1 {
                    let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#, fmt(sx(p[0][0])), fmt(sy(p[0][1])));
                } else {
                    let coords: Vec<String> = p.iter().map(|q| format!("{},{}", fmt(sx(q[0])), fmt(sy(q[1])))).collect();
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
                }
            }
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, fmt(lx), fmt(ly - 8.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, fmt(lx + 14.0), fmt(ly + 1.0), escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Renders and writes the plot, returning the document.
pub fn emit_plot(series: &[Series], kind: PlotKind, path: impl AsRef<Path>) -> Result<String> {
    let doc = render_svg(series, kind)?;
    std::fs::write(path, &doc)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_one_marker() {
        let svg = render_svg(&[Series::new("p", vec![[1.0, 0.0]])], PlotKind::SpectrumScatter).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn seven_curves_with_legend() {
        let series: Vec<Series> = (0..7)
            .map(|k| Series::new(format!("θ = {}°", 30 * k), (1..10).map(|r| [r as f64, 1.0 + k as f64 / r as f64]).collect()))
            .collect();
        let svg = render_svg(&series, PlotKind::SectorCurves).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 7);
        assert!(svg.contains("θ = 180°"));
    }

    #[test]
    fn deterministic_and_nonempty() {
        let s = vec![Series::new("a", vec![[0.0, 1.0], [1.0, 0.5], [2.0, 0.25]])];
        assert_eq!(render_svg(&s, PlotKind::DecayTraces).unwrap(), render_svg(&s, PlotKind::DecayTraces).unwrap());
        assert!(render_svg(&[], PlotKind::DecayTraces).is_err());
        assert!(render_svg(&[Series::new("e", vec![])], PlotKind::DecayTraces).is_err());
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_svg(&[Series::new("a<b & c", vec![[0.0, 0.0]])], PlotKind::SpectrumScatter).unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
