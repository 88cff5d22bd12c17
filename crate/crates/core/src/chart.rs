//! Deterministic SVG scatter charts of predicted or surveyed classes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psychro::{MOLAR_MASS_RATIO, STANDARD_PRESSURE_KPA};
use crate::record::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsychroPoint {
    pub temp_c: f64,
    pub rh: f64,
    pub humidity_ratio: f64,
    pub label: ClassLabel,
}

/// Closed outline in chart coordinates (°C, y-axis units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub name: String,
    pub vertices: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum YAxis {
    #[default]
    HumidityRatio,
    RelativeHumidity,
}

impl YAxis {
    pub fn label(self) -> &'static str {
        match self {
            YAxis::HumidityRatio => "Humidity ratio (kg/kg dry air)",
            YAxis::RelativeHumidity => "Relative humidity (%)",
        }
    }

    fn of(self, p: &PsychroPoint) -> f64 {
        match self {
            YAxis::HumidityRatio => p.humidity_ratio,
            YAxis::RelativeHumidity => p.rh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChartOptions {
    pub y_axis: YAxis,
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartDocument {
    pub svg: Vec<u8>,
    pub x_label: &'static str,
    pub y_label: &'static str,
    /// Classes present in the points, in label order.
    pub legend: Vec<ClassLabel>,
    pub overlays: Vec<Polygon>,
    pub point_count: usize,
}

pub const X_LABEL: &str = "Dry-bulb temperature (°C)";

pub fn class_color(label: ClassLabel) -> &'static str {
    match label {
        ClassLabel::Warmer => "#1f4fd8",
        ClassLabel::NoChange => "#2ca02c",
        ClassLabel::Cooler => "#d62728",
    }
}

/// Reads `polygon,temp_c,humidity_ratio` vertex rows. Vertices are grouped
/// by polygon name in first-seen order.
pub fn parse_overlays(text: &str) -> Result<Vec<Polygon>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut polygons: Vec<Polygon> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::csv("overlay polygons", e))?;
        let bad = || Error::ConfigInvalid(format!("overlay row {}: expected polygon,temp_c,humidity_ratio", i + 2));
        if row.len() != 3 {
            return Err(bad());
        }
        let x: f64 = row[1].parse().map_err(|_| bad())?;
        let y: f64 = row[2].parse().map_err(|_| bad())?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad());
        }
        match polygons.iter_mut().find(|p| p.name == row[0]) {
            Some(p) => p.vertices.push((x, y)),
            None => polygons.push(Polygon { name: row[0].to_string(), vertices: vec![(x, y)] }),
        }
    }
    Ok(polygons)
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;

/// `(lo, hi, step)` covering `[min, max]` with 1-2-5 tick spacing.
fn nice_range(min: f64, max: f64) -> (f64, f64, f64) {
    let span = if max > min { max - min } else { min.abs().max(1.0) };
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let lo = (min / step).floor() * step;
    let mut hi = (max / step).ceil() * step;
    if hi <= lo {
        hi = lo + step;
    }
    (lo, hi, step)
}

fn decimals(step: f64) -> usize {
    (-step.log10().floor()).max(0.0) as usize
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_chart(points: &[PsychroPoint], overlays: &[Polygon], options: &ChartOptions) -> Result<ChartDocument> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let y_axis = options.y_axis;
    let xs = points.iter().map(|p| p.temp_c).chain(overlays.iter().flat_map(|o| o.vertices.iter().map(|v| v.0)));
    let ys = points.iter().map(|p| y_axis.of(p)).chain(overlays.iter().flat_map(|o| o.vertices.iter().map(|v| v.1)));
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x0, x1, xstep) = nice_range(xmin, xmax);
    let (y0, y1, ystep) = nice_range(ymin.min(0.0), ymax);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::with_capacity(points.len() * 64 + 4096);
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(title) = &options.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(title)
        );
    }

    s.push_str("<g id=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n");
    let _ = writeln!(s, r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none"/>"#);
    let xd = decimals(xstep);
    let nx = ((x1 - x0) / xstep).round() as usize;
    for i in 0..=nx {
        let v = x0 + i as f64 * xstep;
        let px = sx(v);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" stroke="none">{v:.xd$}</text>"#, TOP + ph + 19.0);
    }
    let yd = decimals(ystep);
    let ny = ((y1 - y0) / ystep).round() as usize;
    for i in 0..=ny {
        let v = y0 + i as f64 * ystep;
        let py = sy(v);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{v:.yd$}</text>"#, LEFT - 8.0, py + 4.0);
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        TOP + ph + 40.0,
        escape(X_LABEL)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_axis.label())
    );

    if !overlays.is_empty() {
        s.push_str("<g id=\"overlays\" fill=\"none\" stroke=\"#222\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\">\n");
        for o in overlays {
            let pts: Vec<String> = o.vertices.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polygon data-name="{}" points="{}"/>"#, escape(&o.name), pts.join(" "));
        }
        s.push_str("</g>\n");
    }

    let mut legend = Vec::new();
    for label in ClassLabel::ALL {
        if !points.iter().any(|p| p.label == label) {
            continue;
        }
        legend.push(label);
        let _ = writeln!(s, r#"<g class="{}" fill="{}">"#, label.name(), class_color(label));
        for p in points.iter().filter(|p| p.label == label) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(p.temp_c), sy(y_axis.of(p)));
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g id=\"legend\">\n");
    for (i, label) in legend.iter().enumerate() {
        let ly = TOP + 12.0 + i as f64 * 22.0;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(s, r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="5" fill="{}"/>"#, class_color(*label));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 12.0, ly + 4.0, label.name());
    }
    s.push_str("</g>\n");

    if y_axis == YAxis::HumidityRatio {
        let _ = writeln!(
            s,
            r##"<text x="{LEFT:.2}" y="{:.2}" font-size="10" fill="#555">p_ws = 0.61121 exp((18.678 - T/234.5) T/(257.14 + T)) kPa; W = {MOLAR_MASS_RATIO} p_w/(P - p_w); P = {STANDARD_PRESSURE_KPA} kPa</text>"##,
            HEIGHT - 14.0
        );
    }
    s.push_str("</svg>\n");

    Ok(ChartDocument {
        svg: s.into_bytes(),
        x_label: X_LABEL,
        y_label: y_axis.label(),
        legend,
        overlays: overlays.to_vec(),
        point_count: points.len(),
    })
}
