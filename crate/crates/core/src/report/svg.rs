//! Minimal SVG 1.1 line charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::CurveRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// `v` rounded to six significant digits, shortest form.
fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".into();
    }
    let r: f64 = format!("{v:.5e}").parse().expect("formatted float");
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else if lo == 0.0 {
        (-1.0, 1.0)
    } else {
        (lo - lo.abs() * 0.5, hi + hi.abs() * 0.5)
    }
}

/// Renders one polyline per series with axes, ticks and a legend.
pub fn render_curves_svg(series: &[Series], title: &str) -> Result<String> {
    let Some(first) = series.first() else {
        return Err(Error::InvalidArgument("no series to plot".into()));
    };
    let n = first.points.len();
    if n == 0 || series.iter().any(|s| s.points.len() != n) {
        return Err(Error::InvalidArgument(
            "series must be nonempty and of equal length".into(),
        ));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    if all().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("curve points"));
    }
    let (x0, x1) = span(
        all().map(|p| p.0).fold(f64::INFINITY, f64::min),
        all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = span(
        all().map(|p| p.1).fold(f64::INFINITY, f64::min),
        all().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (tx, ty) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{tx}" y1="{b}" x2="{tx}" y2="{b5}" stroke="black"/><text x="{tx}" y="{by}" text-anchor="middle">{}</text>"#,
            sig6(xv),
            b = TOP + ph,
            b5 = TOP + ph + 5.0,
            by = TOP + ph + 18.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{l5}" y1="{ty}" x2="{LEFT}" y2="{ty}" stroke="black"/><text x="{lt}" y="{ty4}" text-anchor="end">{}</text>"#,
            sig6(yv),
            l5 = LEFT - 5.0,
            lt = LEFT - 8.0,
            ty4 = ty + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", sig6(px(x)), sig6(py(y))))
            .collect();
        let data: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", sig6(x), sig6(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title><desc>{}</desc></polyline>"#,
            pts.join(" "),
            escape(&ser.label),
            data.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_curves_svg(series: &[Series], title: &str, path: &Path) -> Result<()> {
    let body = render_curves_svg(series, title)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Groups curve rows of one scenario and metric into per-method series, in
/// order of first appearance.
pub fn series_from_curves(rows: &[CurveRow], scenario: &str, metric: &str) -> Vec<Series> {
    let mut order: Vec<String> = Vec::new();
    let mut by: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.scenario == scenario && r.metric == metric)
    {
        if !by.contains_key(&r.method) {
            order.push(r.method.clone());
        }
        by.entry(r.method.clone())
            .or_default()
            .push((r.t as f64, r.value));
    }
    order
        .into_iter()
        .map(|m| Series {
            points: by.remove(&m).unwrap_or_default(),
            label: m,
        })
        .collect()
}
