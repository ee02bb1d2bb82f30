use std::fmt::Write as _;

use super::BenchError;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
/// Points per polyline beyond which a series is thinned by a fixed stride.
const MAX_POINTS: usize = 2000;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y)` pairs; points with `y ≤ 0` or non-finite coordinates are not drawn.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxesSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl Default for AxesSpec {
    fn default() -> Self {
        AxesSpec {
            title: String::new(),
            x_label: "iteration k".into(),
            y_label: "gap".into(),
            width: 720,
            height: 440,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn drawable(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *y > 0.0)
        .map(|&(x, y)| (x, y.log10()))
        .collect();
    if kept.len() <= MAX_POINTS {
        return kept;
    }
    let stride = kept.len().div_ceil(MAX_POINTS);
    let mut thinned: Vec<(f64, f64)> = kept.iter().step_by(stride).copied().collect();
    if thinned.last() != kept.last() {
        thinned.push(*kept.last().expect("nonempty"));
    }
    thinned
}

/// Line plot with a log₁₀ y axis, one polyline per series and the legend in
/// input order. Output depends only on the inputs, so equal inputs give
/// byte-identical documents.
pub fn emit_svg(series: &[Series], axes: &AxesSpec) -> Result<String, BenchError> {
    let data: Vec<Vec<(f64, f64)>> = series.iter().map(|s| drawable(&s.points)).collect();
    let all = data.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        return Err(BenchError::EmptyPlot);
    }
    if x_hi == x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let (y_lo, y_hi) = {
        let (lo, hi) = (y_lo.floor(), y_hi.ceil());
        if hi == lo {
            (lo - 1.0, hi + 1.0)
        } else {
            (lo, hi)
        }
    };

    let (w, h) = (axes.width as f64, axes.height as f64);
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        axes.width, axes.height, axes.width, axes.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !axes.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&axes.title)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );

    let decades = (y_hi - y_lo) as usize;
    let y_step = decades.div_ceil(10).max(1);
    let mut e = y_lo;
    while e <= y_hi {
        let y = py(e);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            e as i64
        );
        e += y_step as f64;
    }
    for i in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let label = if x_hi - x_lo >= 10.0 { format!("{x:.0}") } else { format!("{x:.2}") };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"#,
            px(x),
            MARGIN_TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        h - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&axes.y_label)
    );

    for (i, (meta, pts)) in series.iter().zip(&data).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match pts.as_slice() {
            [] => {}
            [(x, y)] => {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y));
            }
            _ => {
                let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
        let ly = MARGIN_TOP + 12.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&meta.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
