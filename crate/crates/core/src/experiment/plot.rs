//! Minimal SVG line charts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::table::Table;

/// Which table columns to draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub log_x: bool,
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, x_label: &str, series: &[Series], log_x: bool) -> String {
    let tx = |x: f64| if log_x { x.max(f64::MIN_POSITIVE).log10() } else { x };
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    y0 = y0.min(0.0);
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let yv = y0 + f * (y1 - y0);
        let xv = x0 + f * (x1 - x0);
        let xl = if log_x { 10f64.powf(xv) } else { xv };
        let (gx, gy) = (l + f * (r - l), b - f * (b - t));
        let _ = writeln!(s, r#"<text x="{}" y="{gy}" text-anchor="end" dy="4">{yv:.3}</text>"#, l - 6.0);
        let _ = writeln!(s, r#"<text x="{gx}" y="{}" text-anchor="middle">{xl:.3}</text>"#, b + 16.0);
    }
    let label = if log_x { format!("{x_label} (log scale)") } else { x_label.to_string() };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, esc(&label));
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .enumerate()
            .map(|(j, &(x, y))| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<path d="{}" stroke="{color}" stroke-width="2" fill="none"/>"#, d.join(" "));
        for &(x, y) in ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = t + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, l + 10.0, esc(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Renders `spec` from the columns of `table`; missing columns are skipped.
pub fn render(spec: &PlotSpec, table: &Table) -> String {
    let xs = table.column(&spec.x).unwrap_or_default();
    let series: Vec<Series> = spec
        .ys
        .iter()
        .filter_map(|y| {
            let ys = table.column(y)?;
            Some(Series { name: y.clone(), points: xs.iter().copied().zip(ys).collect() })
        })
        .collect();
    line_chart(&spec.title, &spec.x, &series, spec.log_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_path_per_series() {
        let s = vec![
            Series { name: "a".into(), points: vec![(4.0, 1.0), (16.0, 2.0), (64.0, 3.0)] },
            Series { name: "b<c".into(), points: vec![(4.0, 0.5), (64.0, 0.6)] },
        ];
        let svg = line_chart("growth", "n", &s, true);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke-width=\"2\"").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.contains("(log scale)"));
    }

    #[test]
    fn degenerate_input_renders() {
        let svg = line_chart("empty", "n", &[], false);
        assert!(svg.contains("</svg>"));
    }
}
