//! SVG line plots of result rows: one panel per classifier, one polyline per
//! measure, `n` on a log axis.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::rows::{Measure, ResultRow};
use super::ExperimentError;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 44.0;
const ACCURACY_COLOR: &str = "#d62728";
const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotLayout {
    pub title: String,
    pub y_label: String,
    /// Fixed y range; `None` scales from zero to the largest value.
    pub y_range: Option<(f64, f64)>,
}

impl PlotLayout {
    pub fn astuteness(title: &str) -> Self {
        Self {
            title: title.into(),
            y_label: "astuteness / accuracy".into(),
            y_range: Some((0.0, 1.0)),
        }
    }

    pub fn conditions(title: &str) -> Self {
        Self {
            title: title.into(),
            y_label: "estimate".into(),
            y_range: None,
        }
    }
}

fn series_label(m: &Measure) -> String {
    match m {
        Measure::Astuteness(k) => format!("kappa = {}", super::rows::sig6(*k)),
        other => other.to_string(),
    }
}

/// Renders the rows; the output depends only on the rows and layout.
pub fn emit_plot(rows: &[ResultRow], layout: &PlotLayout) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptySeries);
    }
    let mut sorted = rows.to_vec();
    super::rows::sort_rows(&mut sorted);

    // classifier -> measures in canonical order -> points
    let mut panels: BTreeMap<&str, Vec<(Measure, Vec<(f64, f64)>)>> = BTreeMap::new();
    for r in &sorted {
        let series = panels.entry(&r.classifier).or_default();
        let x = (r.n.max(1) as f64).log10();
        match series.iter_mut().find(|(m, _)| *m == r.measure) {
            Some((_, pts)) => pts.push((x, r.mean)),
            None => series.push((r.measure, vec![(x, r.mean)])),
        }
    }
    for series in panels.values_mut() {
        series.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    }

    let (x_lo, x_hi) = sorted.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        let x = (r.n.max(1) as f64).log10();
        (lo.min(x), hi.max(x))
    });
    let (x_lo, x_hi) = if x_hi - x_lo < 1e-9 { (x_lo - 0.5, x_hi + 0.5) } else { (x_lo, x_hi) };
    let (y_lo, y_hi) = layout.y_range.unwrap_or_else(|| {
        let top = sorted.iter().map(|r| r.mean).fold(0.0, f64::max);
        (0.0, if top > 0.0 { top * 1.05 } else { 1.0 })
    });

    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + 24.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="16" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(&layout.title)
    );

    for (i, (classifier, series)) in panels.iter().enumerate() {
        let ox = PANEL_W * i as f64;
        let oy = 24.0;
        let (px0, px1) = (ox + MARGIN_L, ox + PANEL_W - MARGIN_R);
        let (py0, py1) = (oy + MARGIN_T, oy + PANEL_H - MARGIN_B);
        let sx = |x: f64| px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0);
        let sy = |y: f64| py1 - (y - y_lo) / (y_hi - y_lo) * (py1 - py0);

        let _ = writeln!(svg, r#"<g>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            (px0 + px1) / 2.0,
            oy + 18.0,
            escape(classifier)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{px0:.1}" y="{py0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            px1 - px0,
            py1 - py0
        );
        for t in 0..=4 {
            let y = y_lo + (y_hi - y_lo) * t as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                px0 - 4.0,
                sy(y) + 4.0,
                super::rows::sig6((y * 1e3).round() / 1e3)
            );
        }
        let mut decade = x_lo.ceil() as i32;
        while (decade as f64) <= x_hi + 1e-9 {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">1e{decade}</text>"#,
                sx(decade as f64),
                py1 + 14.0
            );
            decade += 1;
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n (log scale)</text>"#,
            (px0 + px1) / 2.0,
            py1 + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            ox + 14.0,
            (py0 + py1) / 2.0,
            ox + 14.0,
            (py0 + py1) / 2.0,
            escape(&layout.y_label)
        );

        let mut palette = PALETTE.iter().cycle();
        for (j, (measure, pts)) in series.iter().enumerate() {
            let color = if *measure == Measure::Accuracy {
                ACCURACY_COLOR
            } else {
                palette.next().expect("cycle")
            };
            let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
            let ly = py0 + 12.0 + 14.0 * j as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
                px1 - 110.0,
                ly - 4.0,
                px1 - 92.0,
                ly - 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
                px1 - 88.0,
                ly,
                escape(&series_label(measure))
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
