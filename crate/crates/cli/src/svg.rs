// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal standalone SVG charts. Output is a pure function of the input so
//! reruns produce byte-identical files.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 45.0;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Hold each value until the next point.
    pub step: bool,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
}

#[allow(clippy::too_many_arguments)]
fn axes(out: &mut String, x0: f64, y0: f64, w: f64, h: f64, xr: (f64, f64), yr: (f64, f64), panel: (&str, &str, &str)) {
    let (title, x_label, y_label) = panel;
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#, x0 + w / 2.0, y0 - 10.0, escape(title));
    for t in nice_ticks(xr.0, xr.1) {
        let x = x0 + (t - xr.0) / (xr.1 - xr.0) * w;
        let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/>"##, y0, y0 + h);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + h + 15.0, label(t));
    }
    for t in nice_ticks(yr.0, yr.1) {
        let y = y0 + h - (t - yr.0) / (yr.1 - yr.0) * h;
        let _ = writeln!(out, r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, x0 + w);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 5.0, y + 4.0, label(t));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + w / 2.0, y0 + h + 35.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 - 50.0,
        y0 + h / 2.0,
        x0 - 50.0,
        y0 + h / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, x: f64, y: f64, names: &[&str]) {
    for (k, name) in names.iter().enumerate() {
        let yy = y + 18.0 * k as f64;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{color}"/>"#, yy - 10.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{yy:.1}">{}</text>"#, x + 18.0, escape(name));
    }
}

/// Vertically stacked line charts sharing one width.
pub fn line_panels(panels: &[Panel], width: f64, panel_height: f64) -> String {
    let slot = panel_height + TOP + BOTTOM;
    let height = slot * panels.len() as f64;
    let mut out = String::new();
    header(&mut out, width, height);
    let w = width - LEFT - RIGHT;
    for (p, panel) in panels.iter().enumerate() {
        let (x0, y0) = (LEFT, slot * p as f64 + TOP);
        let xr = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let yr = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let pad = (yr.1 - yr.0) * 0.05;
        let yr = (yr.0 - pad, yr.1 + pad);
        axes(&mut out, x0, y0, w, panel_height, xr, yr, (&panel.title, &panel.x_label, &panel.y_label));
        let sx = |x: f64| x0 + (x - xr.0) / (xr.1 - xr.0) * w;
        let sy = |y: f64| y0 + panel_height - (y - yr.0) / (yr.1 - yr.0) * panel_height;
        for (k, s) in panel.series.iter().enumerate() {
            let mut d = String::new();
            for (i, &(x, y)) in s.points.iter().enumerate() {
                if i == 0 {
                    let _ = write!(d, "M{:.2},{:.2}", sx(x), sy(y));
                } else {
                    if s.step {
                        let _ = write!(d, " H{:.2}", sx(x));
                    }
                    let _ = write!(d, " L{:.2},{:.2}", sx(x), sy(y));
                }
            }
            let color = PALETTE[k % PALETTE.len()];
            let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        }
        let names: Vec<&str> = panel.series.iter().map(|s| s.name.as_str()).collect();
        legend(&mut out, x0 + w + 15.0, y0 + 15.0, &names);
    }
    out.push_str("</svg>\n");
    out
}

/// Grouped bar chart: one group per category, one bar per series.
pub fn grouped_bars(title: &str, y_label: &str, categories: &[String], series: &[(String, Vec<f64>)]) -> String {
    let (width, plot_h) = (LEFT + RIGHT + (60.0 * categories.len() as f64).max(300.0), 300.0);
    let height = plot_h + TOP + BOTTOM + 30.0;
    let mut out = String::new();
    header(&mut out, width, height);
    let w = width - LEFT - RIGHT;
    let top = series.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE) * 1.05;
    let (x0, y0) = (LEFT, TOP);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#, x0 + w / 2.0, y0 - 10.0, escape(title));
    for t in nice_ticks(0.0, top) {
        let y = y0 + plot_h - t / top * plot_h;
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, x0 + w);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 5.0, y + 4.0, label(t));
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 - 50.0,
        y0 + plot_h / 2.0,
        x0 - 50.0,
        y0 + plot_h / 2.0,
        escape(y_label)
    );
    let group_w = w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (c, cat) in categories.iter().enumerate() {
        let gx = x0 + group_w * c as f64 + group_w * 0.1;
        for (k, (_, values)) in series.iter().enumerate() {
            let v = values.get(c).copied().unwrap_or(0.0).max(0.0);
            let bh = v / top * plot_h;
            let color = PALETTE[k % PALETTE.len()];
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                gx + bar_w * k as f64,
                y0 + plot_h - bh,
                bar_w,
                bh
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            y0 + plot_h + 15.0,
            escape(cat)
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut out, x0 + w + 15.0, y0 + 15.0, &names);
    out.push_str("</svg>\n");
    out
}
