//! Standalone SVG figures for sweep tables and estimate histograms.
//!
//! Output is a single self-contained document: no scripts, fonts, styles or
//! links to anything outside the file.

use std::fmt::Write;

use crate::harness::{EstimateHistogram, SweepResult};
use crate::noise::DELTA_BOUND;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear map from data to pixels.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(d0: f64, d1: f64, p0: f64, p1: f64) -> Self {
        let (d0, d1) = if d1 > d0 {
            (d0, d1)
        } else {
            (d0 - 0.5, d0 + 0.5)
        };
        Self { d0, d1, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

struct Canvas {
    buf: String,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Self {
            buf: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" {extra}/>"#
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}" {extra}/>"#,
            w.max(0.0),
            h.max(0.0)
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.buf,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, s: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="{size}">{}</text>"#,
            escape(s)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, extra: &str) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" {extra}/>"#,
            coords.join(" ")
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.buf,
            w = self.width,
            h = self.height
        )
    }
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn axes(
    c: &mut Canvas,
    x: Scale,
    y: Scale,
    x_ticks: &[f64],
    y_ticks: &[f64],
    xlabel: &str,
    ylabel: &str,
) {
    let (left, right) = (x.p0, x.p1);
    let (bottom, top) = (y.p0, y.p1);
    c.line(left, bottom, right, bottom, "black", "");
    c.line(left, bottom, left, top, "black", "");
    for &t in x_ticks {
        let px = x.at(t);
        c.line(px, bottom, px, bottom + 5.0, "black", "");
        c.text(px, bottom + 18.0, "middle", 11, &fmt_tick(t));
    }
    for &t in y_ticks {
        let py = y.at(t);
        c.line(left - 5.0, py, left, py, "black", "");
        c.text(left - 8.0, py + 4.0, "end", 11, &format!("{t:.1}"));
    }
    c.text((left + right) / 2.0, bottom + 40.0, "middle", 13, xlabel);
    let _ = writeln!(
        c.buf,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(ylabel)
    );
}

fn ticks(lo: f64, hi: f64, max: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / max as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

/// Failure rate against a single swept axis: points with Wilson bars, the
/// predicted δ curve, and a dashed line at the `1/√8` bound.
pub fn failure_rate_svg(result: &SweepResult, title: &str) -> String {
    let mut c = Canvas::new(WIDTH, HEIGHT);
    let pts = &result.points;
    let lo = pts
        .iter()
        .map(|p| p.axis_value)
        .fold(f64::INFINITY, f64::min);
    let hi = pts
        .iter()
        .map(|p| p.axis_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { (hi - lo) * 0.03 } else { 0.5 };
    let x = Scale::new(lo - pad, hi + pad, LEFT, WIDTH - RIGHT);
    let y = Scale::new(0.0, 1.0, HEIGHT - BOTTOM, TOP);

    c.text(WIDTH / 2.0, 24.0, "middle", 15, title);
    axes(
        &mut c,
        x,
        y,
        &ticks(lo, hi, 10),
        &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        result.metadata.primary_axis.name(),
        "failure rate / predicted δ",
    );

    let by = y.at(DELTA_BOUND);
    c.line(x.p0, by, x.p1, by, "gray", r#"stroke-dasharray="6 4""#);
    c.text(x.p1 - 4.0, by - 5.0, "end", 11, "δ = 1/√8");

    let curve: Vec<(f64, f64)> = pts
        .iter()
        .map(|p| (x.at(p.axis_value), y.at(p.predicted_delta.min(1.0))))
        .collect();
    c.polyline(&curve, "#d62728", r#"stroke-width="1.5""#);

    for p in pts {
        let px = x.at(p.axis_value);
        c.line(px, y.at(p.ci_low), px, y.at(p.ci_high), "#1f77b4", "");
        c.line(
            px - 3.0,
            y.at(p.ci_low),
            px + 3.0,
            y.at(p.ci_low),
            "#1f77b4",
            "",
        );
        c.line(
            px - 3.0,
            y.at(p.ci_high),
            px + 3.0,
            y.at(p.ci_high),
            "#1f77b4",
            "",
        );
        c.circle(px, y.at(p.failure_rate), 3.5, "#1f77b4");
    }

    c.circle(LEFT + 20.0, TOP + 12.0, 3.5, "#1f77b4");
    c.text(
        LEFT + 30.0,
        TOP + 16.0,
        "start",
        11,
        "observed failure rate (95% CI)",
    );
    c.line(
        LEFT + 12.0,
        TOP + 30.0,
        LEFT + 28.0,
        TOP + 30.0,
        "#d62728",
        r#"stroke-width="1.5""#,
    );
    c.text(LEFT + 30.0, TOP + 34.0, "start", 11, "predicted δ");
    c.finish()
}

fn heat(rate: f64) -> String {
    // white → dark red
    let r = rate.clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - r)).round() as u8;
    let red = (255.0 - 90.0 * r).round() as u8;
    format!("rgb({red},{g},{g})")
}

/// Two-axis sweep as a grid of cells shaded by failure rate. Cells whose
/// predicted δ exceeds the bound get a heavy outline.
pub fn grid_svg(result: &SweepResult, title: &str) -> String {
    let mut xs: Vec<f64> = result.points.iter().map(|p| p.axis_value).collect();
    let mut ys: Vec<f64> = result
        .points
        .iter()
        .filter_map(|p| p.secondary_axis_value)
        .collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    if ys.is_empty() {
        ys.push(0.0);
    }
    let mut c = Canvas::new(WIDTH, HEIGHT);
    c.text(WIDTH / 2.0, 24.0, "middle", 15, title);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT - 60.0, HEIGHT - BOTTOM, TOP);
    let cw = (x1 - x0) / xs.len() as f64;
    let ch = (y0 - y1) / ys.len() as f64;
    let index = |v: f64, axis: &[f64]| axis.iter().position(|a| *a == v).unwrap_or(0);

    for p in &result.points {
        let i = index(p.axis_value, &xs);
        let j = index(p.secondary_axis_value.unwrap_or(0.0), &ys);
        let (cx, cy) = (x0 + i as f64 * cw, y0 - (j + 1) as f64 * ch);
        let outline = if p.predicted_delta > DELTA_BOUND {
            r#"stroke="black" stroke-width="2""#
        } else {
            r##"stroke="#999" stroke-width="0.5""##
        };
        c.rect(cx, cy, cw, ch, &heat(p.failure_rate), outline);
        c.text(
            cx + cw / 2.0,
            cy + ch / 2.0 + 4.0,
            "middle",
            10,
            &format!("{:.2}", p.failure_rate),
        );
    }
    for (i, v) in xs.iter().enumerate() {
        c.text(
            x0 + (i as f64 + 0.5) * cw,
            y0 + 18.0,
            "middle",
            11,
            &fmt_tick(*v),
        );
    }
    for (j, v) in ys.iter().enumerate() {
        c.text(
            x0 - 8.0,
            y0 - (j as f64 + 0.5) * ch + 4.0,
            "end",
            11,
            &fmt_tick(*v),
        );
    }
    c.text(
        (x0 + x1) / 2.0,
        y0 + 40.0,
        "middle",
        13,
        result.metadata.primary_axis.name(),
    );
    let ylabel = result.metadata.secondary_axis.map_or("", |a| a.name());
    let _ = writeln!(
        c.buf,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );

    // colour key
    let kx = x1 + 20.0;
    for k in 0..10 {
        let r = k as f64 / 9.0;
        c.rect(
            kx,
            y0 - (k + 1) as f64 * (y0 - y1) / 10.0,
            16.0,
            (y0 - y1) / 10.0,
            &heat(r),
            "",
        );
    }
    c.text(kx + 20.0, y1 + 10.0, "start", 10, "1");
    c.text(kx + 20.0, y0, "start", 10, "0");
    c.text(kx + 8.0, y1 - 8.0, "middle", 10, "fail");
    c.finish()
}

/// One panel per histogram, stacked vertically: estimate counts with the
/// success bounds dashed and twice the bounds dotted.
pub fn histogram_svg(panels: &[(String, EstimateHistogram)], title: &str) -> String {
    let panel_h = 180.0;
    let height = TOP + panels.len().max(1) as f64 * (panel_h + BOTTOM);
    let mut c = Canvas::new(WIDTH, height);
    c.text(WIDTH / 2.0, 24.0, "middle", 15, title);
    for (k, (label, h)) in panels.iter().enumerate() {
        let bottom = TOP + (k + 1) as f64 * (panel_h + BOTTOM) - BOTTOM;
        let top = bottom - panel_h + 20.0;
        let hi_edge = h.lower_edge + h.bin_width * h.counts.len() as f64;
        let x = Scale::new(
            (h.lower_edge - h.theta_ref) / h.half_width,
            (hi_edge - h.theta_ref) / h.half_width,
            LEFT,
            WIDTH - RIGHT,
        );
        let peak = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let y = Scale::new(0.0, peak, bottom, top);
        let y_ticks = ticks(0.0, peak, 4);
        let x_ticks: Vec<f64> = (-4..=4).map(|i| f64::from(i * 2)).collect();
        c.line(x.p0, bottom, x.p1, bottom, "black", "");
        c.line(x.p0, bottom, x.p0, top, "black", "");
        for &t in &x_ticks {
            c.line(x.at(t), bottom, x.at(t), bottom + 4.0, "black", "");
            c.text(x.at(t), bottom + 16.0, "middle", 10, &fmt_tick(t));
        }
        for &t in &y_ticks {
            c.text(x.p0 - 6.0, y.at(t) + 4.0, "end", 10, &fmt_tick(t));
        }
        for (i, &n) in h.counts.iter().enumerate() {
            let l = (h.lower_edge + i as f64 * h.bin_width - h.theta_ref) / h.half_width;
            let r = l + h.bin_width / h.half_width;
            c.rect(
                x.at(l),
                y.at(n as f64),
                x.at(r) - x.at(l),
                bottom - y.at(n as f64),
                "#7f7f7f",
                "",
            );
        }
        for (v, dash) in [(-1.0, "5 3"), (1.0, "5 3"), (-2.0, "2 3"), (2.0, "2 3")] {
            c.line(
                x.at(v),
                bottom,
                x.at(v),
                top,
                "#d62728",
                &format!(r#"stroke-dasharray="{dash}""#),
            );
        }
        let summary = format!(
            "{label}: {} trials, {} failures, {} outside plot",
            h.total,
            h.failures,
            h.below + h.above
        );
        c.text(x.p0 + 4.0, top - 6.0, "start", 12, &summary);
        c.text(
            (x.p0 + x.p1) / 2.0,
            bottom + 34.0,
            "middle",
            11,
            "(θ_est − θ_ref) / claimed half-width",
        );
    }
    c.finish()
}
