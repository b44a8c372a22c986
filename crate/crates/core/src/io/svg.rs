//! Minimal deterministic SVG charts: hit rate over radius, and box summaries.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::SummaryStats;
use crate::error::Result;
use crate::radii::HitRateCurve;

use super::write_file;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear map from data to pixels.
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        let span = self.hi - self.lo;
        let t = if span > 0.0 {
            (v - self.lo) / span
        } else {
            0.5
        };
        self.px_lo + t * (self.px_hi - self.px_lo)
    }
}

fn plot_box() -> (f64, f64, f64, f64) {
    (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM)
}

fn open_svg(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y: &Axis, ticks: &[f64], label: &str) {
    let (x0, x1, _, _) = plot_box();
    for &t in ticks {
        let py = y.map(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#e0e0e0"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let cy = (y.px_lo + y.px_hi) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        escape(label)
    );
}

fn frame(out: &mut String) {
    let (x0, x1, y0, y1) = plot_box();
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn legend_entry(out: &mut String, i: usize, name: &str, color: &str) {
    let x = WIDTH - RIGHT + 16.0;
    let y = TOP + 10.0 + 20.0 * i as f64;
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{:.2}" width="14" height="4" fill="{color}"/>"#,
        y - 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
        x + 20.0,
        y + 4.0,
        escape(name)
    );
}

/// Line chart of hit rate over radius, one polyline per curve.
pub fn line_chart_svg(curves: &[HitRateCurve], title: &str) -> String {
    let (x0, x1, y0, y1) = plot_box();
    let max_r = curves
        .iter()
        .filter_map(HitRateCurve::range)
        .map(|(_, hi)| hi)
        .fold(0.0, f64::max);
    let x = Axis {
        lo: 0.0,
        hi: if max_r > 0.0 { max_r } else { 1.0 },
        px_lo: x0,
        px_hi: x1,
    };
    let y = Axis {
        lo: 0.0,
        hi: 1.0,
        px_lo: y1,
        px_hi: y0,
    };

    let mut out = String::new();
    open_svg(&mut out, title);
    y_axis(&mut out, &y, &[0.0, 0.25, 0.5, 0.75, 1.0], "hit rate");
    for i in 0..=5 {
        let v = x.hi * i as f64 / 5.0;
        let px = x.map(v);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            y1 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">radius (mm)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0
    );
    frame(&mut out);
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = c
            .samples()
            .iter()
            .map(|s| format!("{:.2},{:.2}", x.map(s.radius), y.map(s.hit_rate)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&c.algorithm_id)
        );
        legend_entry(&mut out, i, &c.algorithm_id, color);
    }
    out.push_str("</svg>\n");
    out
}

/// Box chart with whiskers at min/max, box from q1 to q3 and a median bar.
pub fn box_chart_svg(
    summaries: &[(String, SummaryStats)],
    title: &str,
    value_label: &str,
) -> String {
    let (x0, x1, y0, y1) = plot_box();
    let lo = summaries
        .iter()
        .map(|(_, s)| s.min)
        .fold(f64::INFINITY, f64::min);
    let hi = summaries
        .iter()
        .map(|(_, s)| s.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() {
        (lo.min(0.0), hi.max(lo + 1e-9))
    } else {
        (0.0, 1.0)
    };
    let y = Axis {
        lo,
        hi,
        px_lo: y1,
        px_hi: y0,
    };
    let ticks: Vec<f64> = (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();

    let mut out = String::new();
    open_svg(&mut out, title);
    y_axis(&mut out, &y, &ticks, value_label);
    frame(&mut out);
    let slot = (x1 - x0) / summaries.len().max(1) as f64;
    let half = (slot * 0.3).min(30.0);
    for (i, (name, s)) in summaries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let cx = x0 + slot * (i as f64 + 0.5);
        let _ = writeln!(out, r#"<g class="box"><title>{}</title>"#, escape(name));
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y.map(s.min),
            y.map(s.max)
        );
        for v in [s.min, s.max] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                y.map(v),
                cx + half / 2.0,
                y.map(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.5" stroke="black"/>"#,
            cx - half,
            y.map(s.q3),
            2.0 * half,
            (y.map(s.q1) - y.map(s.q3)).max(0.0)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y.map(s.median),
            cx + half,
            y.map(s.median)
        );
        out.push_str("</g>\n");
        legend_entry(&mut out, i, name, color);
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_line_chart(
    curves: &[HitRateCurve],
    title: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_file(path.as_ref(), line_chart_svg(curves, title).as_bytes())
}

pub fn write_box_chart(
    summaries: &[(String, SummaryStats)],
    title: &str,
    value_label: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_file(
        path.as_ref(),
        box_chart_svg(summaries, title, value_label).as_bytes(),
    )
}
