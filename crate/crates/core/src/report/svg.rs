use std::fmt::Write;

use crate::experiments::{GroupSweepRow, PairwiseMatrixReport, Timeline};
use crate::metrics::{CurveData, CurveKind};
use crate::scorer::ImportanceReport;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Value rounded for printing; `-0.00` is folded into `0.00`.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        n(w),
        n(h),
        n(w),
        n(h)
    )
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" {FONT}>{}</text>", n(x), n(y), esc(s));
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        let _ = writeln!(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", n(l), n(t), n(w), n(h));
        for x in ticks(self.x0, self.x1) {
            let px = self.px(x);
            let _ = writeln!(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", n(px), n(t + h), n(px), n(t + h + 4.0));
            text(out, px, t + h + 16.0, "middle", &format_tick(x));
        }
        for y in ticks(self.y0, self.y1) {
            let py = self.py(y);
            let _ = writeln!(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", n(l - 4.0), n(py), n(l), n(py));
            text(out, l - 6.0, py + 4.0, "end", &format_tick(y));
        }
        text(out, l + w / 2.0, t + h + 34.0, "middle", x_label);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\" {FONT}>{}</text>",
            n(l - 40.0),
            n(t + h / 2.0),
            n(l - 40.0),
            n(t + h / 2.0),
            esc(y_label)
        );
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str, extra: &str) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", n(self.px(x)), n(self.py(y)))).collect();
        let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{extra}/>", pts.join(" "));
    }
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.03 * (hi - lo);
    (lo - pad, hi + pad)
}

/// PAV, Tippett or ECE plot. PAV plots carry the `y = x` reference and
/// ECE plots draw the `reference` series dotted.
pub fn render_curve(curve: &CurveData) -> String {
    let all = || curve.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = bounds(all().map(|p| p.0));
    let (mut y0, mut y1) = bounds(all().map(|p| p.1));
    if curve.kind == CurveKind::Pav {
        x0 = x0.min(y0);
        x1 = x1.max(y1);
        (y0, y1) = (x0, x1);
    }
    if curve.kind == CurveKind::Tippett {
        (y0, y1) = (0.0, 1.0);
    }
    if curve.kind == CurveKind::Ece {
        y0 = 0.0;
    }
    let f = Frame {
        x0,
        x1,
        y0,
        y1,
        left: 60.0,
        top: 20.0,
        width: 380.0,
        height: 280.0,
    };
    let mut out = header(520.0, 350.0);
    f.axes(&mut out, &curve.x_label, &curve.y_label);
    if curve.kind == CurveKind::Pav {
        f.polyline(&mut out, &[(x0, x0), (x1, x1)], "#888888", " stroke-dasharray=\"4 3\"");
    }
    let mut legend = 0;
    for (i, s) in curve.series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let dotted = curve.kind == CurveKind::Ece && s.name == "reference";
        let style = if dotted { " stroke-dasharray=\"1 3\"" } else { "" };
        let color = if dotted { "black" } else { color };
        if curve.kind == CurveKind::Tippett {
            // cumulative proportions are step functions
            let mut steps = Vec::with_capacity(2 * s.points.len());
            for (k, &(x, y)) in s.points.iter().enumerate() {
                if k > 0 {
                    steps.push((x, s.points[k - 1].1));
                }
                steps.push((x, y));
            }
            f.polyline(&mut out, &steps, color, style);
        } else {
            f.polyline(&mut out, &s.points, color, style);
        }
        let ly = f.top + 14.0 + 14.0 * legend as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"{style}/>",
            n(f.left + f.width + 8.0),
            n(ly - 4.0),
            n(f.left + f.width + 24.0),
            n(ly - 4.0)
        );
        text(&mut out, f.left + f.width + 28.0, ly, "start", &s.name);
        legend += 1;
    }
    out.push_str("</svg>\n");
    out
}

/// White to dark blue for values in `[0, 1]`.
fn shade(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// Grid of optional values; `scale_max` maps to the darkest colour.
fn grid(rows: &[String], cols: &[String], values: &[Vec<Option<f64>>], scale_max: f64, title: &str) -> String {
    let cell = 30.0;
    let label_w = 10.0 + 7.0 * rows.iter().map(|r| r.chars().count()).max().unwrap_or(0) as f64;
    let label_h = 10.0 + 7.0 * cols.iter().map(|c| c.chars().count()).max().unwrap_or(0) as f64;
    let (left, top) = (label_w, label_h + 20.0);
    let w = left + cell * cols.len() as f64 + 20.0;
    let h = top + cell * rows.len() as f64 + 20.0;
    let mut out = header(w, h);
    text(&mut out, w / 2.0, 14.0, "middle", title);
    for (j, c) in cols.iter().enumerate() {
        let x = left + cell * (j as f64 + 0.5);
        let y = top - 6.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"start\" transform=\"rotate(-90 {} {})\" {FONT}>{}</text>",
            n(x + 4.0),
            n(y),
            n(x + 4.0),
            n(y),
            esc(c)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + cell * i as f64;
        text(&mut out, left - 6.0, y + cell / 2.0 + 4.0, "end", r);
        for (j, v) in values[i].iter().enumerate() {
            let x = left + cell * j as f64;
            let (fill, label) = match v {
                Some(v) => (shade(v / scale_max), format!("{v:.2}")),
                None => ("#d9d9d9".to_string(), "NA".to_string()),
            };
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" stroke=\"white\"/>",
                n(x),
                n(y),
                n(cell),
                n(cell)
            );
            let ink = if v.map(|v| v / scale_max > 0.55).unwrap_or(false) { "white" } else { "black" };
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\" fill=\"{ink}\">{label}</text>",
                n(x + cell / 2.0),
                n(y + cell / 2.0 + 3.0)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Pairwise matrix: Cllr below the diagonal, Cllr_min above, means on it.
pub fn render_heatmap(report: &PairwiseMatrixReport) -> String {
    let title = format!("Cllr (lower), Cllr_min (upper): {} + {}", report.family, report.calibrator);
    grid(&report.activities, &report.activities, &report.matrix, 1.5, &title)
}

/// Variables by activities, values in `[0, 1]`.
pub fn render_importance(report: &ImportanceReport) -> String {
    let values: Vec<Vec<Option<f64>>> = report
        .variables
        .iter()
        .enumerate()
        .map(|(v, _)| report.values.iter().map(|row| row.get(v).copied()).collect())
        .collect();
    grid(&report.variables, &report.activities, &values, 1.0, "variable importance")
}

/// Normalized Cmxe per group combination, with an optional dotted line for
/// the naive all-activity system.
pub fn render_group_bars(rows: &[GroupSweepRow], naive: Option<f64>) -> String {
    let bar = 16.0;
    let labels: Vec<String> = rows.iter().map(|r| r.groups.join(" + ")).collect();
    let left = 10.0 + 6.5 * labels.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
    let width = 300.0;
    let top = 30.0;
    let h = top + bar * rows.len() as f64 + 50.0;
    let x_max = rows.iter().map(|r| r.result.normalized_cmxe).chain(naive).fold(1.0f64, f64::max);
    let px = |v: f64| left + v / x_max * width;
    let mut out = header(left + width + 60.0, h);
    text(&mut out, left + width / 2.0, 16.0, "middle", "normalized Cmxe per group combination");
    for (i, (r, l)) in rows.iter().zip(&labels).enumerate() {
        let y = top + bar * i as f64;
        text(&mut out, left - 6.0, y + bar / 2.0 + 4.0, "end", l);
        let v = r.result.normalized_cmxe;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            n(left),
            n(y + 2.0),
            n((px(v) - left).max(0.0)),
            n(bar - 4.0),
            PALETTE[0]
        );
        text(&mut out, px(v) + 4.0, y + bar / 2.0 + 4.0, "start", &format!("{v:.2}"));
    }
    let bottom = top + bar * rows.len() as f64;
    let _ = writeln!(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", n(left), n(bottom), n(left + width), n(bottom));
    for t in ticks(0.0, x_max) {
        text(&mut out, px(t), bottom + 14.0, "middle", &format_tick(t));
    }
    if let Some(v) = naive {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"1 3\"/>",
            n(px(v)),
            n(top),
            n(px(v)),
            n(bottom)
        );
        text(&mut out, px(v), bottom + 30.0, "middle", &format!("naive {v:.2}"));
    }
    out.push_str("</svg>\n");
    out
}

/// Likelihood rows per class over time, followed by the true and the
/// predicted class of each minute.
pub fn render_timeline(t: &Timeline) -> String {
    let cell = 18.0;
    let mut rows: Vec<String> = t.classes.clone();
    rows.push("truth".into());
    rows.push("predicted".into());
    let left = 10.0 + 7.0 * rows.iter().map(|r| r.chars().count()).max().unwrap_or(0) as f64;
    let top = 30.0;
    let w = left + cell * t.len() as f64 + 20.0;
    let h = top + cell * rows.len() as f64 + 40.0;
    let mut out = header(w, h);
    text(&mut out, w / 2.0, 16.0, "middle", "class likelihood per minute");
    for (r, name) in rows.iter().enumerate() {
        text(&mut out, left - 6.0, top + cell * r as f64 + cell / 2.0 + 4.0, "end", name);
    }
    let k = t.classes.len();
    for m in 0..t.len() {
        let x = left + cell * m as f64;
        for c in 0..k {
            let y = top + cell * c as f64;
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"white\"/>",
                n(x),
                n(y),
                n(cell),
                n(cell),
                shade(t.likelihoods[m][c])
            );
        }
        for (row, class) in [(k, t.truth[m]), (k + 1, Some(t.predicted[m]))] {
            let y = top + cell * row as f64;
            let fill = class.map(|c| PALETTE[c % PALETTE.len()]).unwrap_or("#d9d9d9");
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" stroke=\"white\"/>",
                n(x),
                n(y + 2.0),
                n(cell),
                n(cell - 4.0)
            );
        }
    }
    let ly = top + cell * rows.len() as f64 + 20.0;
    for (c, name) in t.classes.iter().enumerate() {
        let x = left + 110.0 * c as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
            n(x),
            n(ly - 9.0),
            PALETTE[c % PALETTE.len()]
        );
        text(&mut out, x + 14.0, ly, "start", name);
    }
    out.push_str("</svg>\n");
    out
}
