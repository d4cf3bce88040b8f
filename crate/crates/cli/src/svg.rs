//! Self-contained SVG figures. Coordinates are printed with fixed precision
//! so identical data give identical bytes.

use std::fmt::Write as _;

use qgraph::amo::ButterflyDataset;

use crate::CliError;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// A sampled curve `y(x)` over admissible horizontal strips, with marked
/// x-intervals (bands or gaps) and isolated points (flat bands).
#[derive(Debug, Clone, Default)]
pub struct CurvePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub curve: Vec<(f64, f64)>,
    pub strips: Vec<(f64, f64)>,
    pub marks: Vec<(f64, f64)>,
    pub points: Vec<f64>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions at a 1-2-5 step, about five per axis.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), decimals)
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, v + 0.0);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') { s[1..].into() } else { s }
}

/// Six significant digits, trailing zeros dropped, for titles.
pub fn short(x: f64) -> String {
    let s = format!("{:.6}", x + 0.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    let (xt, xd) = ticks(f.x.0, f.x.1);
    for xv in xt {
        let px = f.px(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 5.0,
            y1 + 18.0,
            tick_label(xv, xd)
        );
    }
    let (yt, yd) = ticks(f.y.0, f.y.1);
    for yv in yt {
        let py = f.py(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv, yd)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn check_frame(x: (f64, f64), y: (f64, f64)) -> Result<(), CliError> {
    let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
    if ok(x) && ok(y) {
        Ok(())
    } else {
        Err(CliError::Usage("plot range is empty".into()))
    }
}

/// Splits the curve where it leaves the view or stops being finite.
fn polylines(curve: &[(f64, f64)], f: &Frame) -> Vec<String> {
    let mut lines = Vec::new();
    let mut cur = String::new();
    let span = f.y.1 - f.y.0;
    let mut prev = f64::NAN;
    for &(x, y) in curve {
        // a jump larger than the view is a pole, not a steep stretch
        if (y - prev).abs() > span && !cur.is_empty() {
            lines.push(std::mem::take(&mut cur));
        }
        prev = y;
        if y.is_finite() && y >= f.y.0 && y <= f.y.1 {
            let _ = write!(cur, "{:.2},{:.2} ", f.px(x), f.py(y));
        } else if !cur.is_empty() {
            lines.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        lines.push(cur);
    }
    lines
}

pub fn render_curve(plot: &CurvePlot) -> Result<String, CliError> {
    if plot.curve.is_empty() && plot.marks.is_empty() && plot.points.is_empty() {
        return Err(CliError::Usage("nothing to plot: the dataset is empty".into()));
    }
    check_frame(plot.x_range, plot.y_range)?;
    let f = Frame {
        x: plot.x_range,
        y: plot.y_range,
    };
    let mut out = String::new();
    header(&mut out, &plot.title);
    for &(lo, hi) in &plot.strips {
        let (lo, hi) = (lo.max(f.y.0), hi.min(f.y.1));
        if lo > hi {
            continue;
        }
        let _ = writeln!(
            out,
            r##"<rect x="{LEFT:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" fill-opacity="0.5"/>"##,
            f.py(hi),
            W - LEFT - RIGHT,
            (f.py(lo) - f.py(hi)).max(0.5)
        );
    }
    for &(lo, hi) in &plot.marks {
        let (lo, hi) = (lo.max(f.x.0), hi.min(f.x.1));
        if lo > hi {
            continue;
        }
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="8" fill="#e6550d"/>"##,
            f.px(lo),
            H - BOTTOM - 8.0,
            (f.px(hi) - f.px(lo)).max(1.0)
        );
    }
    for &e in &plot.points {
        if e < f.x.0 || e > f.x.1 {
            continue;
        }
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#31a354"/>"##,
            f.px(e),
            H - BOTTOM - 4.0
        );
    }
    for pts in polylines(&plot.curve, &f) {
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.2"/>"#, pts.trim_end());
    }
    axes(&mut out, &f, &plot.x_label, &plot.y_label);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Bands of each rational frequency as horizontal segments at height `p/q`.
pub fn render_butterfly(data: &ButterflyDataset) -> Result<String, CliError> {
    if data.rows.iter().all(|r| r.bands.is_empty()) {
        return Err(CliError::Usage("nothing to plot: the butterfly has no bands".into()));
    }
    let e = 2.0 + data.lambda.abs();
    let f = Frame {
        x: (-e, e),
        y: (0.0, 1.0),
    };
    let mut out = String::new();
    header(&mut out, &format!("Spectrum vs flux, lambda = {}", short(data.lambda)));
    for row in &data.rows {
        let mu = row.p as f64 / row.q as f64;
        for b in &row.bands {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
                f.px(b.lo),
                f.py(mu),
                f.px(b.hi).max(f.px(b.lo) + 0.5),
                f.py(mu)
            );
        }
    }
    axes(&mut out, &f, "energy", "mu = p/q");
    out.push_str("</svg>\n");
    Ok(out)
}
