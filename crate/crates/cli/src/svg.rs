// SPDX-License-Identifier: Apache-2.0

//! Minimal polyline plots as standalone SVG.

use std::fmt::Write as _;

/// Values at or below this are drawn at the floor of a log axis, with a marker.
pub const LOG_FLOOR: f64 = 1e-16;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const DASHES: [&str; 3] = ["", "6 3", "2 3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub threshold: Option<Threshold>,
}

impl Axes {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale, y_scale: Scale) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale,
            y_scale,
            threshold: None,
        }
    }

    pub fn with_threshold(mut self, value: f64, label: &str) -> Self {
        self.threshold = Some(Threshold {
            value,
            label: label.into(),
        });
        self
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvgError {
    #[error("a plot needs at least one series")]
    NoSeries,
}

/// Axis-space value, or `None` for points that cannot be drawn. The flag
/// marks values raised to the log floor.
fn transform(v: f64, scale: Scale) -> Option<(f64, bool)> {
    if !v.is_finite() {
        return None;
    }
    match scale {
        Scale::Linear => Some((v, false)),
        Scale::Log if v <= LOG_FLOOR => Some((LOG_FLOOR.log10(), true)),
        Scale::Log => Some((v.log10(), false)),
    }
}

struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>, scale: Scale) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        match scale {
            Scale::Log => Range {
                lo: lo.floor().min(hi.ceil() - 1.0),
                hi: hi.ceil(),
            },
            Scale::Linear if hi - lo <= f64::EPSILON * hi.abs().max(1.0) => Range {
                lo: lo - 1.0,
                hi: hi + 1.0,
            },
            Scale::Linear => {
                let pad = 0.05 * (hi - lo);
                Range {
                    lo: lo - pad,
                    hi: hi + pad,
                }
            }
        }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }

    fn ticks(&self, scale: Scale) -> Vec<(f64, String)> {
        match scale {
            Scale::Log => {
                let span = (self.hi - self.lo).round() as i64;
                let stride = (span / 8).max(1);
                (self.lo.round() as i64..=self.hi.round() as i64)
                    .filter(|e| (e - self.lo.round() as i64) % stride == 0)
                    .map(|e| (e as f64, format!("1e{e}")))
                    .collect()
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .into_iter()
                    .map(|m| m * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last)
                    .map(|k| {
                        let v = k as f64 * step;
                        (v, format_tick(v, step))
                    })
                    .collect()
            }
        }
    }
}

fn format_tick(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < 0.5 * step { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the series as one SVG document. Non-finite values break the
/// polyline; on a log axis values at or below [`LOG_FLOOR`] are clamped to it
/// and drawn with a hollow marker.
pub fn render(series: &[Series], axes: &Axes) -> Result<String, SvgError> {
    if series.is_empty() {
        return Err(SvgError::NoSeries);
    }
    let mapped: Vec<Vec<Option<(f64, f64, bool)>>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .map(|&(x, y)| {
                    let (x, xc) = transform(x, axes.x_scale)?;
                    let (y, yc) = transform(y, axes.y_scale)?;
                    Some((x, y, xc || yc))
                })
                .collect()
        })
        .collect();
    let all = || mapped.iter().flatten().flatten();
    let xr = Range::of(all().map(|p| p.0), axes.x_scale);
    let threshold_y = axes
        .threshold
        .as_ref()
        .and_then(|t| transform(t.value, axes.y_scale))
        .map(|t| t.0);
    let yr = Range::of(all().map(|p| p.1).chain(threshold_y), axes.y_scale);

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let px = |x: f64| xr.map(x, x0, x1);
    let py = |y: f64| yr.map(y, y0, y1);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (v, label) in xr.ticks(axes.x_scale) {
        let x = px(v);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            y0 + 16.0
        );
    }
    for (v, label) in yr.ticks(axes.y_scale) {
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&axes.y_label)
    );
    if let (Some(t), Some(ty)) = (&axes.threshold, threshold_y) {
        let y = py(ty);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#555555" stroke-dasharray="8 4"/><text x="{:.2}" y="{:.2}" text-anchor="end" fill="#555555">{}</text>"##,
            x1 - 4.0,
            y - 4.0,
            escape(&t.label)
        );
    }

    for (k, (s, pts)) in series.iter().zip(&mapped).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let dash = DASHES[(k / COLORS.len() + k) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for p in pts {
            match p {
                Some((x, y, _)) => runs.last_mut().expect("run").push((px(*x), py(*y))),
                None => runs.push(Vec::new()),
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let coords: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash_attr} points="{}"/>"#,
                coords.join(" ")
            );
        }
        for (x, y, _) in pts.iter().flatten().filter(|p| p.2) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="white" stroke="{color}" stroke-width="1.5"/>"#,
                px(*x),
                py(*y)
            );
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = x1 + 14.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.8"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 28.0,
            lx + 34.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
