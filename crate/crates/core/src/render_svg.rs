//! Headless SVG rendering of a layout under a selection.
//!
//! Output is byte-deterministic: coordinates are rounded to three decimals
//! and elements are emitted in layout order. Document order is axes, boxes,
//! inactive runs, active runs, so gray-out never covers highlighted lines.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

use crate::data_model::AxisKind;
use crate::error::RenderError;
use crate::layout::{round3, ClusterBox, LayoutModel};
use crate::selection::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub width: f64,
    pub height: f64,
    pub margin_top: f64,
    pub margin_right: f64,
    pub margin_bottom: f64,
    pub margin_left: f64,
    /// Width of the cluster boxes on temporal axes.
    pub box_width: f64,
    pub stroke_active: f64,
    pub stroke_inactive: f64,
    pub trend_stroke: f64,
    pub active_color: String,
    pub grayout_color: String,
    pub font_family: String,
    pub font_size: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 1600.0,
            height: 900.0,
            margin_top: 50.0,
            margin_right: 40.0,
            margin_bottom: 50.0,
            margin_left: 40.0,
            box_width: 120.0,
            stroke_active: 1.2,
            stroke_inactive: 0.8,
            trend_stroke: 1.0,
            active_color: "#2b4a6f".into(),
            grayout_color: "#d0d0d0".into(),
            font_family: "sans-serif".into(),
            font_size: 12.0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        let positive = [
            ("width", self.width),
            ("height", self.height),
            ("box_width", self.box_width),
            ("stroke_active", self.stroke_active),
            ("stroke_inactive", self.stroke_inactive),
            ("trend_stroke", self.trend_stroke),
            ("font_size", self.font_size),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(RenderError::Config(format!("{name} = {v} must be positive")));
        }
        let margins = [
            ("margin_top", self.margin_top, self.height),
            ("margin_bottom", self.margin_bottom, self.height),
            ("margin_left", self.margin_left, self.width),
            ("margin_right", self.margin_right, self.width),
        ];
        for (name, m, dim) in margins {
            if !(m.is_finite() && m >= 0.0 && m < dim / 2.0) {
                return Err(RenderError::Config(format!("{name} = {m} must be in [0, {})", dim / 2.0)));
            }
        }
        for (name, color) in [("active_color", &self.active_color), ("grayout_color", &self.grayout_color)] {
            if color.is_empty() || color.contains(['"', '<', '>', '&']) {
                return Err(RenderError::Config(format!("{name} '{color}' is not a plain color")));
            }
        }
        Ok(())
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    round3(v).to_string()
}

/// Pixel frame derived from a config and axis count.
struct Frame {
    top: f64,
    bottom: f64,
    xs: Vec<f64>,
    box_width: f64,
}

impl Frame {
    fn new(cfg: &RenderConfig, axes: usize) -> Self {
        let inner = cfg.width - cfg.margin_left - cfg.margin_right;
        let spacing = if axes > 1 { inner / (axes - 1) as f64 } else { inner };
        let box_width = cfg.box_width.min(0.8 * spacing).min(inner);
        let left = cfg.margin_left + box_width / 2.0;
        let right = cfg.width - cfg.margin_right - box_width / 2.0;
        let xs = match axes {
            0 => vec![],
            1 => vec![(left + right) / 2.0],
            n => (0..n).map(|i| left + (right - left) * i as f64 / (n - 1) as f64).collect(),
        };
        Self {
            top: cfg.margin_top,
            bottom: cfg.height - cfg.margin_bottom,
            xs,
            box_width,
        }
    }

    /// Unit height (0 = bottom) to pixels.
    fn y(&self, u: f64) -> f64 {
        self.bottom - u * (self.bottom - self.top)
    }
}

/// Box-local trend coordinates to pixels, with a small inner padding.
fn trend_point(frame: &Frame, x_center: f64, b: &ClusterBox, p: [f64; 2]) -> (f64, f64) {
    let (y_lo, y_hi) = (frame.y(b.y0), frame.y(b.y1));
    let pad_x = (frame.box_width * 0.06).min(6.0);
    let pad_y = ((y_lo - y_hi) * 0.1).min(4.0);
    let x0 = x_center - frame.box_width / 2.0 + pad_x;
    let w = frame.box_width - 2.0 * pad_x;
    let h = (y_lo - y_hi) - 2.0 * pad_y;
    (x0 + p[0] * w, y_lo - pad_y - p[1] * h)
}

fn path_d(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, num(*x), num(*y));
    }
    d
}

/// Renders `layout` with `partition` deciding which runs are highlighted;
/// runs missing from `partition.active` are drawn grayed out.
pub fn render(layout: &LayoutModel, partition: &Partition, cfg: &RenderConfig) -> Result<Vec<u8>, RenderError> {
    cfg.validate()?;
    let frame = Frame::new(cfg, layout.axes.len());
    let x_of = |axis: &str| layout.axis(axis).map(|a| frame.xs[a.position]);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="{f}" font-size="{fs}">"#,
        w = num(cfg.width),
        h = num(cfg.height),
        f = escape(&cfg.font_family),
        fs = num(cfg.font_size),
    );
    let _ = writeln!(s, r#"<rect class="background" x="0" y="0" width="{}" height="{}" fill="white"/>"#, num(cfg.width), num(cfg.height));

    s.push_str("<g class=\"axes\">\n");
    for axis in &layout.axes {
        let x = frame.xs[axis.position];
        let _ = writeln!(
            s,
            r##"<line class="axis" data-axis="{id}" x1="{x}" y1="{t}" x2="{x}" y2="{b}" stroke="#555" stroke-width="1"/>"##,
            id = escape(&axis.id),
            x = num(x),
            t = num(frame.top),
            b = num(frame.bottom),
        );
        let _ = writeln!(
            s,
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(x),
            num((frame.top - cfg.font_size).max(cfg.font_size)),
            escape(&axis.id)
        );
        if axis.kind == AxisKind::Scalar {
            if let Some(scale) = layout.scale(&axis.id) {
                for tick in &scale.ticks {
                    let y = frame.y(tick.y);
                    let _ = writeln!(
                        s,
                        r##"<line class="tick" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#555" stroke-width="1"/>"##,
                        num(x - 4.0),
                        num(x),
                        y = num(y),
                    );
                    let _ = writeln!(
                        s,
                        r#"<text class="tick-label" x="{}" y="{}" text-anchor="end">{}</text>"#,
                        num(x - 6.0),
                        num(y + cfg.font_size / 3.0),
                        round3(tick.value)
                    );
                }
            }
        }
    }
    s.push_str("</g>\n<g class=\"boxes\">\n");
    for b in &layout.boxes {
        let Some(x) = x_of(&b.axis) else { continue };
        let _ = writeln!(
            s,
            r#"<rect class="cluster-box" data-axis="{a}" data-cluster="{c}" x="{x}" y="{y}" width="{w}" height="{h}" rx="3" fill="{fill}" fill-opacity="0.35" stroke="{fill}"/>"#,
            a = escape(&b.axis),
            c = b.cluster,
            x = num(x - frame.box_width / 2.0),
            y = num(frame.y(b.y1)),
            w = num(frame.box_width),
            h = num(frame.y(b.y0) - frame.y(b.y1)),
            fill = b.color.css(),
        );
    }
    s.push_str("</g>\n");

    for active in [false, true] {
        let (class, stroke, width) = if active {
            ("active", cfg.active_color.as_str(), cfg.stroke_active)
        } else {
            ("inactive", cfg.grayout_color.as_str(), cfg.stroke_inactive)
        };
        let _ = writeln!(s, r#"<g class="{class}">"#);
        for line in &layout.polylines {
            if partition.is_active(&line.run_id) != active {
                continue;
            }
            let mut pts = Vec::new();
            for cp in &line.points {
                let Some(axis) = layout.axis(&cp.axis) else { continue };
                let x = frame.xs[axis.position];
                let y = frame.y(cp.y);
                if axis.kind == AxisKind::Temporal {
                    pts.push((x - frame.box_width / 2.0, y));
                    pts.push((x + frame.box_width / 2.0, y));
                } else {
                    pts.push((x, y));
                }
            }
            let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline class="run {class}" data-run="{r}" points="{p}" fill="none" stroke="{stroke}" stroke-width="{w}" stroke-opacity="0.6"/>"#,
                r = escape(&line.run_id),
                p = coords.join(" "),
                w = num(width),
            );
        }
        for b in &layout.boxes {
            let Some(x) = x_of(&b.axis) else { continue };
            let color = if active {
                format!("hsl({}, {}%, 30%)", round3(b.color.h), round3(b.color.s * 100.0))
            } else {
                cfg.grayout_color.clone()
            };
            for t in &b.trends {
                if partition.is_active(&t.run_id) != active {
                    continue;
                }
                let pts: Vec<(f64, f64)> = t.points.iter().map(|&p| trend_point(&frame, x, b, p)).collect();
                let _ = writeln!(
                    s,
                    r#"<path class="trend {class}" data-axis="{a}" data-run="{r}" d="{d}" fill="none" stroke="{color}" stroke-width="{w}"/>"#,
                    a = escape(&b.axis),
                    r = escape(&t.run_id),
                    d = path_d(&pts),
                    w = num(cfg.trend_stroke),
                );
            }
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s.into_bytes())
}

/// Element counts used by audits: `(runs, boxes, trends)`.
pub fn count_elements(svg: &str) -> (usize, usize, usize) {
    (
        svg.matches("<polyline class=\"run ").count(),
        svg.matches("<rect class=\"cluster-box\"").count(),
        svg.matches("<path class=\"trend ").count(),
    )
}

/// Every number found in coordinate attributes, as `(is_x, value)`.
pub fn coordinates(svg: &str) -> Vec<(bool, f64)> {
    let mut out = Vec::new();
    for (attr, is_x) in [
        (" x=\"", true),
        (" x1=\"", true),
        (" x2=\"", true),
        (" y=\"", false),
        (" y1=\"", false),
        (" y2=\"", false),
    ] {
        for part in svg.split(attr).skip(1) {
            if let Some(v) = part.split('"').next().and_then(|v| v.parse().ok()) {
                out.push((is_x, v));
            }
        }
    }
    for part in svg.split(" points=\"").skip(1) {
        for pair in part.split('"').next().unwrap_or("").split_whitespace() {
            if let Some((x, y)) = pair.split_once(',') {
                out.extend(x.parse().ok().map(|v| (true, v)));
                out.extend(y.parse().ok().map(|v| (false, v)));
            }
        }
    }
    for part in svg.split(" d=\"").skip(1) {
        let d = part.split('"').next().unwrap_or("");
        let nums: Vec<f64> = d
            .split(|c: char| c == 'M' || c == 'L' || c.is_whitespace())
            .filter_map(|t| t.parse().ok())
            .collect();
        for pair in nums.chunks(2) {
            if let [x, y] = pair {
                out.push((true, *x));
                out.push((false, *y));
            }
        }
    }
    out
}
