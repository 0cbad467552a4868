use std::fmt::Write;

use crate::analytics::{AnalysisConfig, FactorScore, Region};

/// Canvas geometry for the active/passive diagram. The plot square maps
/// `[0, 100]²` affinely into the canvas minus margins, origin bottom-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotLayout {
    pub width: u32,
    pub height: u32,
    pub margin_left: u32,
    pub margin_right: u32,
    pub margin_top: u32,
    pub margin_bottom: u32,
}

impl Default for PlotLayout {
    fn default() -> Self {
        PlotLayout {
            width: 800,
            height: 800,
            margin_left: 70,
            margin_right: 30,
            margin_top: 30,
            margin_bottom: 70,
        }
    }
}

impl PlotLayout {
    fn plot_width(&self) -> f64 {
        self.width.saturating_sub(self.margin_left + self.margin_right).max(1) as f64
    }

    fn plot_height(&self) -> f64 {
        self.height.saturating_sub(self.margin_top + self.margin_bottom).max(1) as f64
    }

    /// Canvas x for a passive value in `[0, 100]`.
    pub fn x(&self, passive: f64) -> f64 {
        self.margin_left as f64 + passive / 100.0 * self.plot_width()
    }

    /// Canvas y for an active value in `[0, 100]`.
    pub fn y(&self, active: f64) -> f64 {
        self.margin_top as f64 + (1.0 - active / 100.0) * self.plot_height()
    }
}

const MARKER_SIZE: f64 = 5.0;

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// End point of the ray `active = ratio * passive` clipped to the plot square.
fn ray_end(ratio: f64) -> (f64, f64) {
    if ratio >= 1.0 {
        (100.0 / ratio, 100.0)
    } else {
        (100.0, 100.0 * ratio)
    }
}

fn marker(out: &mut String, region: Region, id: u32, cx: f64, cy: f64) {
    let r = MARKER_SIZE;
    let class = format!("marker {}", region.as_str().to_lowercase());
    match region {
        Region::Dominant => {
            let _ = writeln!(
                out,
                r##"<polygon class="{class}" data-id="{id}" points="{},{} {},{} {},{}" fill="#c0392b"/>"##,
                num(cx), num(cy - r), num(cx - r), num(cy + r), num(cx + r), num(cy + r)
            );
        }
        Region::Dynamic => {
            let _ = writeln!(
                out,
                r##"<circle class="{class}" data-id="{id}" cx="{}" cy="{}" r="{}" fill="#2874a6"/>"##,
                num(cx), num(cy), num(r)
            );
        }
        Region::Reactive => {
            let _ = writeln!(
                out,
                r##"<rect class="{class}" data-id="{id}" x="{}" y="{}" width="{}" height="{}" fill="#1e8449"/>"##,
                num(cx - r), num(cy - r), num(2.0 * r), num(2.0 * r)
            );
        }
        Region::Isolated => {
            let _ = writeln!(
                out,
                r##"<circle class="{class}" data-id="{id}" cx="{}" cy="{}" r="{}" fill="none" stroke="#7f8c8d"/>"##,
                num(cx), num(cy), num(r)
            );
        }
    }
}

/// Active/passive scatter: passive on x, active on y, both 0-100, with the
/// two region boundary rays and one labelled marker per factor.
pub fn render_scatter_svg(scores: &[FactorScore], cfg: &AnalysisConfig, layout: &PlotLayout) -> String {
    let mut out = String::new();
    let (w, h) = (layout.width, layout.height);
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="white"/>"##);

    // axes and ticks
    let (x0, y0) = (layout.x(0.0), layout.y(0.0));
    let (x1, y1) = (layout.x(100.0), layout.y(100.0));
    let _ = writeln!(out, r##"<g class="axes" stroke="black" stroke-width="1">"##);
    let _ = writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"##, num(x0), num(y0), num(x1), num(y0));
    let _ = writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"##, num(x0), num(y0), num(x0), num(y1));
    for t in (0..=100).step_by(10) {
        let tx = layout.x(t as f64);
        let ty = layout.y(t as f64);
        let _ = writeln!(out, r##"<line class="tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"##, num(tx), num(y0), num(tx), num(y0 + 5.0));
        let _ = writeln!(out, r##"<line class="tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"##, num(x0 - 5.0), num(ty), num(x0), num(ty));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g class="tick-labels" fill="black">"##);
    for t in (0..=100).step_by(10) {
        let _ = writeln!(out, r##"<text x="{}" y="{}" text-anchor="middle">{t}</text>"##, num(layout.x(t as f64)), num(y0 + 18.0));
        let _ = writeln!(out, r##"<text x="{}" y="{}" text-anchor="end">{t}</text>"##, num(x0 - 8.0), num(layout.y(t as f64) + 4.0));
    }
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="middle">passive sum (normalized)</text>"##,
        num((x0 + x1) / 2.0),
        num(y0 + 45.0)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">active sum (normalized)</text>"##,
        num(x0 - 45.0),
        num((y0 + y1) / 2.0),
        num(x0 - 45.0),
        num((y0 + y1) / 2.0)
    );
    let _ = writeln!(out, "</g>");

    // region boundaries
    let _ = writeln!(out, r##"<g class="boundaries" stroke="#999999" stroke-dasharray="6 4" stroke-width="1">"##);
    for (name, ratio) in [("dominant", cfg.dominant_ratio), ("reactive", cfg.reactive_ratio)] {
        let (px, ay) = ray_end(ratio);
        let _ = writeln!(
            out,
            r##"<line class="boundary {name}" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
            num(x0),
            num(y0),
            num(layout.x(px)),
            num(layout.y(ay))
        );
    }
    let _ = writeln!(out, "</g>");

    let mut ordered: Vec<&FactorScore> = scores.iter().collect();
    ordered.sort_by_key(|s| s.id);
    let _ = writeln!(out, r##"<g class="factors">"##);
    for s in ordered {
        let cx = layout.x(s.passive_norm);
        let cy = layout.y(s.active_norm);
        let _ = writeln!(out, r##"<g class="factor"><title>{}: {}</title>"##, s.id, escape(&s.name));
        marker(&mut out, s.region, s.id, cx, cy);
        let _ = writeln!(
            out,
            r##"<text class="label" x="{}" y="{}">{}</text>"##,
            num(cx + MARKER_SIZE + 2.0),
            num(cy - MARKER_SIZE - 2.0),
            s.id
        );
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
