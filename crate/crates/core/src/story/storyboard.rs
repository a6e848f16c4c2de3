//! SVG storyboard: one panel per authored movement plus a group strip.

use std::fmt::Write;

use super::compile::Compiled;
use super::ResolvedStory;
use crate::camera::{footprint, CameraState, Viewport};
use crate::data::Geometry;
use crate::geo::{project, MercatorPoint};
use crate::target::GeospatialTarget;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 220.0;
const LABEL_H: f64 = 24.0;
const GAP: f64 = 16.0;
const COLUMNS: usize = 3;
const BAND_H: f64 = 28.0;

/// Axis-aligned Mercator box mapped into one panel.
#[derive(Debug, Clone, Copy)]
struct Frame {
    min: MercatorPoint,
    max: MercatorPoint,
}

impl Frame {
    fn around(points: impl IntoIterator<Item = MercatorPoint>) -> Option<Frame> {
        let mut it = points.into_iter().filter(|p| p.x.is_finite() && p.y.is_finite());
        let first = it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            min = MercatorPoint::new(min.x.min(p.x), min.y.min(p.y));
            max = MercatorPoint::new(max.x.max(p.x), max.y.max(p.y));
        }
        // Keep a visible extent for single points and clamp to the world.
        let pad = ((max.x - min.x).max(max.y - min.y) * 0.08).max(1e-5);
        let lo = |v: f64| (v - pad).max(0.0);
        let hi = |v: f64| (v + pad).min(1.0);
        Some(Frame { min: MercatorPoint::new(lo(min.x), lo(min.y)), max: MercatorPoint::new(hi(max.x), hi(max.y)) })
    }

    /// Uniform scale, centred in the panel.
    fn map(&self, p: MercatorPoint) -> (f64, f64) {
        let (w, h) = ((self.max.x - self.min.x).max(1e-12), (self.max.y - self.min.y).max(1e-12));
        let s = (PANEL_W / w).min(PANEL_H / h);
        let ox = (PANEL_W - w * s) / 2.0;
        let oy = (PANEL_H - h * s) / 2.0;
        (ox + (p.x - self.min.x) * s, oy + (p.y - self.min.y) * s)
    }
}

fn points_attr(frame: &Frame, pts: &[MercatorPoint]) -> String {
    pts.iter()
        .map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.1},{y:.1}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn footprint_pts(state: &CameraState, vp: Viewport) -> Vec<MercatorPoint> {
    footprint(state, vp).corners.to_vec()
}

fn draw_target(out: &mut String, frame: &Frame, t: &GeospatialTarget) {
    match t {
        GeospatialTarget::None => {}
        GeospatialTarget::Location { point, .. } => {
            let (x, y) = frame.map(project(*point));
            let _ = writeln!(out, r##"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="#e8590c"/>"##);
        }
        GeospatialTarget::Region { polygon, .. } => {
            let _ = writeln!(
                out,
                r##"<polygon points="{}" fill="#e8590c" fill-opacity="0.3" stroke="#e8590c"/>"##,
                points_attr(frame, &polygon.projected())
            );
        }
        GeospatialTarget::Path { path, .. } => {
            let _ = writeln!(
                out,
                r##"<polyline points="{}" fill="none" stroke="#e8590c" stroke-width="3"/>"##,
                points_attr(frame, &path.projected())
            );
        }
        GeospatialTarget::Multiple { members } => {
            for m in members {
                draw_target(out, frame, m);
            }
        }
    }
}

/// Renders the compiled story as a standalone SVG 1.1 document.
pub fn storyboard(resolved: &ResolvedStory, compiled: &Compiled) -> String {
    let vp = resolved.story.settings.viewport;
    let data_pts: Vec<MercatorPoint> =
        resolved.all_features().flat_map(|f| f.geometry.vertices()).map(project).collect();
    let movements: Vec<_> = compiled.timeline.movements().collect();
    let rows = movements.len().div_ceil(COLUMNS).max(1);
    let cols = movements.len().clamp(1, COLUMNS);
    let width = GAP + cols as f64 * (PANEL_W + GAP);
    let panels_h = GAP + rows as f64 * (PANEL_H + LABEL_H + GAP);
    let height = panels_h + BAND_H + GAP * 2.0;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#1c7ed6"/></marker></defs>"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    for (i, m) in movements.iter().enumerate() {
        let (col, row) = (i % COLUMNS, i / COLUMNS);
        let x0 = GAP + col as f64 * (PANEL_W + GAP);
        let y0 = GAP + row as f64 * (PANEL_H + LABEL_H + GAP);
        let rect_vp = compiled.info.iter().find(|inf| inf.id == m.id).map_or(vp, |inf| inf.rect.viewport());
        let a = m.plan.start_state();
        let b = m.plan.end_state();
        let fa = footprint_pts(&a, rect_vp);
        let fb = footprint_pts(&b, rect_vp);
        let target_pts: Vec<MercatorPoint> = m.plan.target().points().into_iter().map(project).collect();
        let frame = Frame::around(data_pts.iter().chain(&target_pts).chain(&fa).chain(&fb).copied())
            .unwrap_or(Frame { min: MercatorPoint::new(0.0, 0.0), max: MercatorPoint::new(1.0, 1.0) });

        let _ = writeln!(out, r#"<g id="panel-{}" transform="translate({x0:.1},{y0:.1})">"#, m.id);
        let _ = writeln!(out, r#"<clipPath id="clip-{}"><rect width="{PANEL_W}" height="{PANEL_H}"/></clipPath>"#, m.id);
        let _ = writeln!(out, r##"<rect width="{PANEL_W}" height="{PANEL_H}" fill="#f1f3f5" stroke="#868e96"/>"##);
        let _ = writeln!(out, r#"<g clip-path="url(#clip-{})">"#, m.id);
        for f in resolved.all_features() {
            match &f.geometry {
                Geometry::Point(p) => {
                    let (x, y) = frame.map(project(*p));
                    let _ = writeln!(out, r##"<circle cx="{x:.1}" cy="{y:.1}" r="1.5" fill="#adb5bd"/>"##);
                }
                Geometry::LineString(l) => {
                    let _ = writeln!(
                        out,
                        r##"<polyline points="{}" fill="none" stroke="#adb5bd"/>"##,
                        points_attr(&frame, &l.projected())
                    );
                }
                Geometry::Polygon(p) => {
                    let _ = writeln!(
                        out,
                        r##"<polygon points="{}" fill="#dee2e6" stroke="#adb5bd"/>"##,
                        points_attr(&frame, &p.projected())
                    );
                }
            }
        }
        draw_target(&mut out, &frame, m.plan.target());
        let _ = writeln!(
            out,
            r##"<polygon class="initial" points="{}" fill="none" stroke="#1c7ed6" stroke-dasharray="4 3"/>"##,
            points_attr(&frame, &fa)
        );
        let _ = writeln!(
            out,
            r##"<polygon class="final" points="{}" fill="none" stroke="#c92a2a" stroke-width="2"/>"##,
            points_attr(&frame, &fb)
        );
        let (ax, ay) = frame.map(project(a.center()));
        let (bx, by) = frame.map(project(b.center()));
        if (ax - bx).hypot(ay - by) > 2.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="#1c7ed6" stroke-width="1.5" marker-end="url(#arrow)"/>"##
            );
        }
        let _ = writeln!(out, "</g>");
        let purpose = m.plan.purpose().map_or("Manual", |p| p.name());
        let shots: Vec<&str> = m.plan.shots().iter().map(|s| s.name()).collect();
        let label = format!("{purpose}/{} @ {:.1}\u{2013}{:.1}s", shots.join("+"), m.start, m.end());
        let _ = writeln!(out, r#"<text x="4" y="{:.1}">{}</text>"#, PANEL_H + 16.0, escape(&label));
        let _ = writeln!(out, "</g>");
    }

    // Location groups as bands along the time axis, with fillers between.
    let total = compiled.timeline.end_time().max(1e-9);
    let strip_w = width - 2.0 * GAP;
    let y = panels_h + GAP;
    let _ = writeln!(out, r#"<g id="groups" transform="translate({GAP:.1},{y:.1})">"#);
    let _ = writeln!(out, r##"<rect width="{strip_w:.1}" height="{BAND_H}" fill="#f8f9fa" stroke="#ced4da"/>"##);
    for f in &compiled.timeline.fillers {
        let x = f.start / total * strip_w;
        let w = f.trajectory.duration() / total * strip_w;
        let _ = writeln!(out, r##"<rect class="filler" x="{x:.1}" width="{w:.1}" height="{BAND_H}" fill="#e9ecef"/>"##);
    }
    for (gi, g) in compiled.timeline.groups.iter().enumerate() {
        let x = g.start() / total * strip_w;
        let w = (g.end() - g.start()) / total * strip_w;
        let fill = if gi % 2 == 0 { "#a5d8ff" } else { "#ffd8a8" };
        let _ = writeln!(
            out,
            r##"<rect class="group" x="{x:.1}" width="{w:.1}" height="{BAND_H}" fill="{fill}" stroke="#495057"/>"##
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="18">{}</text>"#, x + 4.0, escape(&g.label));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
