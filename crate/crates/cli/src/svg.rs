//! Deterministic SVG 1.1 plots. Coordinates are printed with three decimals
//! so the same input always gives the same bytes.

use crate::report::{PartitionReport, RunReport};
use flowpath::geometry::{BoundaryGeometry, Dimension, FlowScene};
use flowpath::partition::lattice_spacing;
use flowpath::Point;
use std::fmt::Write;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = ["#dbe9f6", "#fde0c5", "#d9f0d3", "#f2d7ee", "#fff2b3", "#d0e1e1", "#f6d5d5", "#e3dcf2"];

/// World-to-canvas map with the world's second axis pointing up.
struct View {
    lo: [f64; 2],
    hi: [f64; 2],
    scale: f64,
}

impl View {
    fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        View { lo, hi, scale: CANVAS / span }
    }

    fn size(&self) -> (f64, f64) {
        (
            (self.hi[0] - self.lo[0]) * self.scale + 2.0 * MARGIN,
            (self.hi[1] - self.lo[1]) * self.scale + 2.0 * MARGIN,
        )
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.lo[0]) * self.scale, MARGIN + (self.hi[1] - p[1]) * self.scale)
    }

    fn points(&self, ps: &[[f64; 2]]) -> String {
        ps.iter()
            .map(|p| {
                let (x, y) = self.map(*p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn open(out: &mut String, v: &View, title: &str) {
    let (w, h) = v.size();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn arrow(out: &mut String, v: &View, from: [f64; 2], to: [f64; 2]) {
    let (x0, y0) = v.map(from);
    let (x1, y1) = v.map(to);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = dx.hypot(dy);
    if len < 1e-9 {
        return;
    }
    let (ux, uy) = (dx / len, dy / len);
    let head = 8.0f64.min(len / 2.0);
    let (bx, by) = (x1 - ux * head, y1 - uy * head);
    let (px, py) = (-uy * head / 2.0, ux * head / 2.0);
    let _ = writeln!(
        out,
        r##"<line x1="{x0:.3}" y1="{y0:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="#4a6fa5" stroke-width="1.5"/>"##
    );
    let _ = writeln!(
        out,
        r##"<polygon points="{x1:.3},{y1:.3} {:.3},{:.3} {:.3},{:.3}" fill="#4a6fa5"/>"##,
        bx + px,
        by + py,
        bx - px,
        by - py
    );
}

/// The plot plane: `(x, y)` in 2D, the `(x, z)` side view in 3D.
fn project(scene: &FlowScene) -> impl Fn(&Point) -> [f64; 2] {
    let side = scene.dimension() == Dimension::Three;
    move |p: &Point| if side { [p.x, p.z] } else { [p.x, p.y] }
}

/// Scene regions, flow arrows, boundaries, the best path and its junctions.
/// Other co-optimal paths are dashed.
pub fn plan(scene: &FlowScene, report: &RunReport) -> String {
    let pr = project(scene);
    let (lo, hi) = scene.domain();
    let v = View::new(pr(&lo), pr(&hi));
    let mut out = String::new();
    open(&mut out, &v, &format!("{}: cost {:.6}", scene.name(), report.plan.cost));

    let _ = writeln!(out, r##"<g id="regions" stroke="#999999" stroke-width="0.5">"##);
    for (i, r) in scene.regions().iter().enumerate() {
        let verts: Vec<[f64; 2]> = r.vertices().iter().map(&pr).collect();
        if scene.dimension() == Dimension::Two && verts.len() >= 3 {
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}"/>"#, v.points(&verts), PALETTE[i % PALETTE.len()]);
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g id="boundaries" stroke="#555555" stroke-width="1">"##);
    for b in scene.boundaries() {
        let ends: Vec<[f64; 2]> = match &b.geometry {
            BoundaryGeometry::Segment { p1, p2 } => vec![pr(p1), pr(p2)],
            BoundaryGeometry::Patch(_) => {
                let vs: Vec<[f64; 2]> = b.vertices().iter().map(&pr).collect();
                let min = vs.iter().copied().min_by(|a, b| a[0].total_cmp(&b[0])).unwrap_or([0.0; 2]);
                let max = vs.iter().copied().max_by(|a, b| a[0].total_cmp(&b[0])).unwrap_or([0.0; 2]);
                vec![min, max]
            }
        };
        let _ = writeln!(out, r#"<polyline points="{}" fill="none"/>"#, v.points(&ends));
    }
    let _ = writeln!(out, "</g>");

    let max_flow = scene.regions().iter().map(|r| r.flow.norm()).fold(0.0, f64::max);
    let _ = writeln!(out, r#"<g id="flow">"#);
    if max_flow > 0.0 {
        let reach = 0.08 * scene.diameter() / max_flow;
        for r in scene.regions() {
            let c = r.centroid();
            arrow(&mut out, &v, pr(&c), pr(&(c + r.flow * reach)));
        }
    }
    let _ = writeln!(out, "</g>");

    let start = Point::from_fn(|i, _| report.start.get(i).copied().unwrap_or(0.0));
    let goal = Point::from_fn(|i, _| report.goal.get(i).copied().unwrap_or(0.0));
    let path = |pts: &[Point]| {
        let mut all = vec![pr(&start)];
        all.extend(pts.iter().map(&pr));
        all.push(pr(&goal));
        v.points(&all)
    };
    let _ = writeln!(out, r#"<g id="paths" fill="none">"#);
    for m in report.co_optimal.iter().filter(|m| m.junction_points != report.plan.junction_points) {
        let _ = writeln!(
            out,
            r##"<polyline points="{}" stroke="#c05050" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
            path(&m.junction_points)
        );
    }
    let _ = writeln!(out, r##"<polyline points="{}" stroke="#202020" stroke-width="2"/>"##, path(&report.plan.junction_points));
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="junctions">"#);
    for p in &report.plan.junction_points {
        let (x, y) = v.map(pr(p));
        let _ = writeln!(out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="#d08020"/>"##);
    }
    for (p, colour) in [(start, "#208040"), (goal, "#a02020")] {
        let (x, y) = v.map(pr(&p));
        let _ = writeln!(out, r#"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="{colour}"/>"#, x - 4.0, y - 4.0);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// Grid cells coloured by cluster, with the fitted boundary lines.
pub fn partition(report: &PartitionReport) -> String {
    let grid = &report.grid;
    let (lo, hi) = grid.bounds();
    let half = lattice_spacing(grid) / 2.0;
    let v = View::new([lo[0] - half, lo[1] - half], [hi[0] + half, hi[1] + half]);
    let mut out = String::new();
    open(&mut out, &v, &format!("partition into {} regions", report.result.k));
    let cell = 2.0 * half * v.scale;
    let _ = writeln!(out, r#"<g id="cells" stroke="none">"#);
    for (p, &l) in grid.positions.iter().zip(&report.result.labels) {
        let (x, y) = v.map([p[0] - half, p[1] + half]);
        let _ = writeln!(
            out,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{cell:.3}" height="{cell:.3}" fill="{}"/>"#,
            PALETTE[l % PALETTE.len()]
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="lines" stroke="#c02020" stroke-width="2">"##);
    for b in &report.result.boundaries {
        if let Some(seg) = b.line.as_ref().and_then(|l| l.clip(lo, hi)) {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none"/>"#, v.points(&seg));
        }
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
