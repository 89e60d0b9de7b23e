//! SVG rendering: arena maps, trajectory overlays, and the summary
//! charts the analyze command emits. All output is plain generated
//! markup with `{}`-formatted floats, so identical inputs give
//! byte-identical files.

use crate::envgen::{Cell, Environment};
use crate::harness::TraceRow;
use crate::report::Quartiles;
use std::fmt::Write;

/// Pixels per meter in map renders.
const SCALE: f64 = 40.0;
const MARGIN: f64 = 10.0;

struct MapCanvas {
    svg: String,
    height_m: f64,
}

impl MapCanvas {
    fn new(width_m: f64, height_m: f64) -> Self {
        let w = width_m * SCALE + 2.0 * MARGIN;
        let h = height_m * SCALE + 2.0 * MARGIN;
        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
        );
        MapCanvas { svg, height_m }
    }

    /// World (x up-right) to SVG (y down) coordinates.
    fn pt(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + x * SCALE, MARGIN + (self.height_m - y) * SCALE)
    }

    fn finish(mut self) -> String {
        let _ = writeln!(self.svg, "</svg>");
        self.svg
    }
}

fn draw_environment(c: &mut MapCanvas, env: &Environment) {
    let g = &env.grid;
    let s = g.cell_size;
    for r in 0..g.height {
        for col in 0..g.width {
            let fill = match g.cell(col, r) {
                Cell::Wall => "#3b3b3b",
                Cell::Room => "#f1f1f1",
                _ => continue,
            };
            // Cell (col, r) spans [col*s, (col+1)*s] x [r*s, (r+1)*s];
            // its top edge in SVG is the higher world-y side.
            let (x, y) = c.pt(col as f64 * s, (r as f64 + 1.0) * s);
            let _ = writeln!(
                c.svg,
                r#"<rect x="{x}" y="{y}" width="{}" height="{}" fill="{fill}"/>"#,
                s * SCALE,
                s * SCALE
            );
        }
    }
    for seg in &env.walls {
        let (x1, y1) = c.pt(seg.a.x, seg.a.y);
        let (x2, y2) = c.pt(seg.b.x, seg.b.y);
        let _ = writeln!(
            c.svg,
            r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" stroke-width="1.5"/>"#
        );
    }
    let (sx, sy) = c.pt(env.start_pose.position.x, env.start_pose.position.y);
    let (tx, ty) = c.pt(env.target.x, env.target.y);
    let _ = writeln!(
        c.svg,
        r##"<circle cx="{sx}" cy="{sy}" r="6" fill="#2e6fdf"/><text x="{}" y="{}" font-family="monospace" font-size="13">S</text>"##,
        sx + 8.0,
        sy + 4.0
    );
    let _ = writeln!(
        c.svg,
        r##"<circle cx="{tx}" cy="{ty}" r="6" fill="#d0342c"/><text x="{}" y="{}" font-family="monospace" font-size="13">T</text>"##,
        tx + 8.0,
        ty + 4.0
    );
}

/// Render the arena: wall cells, wall outlines, start and target marks.
pub fn render_environment(env: &Environment) -> String {
    let g = &env.grid;
    let mut c = MapCanvas::new(g.width as f64 * g.cell_size, g.height as f64 * g.cell_size);
    draw_environment(&mut c, env);
    c.finish()
}

/// Render the arena with a trajectory drawn over it in green.
pub fn render_trajectory(env: &Environment, trace: &[TraceRow]) -> String {
    let g = &env.grid;
    let mut c = MapCanvas::new(g.width as f64 * g.cell_size, g.height as f64 * g.cell_size);
    draw_environment(&mut c, env);
    if !trace.is_empty() {
        let mut points = String::new();
        for row in trace {
            let (x, y) = c.pt(row.x, row.y);
            let _ = write!(points, "{x},{y} ");
        }
        let _ = writeln!(
            c.svg,
            r##"<polyline points="{}" fill="none" stroke="#1d9641" stroke-width="2"/>"##,
            points.trim_end()
        );
    }
    c.finish()
}

const CHART_W: f64 = 480.0;
const CHART_H: f64 = 320.0;
const CHART_PAD: f64 = 44.0;

fn chart_header(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_W}" height="{CHART_H}" viewBox="0 0 {CHART_W} {CHART_H}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{CHART_W}" height="{CHART_H}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="monospace" font-size="14" text-anchor="middle">{title}</text>"#,
        CHART_W / 2.0
    );
    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{CHART_PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        CHART_H - CHART_PAD,
        CHART_W - 12.0,
        CHART_H - CHART_PAD
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{CHART_PAD}" y1="28" x2="{CHART_PAD}" y2="{}" stroke="black"/>"#,
        CHART_H - CHART_PAD
    );
    svg
}

/// Bar chart of one value in [0, 1] per label (e.g. success rates).
pub fn render_bar_chart(title: &str, labels: &[&str], values: &[f64]) -> String {
    assert_eq!(labels.len(), values.len());
    let mut svg = chart_header(title);
    let span_y = CHART_H - CHART_PAD - 28.0;
    let base_y = CHART_H - CHART_PAD;
    let n = labels.len().max(1) as f64;
    let slot = (CHART_W - CHART_PAD - 12.0) / n;
    for (i, (&label, &v)) in labels.iter().zip(values).enumerate() {
        let h = v.clamp(0.0, 1.0) * span_y;
        let x = CHART_PAD + i as f64 * slot + slot * 0.15;
        let _ = writeln!(
            svg,
            r##"<rect x="{x}" y="{}" width="{}" height="{h}" fill="#4a90d9"/>"##,
            base_y - h,
            slot * 0.7
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{label}</text>"#,
            x + slot * 0.35,
            base_y + 14.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="10" text-anchor="middle">{:.0}%</text>"#,
            x + slot * 0.35,
            base_y - h - 4.0,
            v * 100.0
        );
    }
    let _ = writeln!(svg, "</svg>");
    svg
}

/// Box plot of one five-number summary per label.
pub fn render_box_plot(title: &str, labels: &[&str], boxes: &[Quartiles]) -> String {
    assert_eq!(labels.len(), boxes.len());
    let mut svg = chart_header(title);
    let top = boxes.iter().map(|b| b.max).fold(1.0_f64, f64::max);
    let span_y = CHART_H - CHART_PAD - 28.0;
    let base_y = CHART_H - CHART_PAD;
    let scale = span_y / top;
    let n = labels.len().max(1) as f64;
    let slot = (CHART_W - CHART_PAD - 12.0) / n;
    for (i, (&label, b)) in labels.iter().zip(boxes).enumerate() {
        let cx = CHART_PAD + (i as f64 + 0.5) * slot;
        let w = slot * 0.5;
        let y = |v: f64| base_y - v * scale;
        let _ = writeln!(
            svg,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y(b.min),
            y(b.q1)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y(b.q3),
            y(b.max)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{w}" height="{}" fill="#cfe3f7" stroke="black"/>"##,
            cx - w / 2.0,
            y(b.q3),
            (b.q3 - b.q1) * scale
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/>"#,
            cx - w / 2.0,
            y(b.median),
            cx + w / 2.0,
            y(b.median)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{label}</text>"#,
            base_y + 14.0
        );
    }
    // Y-axis extremes.
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="10" text-anchor="end">0</text>"#,
        CHART_PAD - 4.0,
        base_y + 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="32" font-family="monospace" font-size="10" text-anchor="end">{top:.1}</text>"#,
        CHART_PAD - 4.0
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envgen::{generate, GenParams, GridMap};

    fn test_env() -> Environment {
        Environment::from_grid(GridMap::new_open(8, 8, 1.0, (2, 2), (5, 5)))
    }

    #[test]
    fn environment_render_is_wellformed() {
        let env = test_env();
        let svg = render_environment(&env);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // 8x8 boundary ring = 28 wall cells drawn as rects (+1 white bg).
        assert_eq!(svg.matches("<rect").count(), 29);
        assert!(svg.contains(">S</text>"));
        assert!(svg.contains(">T</text>"));
    }

    #[test]
    fn y_axis_points_up() {
        let c = MapCanvas::new(8.0, 8.0);
        let (_, y_low) = c.pt(0.0, 1.0);
        let (_, y_high) = c.pt(0.0, 7.0);
        assert!(y_high < y_low, "larger world y must sit higher on screen");
    }

    #[test]
    fn trajectory_overlay_contains_the_polyline() {
        let env = test_env();
        let trace = vec![
            TraceRow {
                time: 0.0,
                x: 2.5,
                y: 2.5,
                heading: 0.0,
                est_x: 2.5,
                est_y: 2.5,
                mode: "mtg",
                v: 0.5,
                w: 0.0,
            },
            TraceRow {
                time: 0.05,
                x: 2.525,
                y: 2.5,
                heading: 0.0,
                est_x: 2.525,
                est_y: 2.5,
                mode: "mtg",
                v: 0.5,
                w: 0.0,
            },
        ];
        let svg = render_trajectory(&env, &trace);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(r##"stroke="#1d9641""##));
    }

    #[test]
    fn renders_are_deterministic() {
        let env = generate(&GenParams {
            seed: 99,
            ..GenParams::default()
        })
        .unwrap();
        assert_eq!(render_environment(&env), render_environment(&env));
    }

    #[test]
    fn charts_have_one_mark_per_label() {
        let svg = render_bar_chart("success", &["com", "bug2"], &[0.6, 0.9]);
        // Background + two bars.
        assert_eq!(svg.matches("<rect").count(), 3);
        let boxes = [
            Quartiles {
                min: 1.0,
                q1: 1.5,
                median: 2.0,
                q3: 2.5,
                max: 3.0,
            },
            Quartiles {
                min: 1.2,
                q1: 2.0,
                median: 2.8,
                q3: 3.5,
                max: 5.0,
            },
        ];
        let svg = render_box_plot("lengths", &["alg1", "alg2"], &boxes);
        assert_eq!(svg.matches("<rect").count(), 3);
    }
}
