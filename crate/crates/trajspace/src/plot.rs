//! Minimal deterministic SVG rendering of basis vectors: per vector, its 2D
//! path plus the x(t) and y(t) traces.

use crate::basis::TrajectoryBasis;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use std::fmt::Write as _;

const PANEL: f64 = 300.0;
const MARGIN: f64 = 30.0;

/// Render basis vector `index` as a three-panel SVG document.
pub fn basis_vector_svg(basis: &TrajectoryBasis, index: usize) -> Result<String> {
    if index >= basis.k() {
        return Err(Error::argument(format!(
            "basis vector {index} out of range (k = {})",
            basis.k()
        )));
    }
    let path = basis.vector_as_path(index);
    let label = format!("u{} ({})", index + 1, basis.segment());

    let xs: Vec<(f64, f64)> = path.iter().enumerate().map(|(t, p)| (t as f64, p.x)).collect();
    let ys: Vec<(f64, f64)> = path.iter().enumerate().map(|(t, p)| (t as f64, p.y)).collect();
    let xy: Vec<(f64, f64)> = path.iter().map(|p| (p.x, p.y)).collect();

    let mut svg = String::new();
    let width = 3.0 * PANEL;
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{PANEL}\" viewBox=\"0 0 {width} {PANEL}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{PANEL}\" fill=\"white\"/>");
    panel(&mut svg, 0.0, &xy, &format!("{label} path"), true);
    panel(&mut svg, PANEL, &xs, &format!("{label} x(t)"), false);
    panel(&mut svg, 2.0 * PANEL, &ys, &format!("{label} y(t)"), false);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One framed panel with a polyline scaled into it. `square` keeps the two
/// axes at a common scale so paths are not distorted.
fn panel(svg: &mut String, x0: f64, pts: &[(f64, f64)], title: &str, square: bool) {
    let inner = PANEL - 2.0 * MARGIN;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let mut span_x = (max_x - min_x).max(1e-12);
    let mut span_y = (max_y - min_y).max(1e-12);
    if square {
        let span = span_x.max(span_y);
        let cx = 0.5 * (min_x + max_x);
        let cy = 0.5 * (min_y + max_y);
        min_x = cx - span / 2.0;
        min_y = cy - span / 2.0;
        span_x = span;
        span_y = span;
    }

    let _ = writeln!(
        svg,
        "<rect x=\"{:.2}\" y=\"{MARGIN:.2}\" width=\"{inner:.2}\" height=\"{inner:.2}\" fill=\"none\" stroke=\"#999\"/>",
        x0 + MARGIN
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\">{title}</text>",
        x0 + MARGIN,
        MARGIN - 8.0
    );
    let mut points = String::new();
    for &(x, y) in pts {
        let px = x0 + MARGIN + (x - min_x) / span_x * inner;
        // SVG y grows downward.
        let py = MARGIN + inner - (y - min_y) / span_y * inner;
        let _ = write!(points, "{px:.4},{py:.4} ");
    }
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\"/>",
        points.trim_end()
    );
    // Mark the first point so direction is readable.
    if let Some(&(x, y)) = pts.first() {
        let px = x0 + MARGIN + (x - min_x) / span_x * inner;
        let py = MARGIN + inner - (y - min_y) / span_y * inner;
        let _ = writeln!(svg, "<circle cx=\"{px:.4}\" cy=\"{py:.4}\" r=\"3\" fill=\"#1f5fbf\"/>");
    }
}

/// Render a set of world-frame trajectories (ground truth drawn last, in a
/// distinct color). Used by the examples.
pub fn trajectories_svg(samples: &[Vec<Point2>], gt: Option<&[Point2]>) -> String {
    let mut all: Vec<(f64, f64)> = Vec::new();
    for s in samples {
        all.extend(s.iter().map(|p| (p.x, p.y)));
    }
    if let Some(g) = gt {
        all.extend(g.iter().map(|p| (p.x, p.y)));
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-12);
    let inner = PANEL - 2.0 * MARGIN;
    let to_px = |p: &Point2| {
        (
            MARGIN + (p.x - min_x) / span * inner,
            MARGIN + inner - (p.y - min_y) / span * inner,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL}\" height=\"{PANEL}\" viewBox=\"0 0 {PANEL} {PANEL}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{PANEL}\" height=\"{PANEL}\" fill=\"white\"/>");
    for s in samples {
        let mut points = String::new();
        for p in s {
            let (px, py) = to_px(p);
            let _ = write!(points, "{px:.4},{py:.4} ");
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#8ab\" stroke-width=\"1\"/>",
            points.trim_end()
        );
    }
    if let Some(g) = gt {
        let mut points = String::new();
        for p in g {
            let (px, py) = to_px(p);
            let _ = write!(points, "{px:.4},{py:.4} ");
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#d33\" stroke-width=\"2\"/>",
            points.trim_end()
        );
    }
    svg.push_str("</svg>\n");
    svg
}
