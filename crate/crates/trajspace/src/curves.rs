//! Parametric-curve trajectory descriptors used as comparison points for the
//! learned basis: endpoint linear interpolation, Bézier curves and clamped
//! uniform B-splines, all fitted by per-axis least squares.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::linalg::solve_spd;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Linear,
    Bezier,
    Bspline,
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            CurveKind::Linear => f.write_str("linear"),
            CurveKind::Bezier => f.write_str("bezier"),
            CurveKind::Bspline => f.write_str("bspline"),
        }
    }
}

/// A fixed T x p evaluation matrix: row t holds the basis functions at the
/// t-th uniformly spaced parameter value.
#[derive(Debug, Clone)]
pub struct ParametricBasis {
    pub kind: CurveKind,
    pub order: usize,
    /// Frames per segment.
    pub frames: usize,
    /// T x p basis matrix.
    pub m: DMatrix<f64>,
    /// Knot vector (B-spline only).
    pub knots: Option<Vec<f64>>,
}

impl ParametricBasis {
    /// Control parameters per axis.
    pub fn num_controls(&self) -> usize {
        self.m.ncols()
    }

    /// Descriptor dimension (two axes).
    pub fn dim(&self) -> usize {
        2 * self.num_controls()
    }
}

/// Control points of a fitted curve, p x 2 in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoints {
    pub points: Vec<Point2>,
}

/// Bernstein polynomial basis evaluated at T uniform parameters:
/// `M[t][i] = C(order, i) τ^i (1-τ)^(order-i)` with `τ = t / (T-1)`.
pub fn bernstein_basis(order: usize, frames: usize) -> Result<ParametricBasis> {
    if order < 1 {
        return Err(Error::argument("Bézier order must be at least 1"));
    }
    if frames < 2 {
        return Err(Error::argument("need at least 2 frames"));
    }
    let p = order + 1;
    let mut m = DMatrix::zeros(frames, p);
    for t in 0..frames {
        let tau = t as f64 / (frames - 1) as f64;
        for i in 0..p {
            m[(t, i)] = binomial(order, i) * tau.powi(i as i32) * (1.0 - tau).powi((order - i) as i32);
        }
    }
    Ok(ParametricBasis { kind: CurveKind::Bezier, order, frames, m, knots: None })
}

/// B-spline basis of the given order on a clamped uniform knot vector,
/// evaluated by the Cox–de Boor recursion at T uniform parameters.
pub fn bspline_basis(order: usize, num_ctrl: usize, frames: usize) -> Result<ParametricBasis> {
    if order < 1 {
        return Err(Error::argument("B-spline order must be at least 1"));
    }
    if frames < 2 {
        return Err(Error::argument("need at least 2 frames"));
    }
    if num_ctrl < order + 1 {
        return Err(Error::argument(format!(
            "a B-spline of order {order} needs at least {} control points, got {num_ctrl}",
            order + 1
        )));
    }
    let knots = clamped_uniform_knots(order, num_ctrl);
    let mut m = DMatrix::zeros(frames, num_ctrl);
    for t in 0..frames {
        let tau = t as f64 / (frames - 1) as f64;
        let (span, values) = bspline_span_values(&knots, order, num_ctrl, tau);
        for (j, v) in values.iter().enumerate() {
            m[(t, span - order + j)] = *v;
        }
    }
    Ok(ParametricBasis { kind: CurveKind::Bspline, order, frames, m, knots: Some(knots) })
}

/// Clamped knot vector on [0, 1]: `order + 1` zeros, uniform interior knots,
/// `order + 1` ones.
fn clamped_uniform_knots(order: usize, num_ctrl: usize) -> Vec<f64> {
    let spans = num_ctrl - order;
    let mut knots = Vec::with_capacity(num_ctrl + order + 1);
    knots.extend(std::iter::repeat(0.0).take(order + 1));
    for j in 1..spans {
        knots.push(j as f64 / spans as f64);
    }
    knots.extend(std::iter::repeat(1.0).take(order + 1));
    knots
}

/// The `order + 1` basis functions that are non-zero at `tau`, plus the knot
/// span index they belong to (The NURBS Book, algorithm A2.2).
fn bspline_span_values(knots: &[f64], order: usize, num_ctrl: usize, tau: f64) -> (usize, Vec<f64>) {
    // Locate the span; tau == 1 falls into the last non-degenerate span.
    let span = if tau >= knots[num_ctrl] {
        num_ctrl - 1
    } else {
        let mut s = order;
        while s + 1 < num_ctrl && tau >= knots[s + 1] {
            s += 1;
        }
        s
    };

    let mut values = vec![0.0; order + 1];
    let mut left = vec![0.0; order + 1];
    let mut right = vec![0.0; order + 1];
    values[0] = 1.0;
    for j in 1..=order {
        left[j] = tau - knots[span + 1 - j];
        right[j] = knots[span + j] - tau;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = values[r] / denom;
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    (span, values)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Least-squares control points: `argmin_P ||M P - segment||_F`, solved per
/// axis through the normal equations.
pub fn fit_controls(basis: &ParametricBasis, segment: &[Point2]) -> Result<ControlPoints> {
    if segment.len() != basis.frames {
        return Err(Error::shape(format!(
            "segment has {} points, basis expects {}",
            segment.len(),
            basis.frames
        )));
    }
    let mtm = basis.m.transpose() * &basis.m;
    let xs = DVector::from_iterator(segment.len(), segment.iter().map(|p| p.x));
    let ys = DVector::from_iterator(segment.len(), segment.iter().map(|p| p.y));
    let px = solve_spd(&mtm, &(basis.m.transpose() * xs))?;
    let py = solve_spd(&mtm, &(basis.m.transpose() * ys))?;
    let points = (0..basis.num_controls())
        .map(|i| Point2::new(px[i], py[i]))
        .collect();
    Ok(ControlPoints { points })
}

/// Evaluate a curve from its control points: returns `M P` as T points.
pub fn reconstruct_controls(basis: &ParametricBasis, controls: &ControlPoints) -> Result<Vec<Point2>> {
    if controls.points.len() != basis.num_controls() {
        return Err(Error::shape(format!(
            "{} control points given, basis expects {}",
            controls.points.len(),
            basis.num_controls()
        )));
    }
    let mut out = vec![Point2::ZERO; basis.frames];
    for t in 0..basis.frames {
        let mut acc = Point2::ZERO;
        for (i, cp) in controls.points.iter().enumerate() {
            acc = acc + *cp * basis.m[(t, i)];
        }
        out[t] = acc;
    }
    Ok(out)
}

/// The endpoint descriptor: a segment is summarized by its first and last
/// points (dimension 4).
pub fn linear_descriptor(segment: &[Point2]) -> Result<(Point2, Point2)> {
    if segment.len() < 2 {
        return Err(Error::argument("linear descriptor needs at least 2 points"));
    }
    Ok((segment[0], segment[segment.len() - 1]))
}

/// Inverse of [`linear_descriptor`]: T points equally dividing the segment
/// between the two endpoints.
pub fn linear_expand(first: Point2, last: Point2, frames: usize) -> Vec<Point2> {
    (0..frames)
        .map(|t| {
            let alpha = t as f64 / (frames - 1) as f64;
            first + (last - first) * alpha
        })
        .collect()
}

/// Mean per-timestep distance between a segment and its descriptor round
/// trip, in meters.
pub fn curve_error(basis: &ParametricBasis, segment: &[Point2]) -> Result<f64> {
    let recon = reconstruct_controls(basis, &fit_controls(basis, segment)?)?;
    Ok(mean_point_distance(segment, &recon))
}

pub fn linear_error(segment: &[Point2]) -> Result<f64> {
    let (first, last) = linear_descriptor(segment)?;
    let recon = linear_expand(first, last, segment.len());
    Ok(mean_point_distance(segment, &recon))
}

fn mean_point_distance(a: &[Point2], b: &[Point2]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(p, q)| p.dist(*q)).sum();
    sum / a.len() as f64
}
