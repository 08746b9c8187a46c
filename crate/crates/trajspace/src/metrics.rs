//! Evaluation metrics for multi-modal predictions (best-of-s ADE/FDE,
//! temporal correlation, collision rate), the training losses, and the
//! non-linearity classifier used by the ablation protocols.

use crate::basis::Coefficients;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The s candidate futures predicted for one tracklet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    /// s trajectories of T_fut points each, world frame, meters.
    pub trajectories: Vec<Vec<Point2>>,
}

impl PredictionSet {
    pub fn new(trajectories: Vec<Vec<Point2>>) -> Self {
        PredictionSet { trajectories }
    }

    pub fn samples(&self) -> usize {
        self.trajectories.len()
    }

    fn check_against(&self, gt: &[Point2]) -> Result<()> {
        if self.trajectories.is_empty() {
            return Err(Error::shape("prediction set holds no samples".to_string()));
        }
        for (i, t) in self.trajectories.iter().enumerate() {
            if t.len() != gt.len() {
                return Err(Error::shape(format!(
                    "sample {i} has {} points, ground truth has {}",
                    t.len(),
                    gt.len()
                )));
            }
        }
        Ok(())
    }
}

fn mean_displacement(pred: &[Point2], gt: &[Point2]) -> f64 {
    let sum: f64 = pred.iter().zip(gt).map(|(p, g)| p.dist(*g)).sum();
    sum / gt.len() as f64
}

/// Index of the sample with the smallest mean displacement (ties go to the
/// lowest index).
pub fn best_ade_index(pred: &PredictionSet, gt: &[Point2]) -> Result<usize> {
    pred.check_against(gt)?;
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (i, traj) in pred.trajectories.iter().enumerate() {
        let err = mean_displacement(traj, gt);
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    Ok(best)
}

/// Average displacement error: the minimum over samples of the mean
/// per-timestep distance to the ground truth.
pub fn ade(pred: &PredictionSet, gt: &[Point2]) -> Result<f64> {
    pred.check_against(gt)?;
    Ok(pred
        .trajectories
        .iter()
        .map(|t| mean_displacement(t, gt))
        .fold(f64::INFINITY, f64::min))
}

/// Final displacement error: the minimum over samples of the last-timestep
/// distance to the ground truth.
pub fn fde(pred: &PredictionSet, gt: &[Point2]) -> Result<f64> {
    pred.check_against(gt)?;
    let last = gt.len() - 1;
    Ok(pred
        .trajectories
        .iter()
        .map(|t| t[last].dist(gt[last]))
        .fold(f64::INFINITY, f64::min))
}

/// Temporal correlation coefficient on the best-ADE sample: the Pearson
/// correlation of the x series with the ground-truth x series, likewise for
/// y, averaged. A zero-variance series contributes 0.
pub fn tcc(pred: &PredictionSet, gt: &[Point2]) -> Result<f64> {
    pred.check_against(gt)?;
    if gt.len() < 2 {
        return Err(Error::argument("TCC needs at least 2 future frames"));
    }
    let best = &pred.trajectories[best_ade_index(pred, gt)?];
    let xs = pearson(
        best.iter().map(|p| p.x),
        gt.iter().map(|p| p.x),
        gt.len(),
    );
    let ys = pearson(
        best.iter().map(|p| p.y),
        gt.iter().map(|p| p.y),
        gt.len(),
    );
    Ok(0.5 * (xs + ys))
}

fn pearson(
    a: impl Iterator<Item = f64> + Clone,
    b: impl Iterator<Item = f64> + Clone,
    n: usize,
) -> f64 {
    let nf = n as f64;
    let mean_a = a.clone().sum::<f64>() / nf;
    let mean_b = b.clone().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    cov / (var_a.sqrt() * var_b.sqrt())
}

/// How collision checking pairs up samples across pedestrians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionMode {
    /// Each pedestrian is represented by its best-ADE sample.
    BestAde,
    /// A pair collides if any of the s x s sample pairings collides.
    AllPairs,
}

/// Collision counts for the pedestrians sharing one scene window: a pair
/// collides when the evaluated trajectories come within `threshold` meters
/// at any common timestep. `None` when fewer than two pedestrians share the
/// window.
pub fn collision_cases(
    window: &[(&PredictionSet, &[Point2])],
    threshold: f64,
    mode: CollisionMode,
) -> Result<Option<(usize, usize)>> {
    if threshold < 0.0 {
        return Err(Error::argument("collision threshold must be non-negative"));
    }
    if window.len() < 2 {
        return Ok(None);
    }
    let selected: Vec<usize> = window
        .iter()
        .map(|(pred, gt)| best_ade_index(pred, gt))
        .collect::<Result<_>>()?;

    let mut colliding = 0;
    let mut total = 0;
    for i in 0..window.len() {
        for j in (i + 1)..window.len() {
            total += 1;
            let hit = match mode {
                CollisionMode::BestAde => trajectories_collide(
                    &window[i].0.trajectories[selected[i]],
                    &window[j].0.trajectories[selected[j]],
                    threshold,
                ),
                CollisionMode::AllPairs => window[i].0.trajectories.iter().any(|a| {
                    window[j]
                        .0
                        .trajectories
                        .iter()
                        .any(|b| trajectories_collide(a, b, threshold))
                }),
            };
            if hit {
                colliding += 1;
            }
        }
    }
    Ok(Some((colliding, total)))
}

/// Collision percentage for one window; see [`collision_cases`].
pub fn col(
    window: &[(&PredictionSet, &[Point2])],
    threshold: f64,
    mode: CollisionMode,
) -> Result<Option<f64>> {
    Ok(collision_cases(window, threshold, mode)?
        .map(|(hits, total)| 100.0 * hits as f64 / total as f64))
}

fn trajectories_collide(a: &[Point2], b: &[Point2], threshold: f64) -> bool {
    a.iter().zip(b).any(|(p, q)| p.dist(*q) < threshold)
}

/// Winner-takes-all coefficient loss for one tracklet: the minimum over
/// candidate rows of the Euclidean distance to the ground-truth coefficients.
pub fn loss_coeff(candidates: &DMatrix<f64>, gt: &Coefficients) -> Result<f64> {
    if candidates.ncols() != gt.values.len() {
        return Err(Error::shape(format!(
            "candidates have {} columns, ground-truth coefficients have {}",
            candidates.ncols(),
            gt.values.len()
        )));
    }
    let mut best = f64::INFINITY;
    for row in candidates.row_iter() {
        let d = (row.transpose() - &gt.values).norm();
        best = best.min(d);
    }
    Ok(best)
}

/// Winner-takes-all time-averaged displacement for one tracklet. Identical
/// to [`ade`] by construction.
pub fn loss_dist(pred: &PredictionSet, gt: &[Point2]) -> Result<f64> {
    ade(pred, gt)
}

/// Winner-takes-all endpoint displacement for one tracklet. Identical to
/// [`fde`] by construction.
pub fn loss_end(pred: &PredictionSet, gt: &[Point2]) -> Result<f64> {
    fde(pred, gt)
}

/// The three training-loss terms and their weighted combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_coeff: f64,
    pub l_dist: f64,
    pub l_end: f64,
    pub alpha: f64,
    pub beta: f64,
    pub total: f64,
}

impl LossReport {
    pub fn new(l_coeff: f64, l_dist: f64, l_end: f64, alpha: f64, beta: f64) -> Self {
        LossReport {
            l_coeff,
            l_dist,
            l_end,
            alpha,
            beta,
            total: l_coeff + alpha * l_dist + beta * l_end,
        }
    }
}

/// True when the future deviates from its best straight-line-in-time fit by
/// more than `tol` meters on average.
pub fn classify_nonlinear(fut: &[Point2], tol: f64) -> Result<bool> {
    if fut.len() < 2 {
        return Err(Error::argument("nonlinearity test needs at least 2 points"));
    }
    Ok(linear_fit_error(fut) > tol)
}

/// Mean distance between the points and the least-squares line in time
/// (per-axis affine regression on the frame index).
pub fn linear_fit_error(points: &[Point2]) -> f64 {
    let n = points.len() as f64;
    let mean_t = (points.len() - 1) as f64 / 2.0;
    let var_t: f64 = (0..points.len())
        .map(|t| (t as f64 - mean_t) * (t as f64 - mean_t))
        .sum();
    let mean_x = points.iter().map(|p| p.x).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.y).sum::<f64>() / n;
    let mut cov_x = 0.0;
    let mut cov_y = 0.0;
    for (t, p) in points.iter().enumerate() {
        cov_x += (t as f64 - mean_t) * (p.x - mean_x);
        cov_y += (t as f64 - mean_t) * (p.y - mean_y);
    }
    let slope_x = cov_x / var_t;
    let slope_y = cov_y / var_t;
    let mut err = 0.0;
    for (t, p) in points.iter().enumerate() {
        let fit = Point2::new(
            mean_x + slope_x * (t as f64 - mean_t),
            mean_y + slope_y * (t as f64 - mean_t),
        );
        err += p.dist(fit);
    }
    err / n
}
