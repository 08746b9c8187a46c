//! Seeded, fully deterministic Lloyd k-means with k-means++ initialization.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// s x d centroid matrix (one centroid per row).
    pub centroids: DMatrix<f64>,
    /// Cluster index per input row.
    pub assignments: Vec<usize>,
    /// Final sum of squared point-to-centroid distances.
    pub inertia: f64,
    /// Inertia recorded after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

/// Cluster the rows of `points` (n x d) into `s` groups.
///
/// Identical inputs and seed give bit-identical output: ties in assignment
/// go to the lowest centroid index and the k-means++ draws come from a
/// seeded generator. Clusters that empty out are reseeded to the point
/// farthest from its assigned centroid.
pub fn kmeans(points: &DMatrix<f64>, s: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    let n = points.nrows();
    let d = points.ncols();
    if s < 1 {
        return Err(Error::argument("need at least one cluster"));
    }
    if n < s {
        return Err(Error::argument(format!(
            "cannot form {s} clusters from {n} points"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, s, &mut rng);

    let mut assignments = vec![usize::MAX; n];
    let mut inertia = f64::INFINITY;
    let mut history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;

        // Assignment step.
        let mut changed = false;
        let mut total = 0.0;
        for i in 0..n {
            let (best, dist) = nearest_centroid(points, i, &centroids);
            total += dist;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        inertia = total;
        history.push(total);
        if !changed {
            break;
        }

        // Update step.
        let mut sums = DMatrix::<f64>::zeros(s, d);
        let mut counts = vec![0usize; s];
        for i in 0..n {
            counts[assignments[i]] += 1;
            for j in 0..d {
                sums[(assignments[i], j)] += points[(i, j)];
            }
        }
        for c in 0..s {
            if counts[c] > 0 {
                for j in 0..d {
                    centroids[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            } else {
                // Reseed an empty cluster to the worst-served point.
                let far = farthest_point(points, &assignments, &centroids);
                for j in 0..d {
                    centroids[(c, j)] = points[(far, j)];
                }
                assignments[far] = c;
            }
        }
    }

    Ok(KMeansResult { centroids, assignments, inertia, inertia_history: history, iterations })
}

fn plus_plus_init(points: &DMatrix<f64>, s: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let d = points.ncols();
    let mut centroids = DMatrix::zeros(s, d);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from(&points.row(first));

    let mut dist2: Vec<f64> = (0..n)
        .map(|i| row_dist2(points, i, &centroids, 0))
        .collect();
    for c in 1..s {
        let total: f64 = dist2.iter().sum();
        let chosen = if total > 0.0 {
            // D^2 sampling: one uniform draw walked through the cumulative mass.
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, w) in dist2.iter().enumerate() {
                acc += w;
                if target < acc {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            // Every point coincides with a centroid; take the lowest index
            // that is not yet a centroid seed.
            c % n
        };
        centroids.row_mut(c).copy_from(&points.row(chosen));
        for i in 0..n {
            let d2 = row_dist2(points, i, &centroids, c);
            if d2 < dist2[i] {
                dist2[i] = d2;
            }
        }
    }
    centroids
}

fn row_dist2(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..points.ncols() {
        let diff = points[(i, j)] - centroids[(c, j)];
        sum += diff * diff;
    }
    sum
}

fn nearest_centroid(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centroids.nrows() {
        let d2 = row_dist2(points, i, centroids, c);
        if d2 < best_d {
            best_d = d2;
            best = c;
        }
    }
    (best, best_d)
}

fn farthest_point(points: &DMatrix<f64>, assignments: &[usize], centroids: &DMatrix<f64>) -> usize {
    let mut far = 0;
    let mut far_d = -1.0;
    for i in 0..points.nrows() {
        let d2 = row_dist2(points, i, centroids, assignments[i]);
        if d2 > far_d {
            far_d = d2;
            far = i;
        }
    }
    far
}
