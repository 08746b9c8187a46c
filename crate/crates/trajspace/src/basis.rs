//! The low-rank trajectory descriptor: an orthonormal basis fitted by SVD of
//! the stacked trajectory matrix, plus the projection and reconstruction
//! transforms between Euclidean space and the coefficient space it spans.
//!
//! The left singular vectors are obtained from the Gram matrix `A Aᵀ`
//! (L x L, L <= 24 for the default windows), which keeps the whole fit
//! dependency-free and deterministic. Right singular vectors are never
//! materialized; nothing downstream uses them.

use crate::dataset::{Segment, Tracklet, TrajectoryMatrix};
use crate::error::{Error, Result};
use crate::geometry::{flatten, unflatten, Layout, Point2};
use crate::linalg::symmetric_eigen;
use nalgebra::{DMatrix, DVector};

/// Orthonormal rank-k basis for one trajectory segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBasis {
    /// L x k, orthonormal columns, deterministic sign.
    u: DMatrix<f64>,
    /// All min(L, N) singular values of the training matrix, non-increasing.
    singular_values: DVector<f64>,
    segment: Segment,
    layout: Layout,
    /// Frames per trajectory (L = 2 * frames).
    frames: usize,
    /// Column mean of the training matrix when fitted with centering.
    mean: Option<DVector<f64>>,
}

/// A trajectory's coordinates in the basis: one weight per basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub values: DVector<f64>,
    pub segment: Segment,
}

/// The observation-side and prediction-side bases fitted from one corpus.
#[derive(Debug, Clone)]
pub struct BasisPair {
    pub obs: TrajectoryBasis,
    pub pred: TrajectoryBasis,
    pub provenance: String,
}

impl TrajectoryBasis {
    /// Fit a rank-k basis to a trajectory matrix.
    ///
    /// The basis columns are the top-k eigenvectors of `A Aᵀ`; singular
    /// values are the square roots of its eigenvalues (clamped at zero).
    /// With `center` set, the column mean is subtracted first and stored.
    pub fn fit(matrix: &TrajectoryMatrix, k: usize, center: bool) -> Result<Self> {
        let l = matrix.data.nrows();
        let n = matrix.data.ncols();
        if n == 0 {
            return Err(Error::argument("cannot fit a basis to an empty matrix"));
        }
        if !matrix.data.iter().all(|v| v.is_finite()) {
            return Err(Error::argument("trajectory matrix contains non-finite entries"));
        }
        if k < 1 || k > l.min(n) {
            return Err(Error::argument(format!(
                "rank k={k} out of range for a {l}x{n} matrix (1..={})",
                l.min(n)
            )));
        }

        let mean = center.then(|| {
            let mut m = DVector::zeros(l);
            for c in matrix.data.column_iter() {
                m += c;
            }
            m / n as f64
        });

        // Gram accumulation over the upper triangle, mirrored afterwards.
        let mut gram = DMatrix::<f64>::zeros(l, l);
        for col in matrix.data.column_iter() {
            let c = match &mean {
                Some(m) => col - m,
                None => col.clone_owned(),
            };
            for i in 0..l {
                for j in i..l {
                    gram[(i, j)] += c[i] * c[j];
                }
            }
        }
        for i in 0..l {
            for j in (i + 1)..l {
                gram[(j, i)] = gram[(i, j)];
            }
        }

        let eig = symmetric_eigen(&gram)?;
        let lambda_max = eig.values[0].max(0.0);
        let floor = 1e-12 * lambda_max;
        let mut sigma = DVector::zeros(l.min(n));
        for i in 0..sigma.len() {
            let lambda = if eig.values[i] < floor { 0.0 } else { eig.values[i] };
            sigma[i] = lambda.sqrt();
        }

        let mut u = eig.vectors.columns(0, k).into_owned();
        normalize_column_signs(&mut u);

        Ok(TrajectoryBasis {
            u,
            singular_values: sigma,
            segment: matrix.segment,
            layout: matrix.layout,
            frames: matrix.frames,
            mean,
        })
    }

    pub(crate) fn from_parts(
        u: DMatrix<f64>,
        singular_values: DVector<f64>,
        segment: Segment,
        layout: Layout,
        frames: usize,
        mean: Option<DVector<f64>>,
    ) -> Result<Self> {
        if u.nrows() != 2 * frames {
            return Err(Error::data(format!(
                "basis has {} rows but 2*T = {}",
                u.nrows(),
                2 * frames
            )));
        }
        if u.ncols() < 1 || u.ncols() > u.nrows() {
            return Err(Error::data(format!("basis rank {} out of range", u.ncols())));
        }
        let basis = TrajectoryBasis { u, singular_values, segment, layout, frames, mean };
        let gram = basis.u.transpose() * &basis.u;
        if (gram - DMatrix::identity(basis.k(), basis.k())).amax() > 1e-9 {
            return Err(Error::data("basis columns are not orthonormal".to_string()));
        }
        Ok(basis)
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn segment(&self) -> Segment {
        self.segment
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn mean(&self) -> Option<&DVector<f64>> {
        self.mean.as_ref()
    }

    /// One basis vector rendered as a T-point path.
    pub fn vector_as_path(&self, index: usize) -> Vec<Point2> {
        unflatten(self.u.column(index).as_slice(), self.layout)
    }

    /// A lower-rank view of the same fit (the leading k' columns).
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k < 1 || k > self.k() {
            return Err(Error::argument(format!(
                "cannot truncate a rank-{} basis to k={k}",
                self.k()
            )));
        }
        Ok(TrajectoryBasis {
            u: self.u.columns(0, k).into_owned(),
            singular_values: self.singular_values.clone(),
            segment: self.segment,
            layout: self.layout,
            frames: self.frames,
            mean: self.mean.clone(),
        })
    }

    /// Project a flattened segment into the coefficient space: `c = Uᵀ a`.
    pub fn project(&self, segment: &DVector<f64>) -> Result<Coefficients> {
        if segment.len() != self.len() {
            return Err(Error::shape(format!(
                "segment has length {}, basis expects {}",
                segment.len(),
                self.len()
            )));
        }
        let centered = match &self.mean {
            Some(m) => segment - m,
            None => segment.clone(),
        };
        Ok(Coefficients {
            values: self.u.transpose() * centered,
            segment: self.segment,
        })
    }

    /// Map coefficients back to a flattened trajectory: `ã = U c`.
    pub fn reconstruct(&self, coefficients: &Coefficients) -> Result<DVector<f64>> {
        if coefficients.values.len() != self.k() {
            return Err(Error::shape(format!(
                "coefficient vector has length {}, basis rank is {}",
                coefficients.values.len(),
                self.k()
            )));
        }
        let mut out = &self.u * &coefficients.values;
        if let Some(m) = &self.mean {
            out += m;
        }
        Ok(out)
    }

    /// Project a segment of points and return its points after the rank-k
    /// round trip.
    pub fn round_trip(&self, points: &[Point2]) -> Result<Vec<Point2>> {
        let v = flatten(points, self.layout);
        let c = self.project(&v)?;
        let back = self.reconstruct(&c)?;
        Ok(unflatten(back.as_slice(), self.layout))
    }
}

/// Flip each column so its largest-magnitude entry is positive (ties broken
/// by the lowest row index). SVD signs are arbitrary; fixing them makes
/// fitted bases byte-reproducible.
fn normalize_column_signs(u: &mut DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = f64::MIN;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Mean per-timestep Euclidean distance between each tracklet and its rank-k
/// round trip, averaged over the corpus. Returned in millimeters as
/// (observation error, prediction error).
pub fn approximation_error(pair: &BasisPair, tracklets: &[Tracklet]) -> Result<(f64, f64)> {
    if tracklets.is_empty() {
        return Err(Error::argument("approximation error needs at least one tracklet"));
    }
    let mut obs_sum = 0.0;
    let mut pred_sum = 0.0;
    for t in tracklets {
        obs_sum += segment_error(&pair.obs, &t.obs)?;
        pred_sum += segment_error(&pair.pred, &t.fut)?;
    }
    let n = tracklets.len() as f64;
    Ok((1000.0 * obs_sum / n, 1000.0 * pred_sum / n))
}

fn segment_error(basis: &TrajectoryBasis, points: &[Point2]) -> Result<f64> {
    let recon = basis.round_trip(points)?;
    let sum: f64 = points.iter().zip(&recon).map(|(a, b)| a.dist(*b)).sum();
    Ok(sum / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Segment, TrajectoryMatrix};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn matrix_from(data: DMatrix<f64>, frames: usize) -> TrajectoryMatrix {
        TrajectoryMatrix {
            data,
            segment: Segment::Prediction,
            layout: Layout::Interleaved,
            frames,
        }
    }

    fn random_matrix(l: usize, n: usize, seed: u64) -> TrajectoryMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        matrix_from(DMatrix::from_fn(l, n, |_, _| rng.random::<f64>() * 2.0 - 1.0), l / 2)
    }

    #[test]
    fn rank_one_corpus_recovers_the_column() {
        let mut a = DVector::zeros(16);
        for i in 0..16 {
            a[i] = ((i + 1) as f64).sin();
        }
        a /= a.norm();
        let n = 9;
        let mut data = DMatrix::zeros(16, n);
        for c in 0..n {
            data.set_column(c, &a);
        }
        let basis = TrajectoryBasis::fit(&matrix_from(data, 8), 1, false).unwrap();
        let u1 = basis.vectors().column(0);
        // Same direction up to sign; sign convention makes it deterministic.
        let dot: f64 = u1.dot(&a);
        assert!((dot.abs() - 1.0).abs() < 1e-9);
        assert!((basis.singular_values()[0] - (n as f64).sqrt()).abs() < 1e-9);
        for i in 1..basis.singular_values().len() {
            assert!(basis.singular_values()[i].abs() < 1e-9);
        }
    }

    #[test]
    fn full_rank_reconstruction_is_exact() {
        let m = random_matrix(12, 20, 3);
        let basis = TrajectoryBasis::fit(&m, 12, false).unwrap();
        for col in m.data.column_iter() {
            let c = basis.project(&col.clone_owned()).unwrap();
            let back = basis.reconstruct(&c).unwrap();
            assert!((back - col).amax() < 1e-8);
        }
    }

    #[test]
    fn k_out_of_range_rejected() {
        let m = random_matrix(12, 20, 3);
        assert!(matches!(TrajectoryBasis::fit(&m, 0, false), Err(Error::Argument(_))));
        assert!(matches!(TrajectoryBasis::fit(&m, 13, false), Err(Error::Argument(_))));
        // N < L caps the rank too.
        let thin = random_matrix(12, 4, 4);
        assert!(matches!(TrajectoryBasis::fit(&thin, 5, false), Err(Error::Argument(_))));
    }

    #[test]
    fn orthonormality_invariant() {
        let m = random_matrix(16, 40, 11);
        let basis = TrajectoryBasis::fit(&m, 6, false).unwrap();
        let gram = basis.vectors().transpose() * basis.vectors();
        assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-9);
    }

    #[test]
    fn eckart_young_identity() {
        // Frobenius error of the rank-k reconstruction equals
        // sqrt(sum of the squared tail singular values), from the same fit.
        let m = random_matrix(16, 50, 21);
        let k = 6;
        let basis = TrajectoryBasis::fit(&m, k, false).unwrap();
        let u = basis.vectors();
        let recon = u * (u.transpose() * &m.data);
        let err = (&m.data - recon).norm();
        let tail: f64 = basis
            .singular_values()
            .iter()
            .skip(k)
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt();
        assert!((err - tail).abs() < 1e-8 * m.data.norm().max(1.0));
    }

    #[test]
    fn project_basis_vector_gives_unit_coefficient() {
        let m = random_matrix(16, 30, 5);
        let basis = TrajectoryBasis::fit(&m, 4, false).unwrap();
        let u1 = basis.vectors().column(0).clone_owned();
        let c = basis.project(&u1).unwrap();
        assert!((c.values[0] - 1.0).abs() < 1e-9);
        for i in 1..4 {
            assert!(c.values[i].abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_segment_projects_to_zero() {
        let m = random_matrix(6, 12, 6);
        let basis = TrajectoryBasis::fit(&m, 6, false).unwrap();
        // Build a vector orthogonal to the first 5 columns but not the 6th,
        // then strip the 6th component; the result is orthogonal to all.
        let truncated = basis.truncate(5).unwrap();
        let mut v = DVector::from_fn(6, |i, _| (i as f64 * 0.7).cos());
        let full = basis.project(&v).unwrap();
        v -= basis.vectors().column(5) * full.values[5];
        let c5 = truncated
            .project(&(v.clone() - basis.vectors().columns(0, 5) * full.values.rows(0, 5)))
            .unwrap();
        assert!(c5.values.amax() < 1e-9);
    }

    #[test]
    fn projection_never_grows_norm() {
        let m = random_matrix(16, 30, 8);
        let basis = TrajectoryBasis::fit(&m, 5, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = DVector::from_fn(16, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let c = basis.project(&s).unwrap();
            assert!(c.values.norm() <= s.norm() + 1e-12);
            // Equality holds exactly when the residual vanishes.
            let resid = (&s - basis.reconstruct(&c).unwrap()).norm();
            if resid < 1e-12 {
                assert!((c.values.norm() - s.norm()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reconstruct_zero_is_zero() {
        let m = random_matrix(16, 30, 8);
        let basis = TrajectoryBasis::fit(&m, 5, false).unwrap();
        let c = Coefficients { values: DVector::zeros(5), segment: Segment::Prediction };
        assert_eq!(basis.reconstruct(&c).unwrap().amax(), 0.0);
    }

    #[test]
    fn round_trip_is_least_squares_optimal() {
        // The basis round trip must match a dense least-squares solve of
        // min ||U w - s|| (computed through the normal equations oracle).
        let m = random_matrix(12, 24, 13);
        let basis = TrajectoryBasis::fit(&m, 4, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = DVector::from_fn(12, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let u = basis.vectors();
        let w = crate::linalg::solve_spd(&(u.transpose() * u), &(u.transpose() * &s)).unwrap();
        let via_solve = u * w;
        let via_basis = basis.reconstruct(&basis.project(&s).unwrap()).unwrap();
        assert!((via_solve - via_basis).amax() < 1e-9);
    }

    #[test]
    fn projector_idempotence() {
        let m = random_matrix(16, 30, 17);
        let basis = TrajectoryBasis::fit(&m, 6, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = DVector::from_fn(16, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let c1 = basis.project(&s).unwrap();
        let c2 = basis.project(&basis.reconstruct(&c1).unwrap()).unwrap();
        assert!((&c1.values - &c2.values).amax() < 1e-9);
    }

    #[test]
    fn centered_fit_round_trips_through_the_mean() {
        let m = random_matrix(8, 10, 23);
        let basis = TrajectoryBasis::fit(&m, 8, true).unwrap();
        assert!(basis.mean().is_some());
        let col = m.data.column(0).clone_owned();
        let back = basis.reconstruct(&basis.project(&col).unwrap()).unwrap();
        assert!((back - col).amax() < 1e-8);
    }

    #[test]
    fn straight_lines_through_origin_need_rank_two() {
        // Constant-velocity paths through the origin span exactly two basis
        // directions; the analytic subspace is the oracle.
        let mut tracklets = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..40 {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let speed = 0.3 + rng.random::<f64>();
            let dir = Point2::new(angle.cos(), angle.sin());
            let obs: Vec<Point2> = (0..8).map(|t| dir * (speed * t as f64)).collect();
            let fut: Vec<Point2> = (8..20).map(|t| dir * (speed * t as f64)).collect();
            tracklets.push(Tracklet {
                pedestrian: i,
                scene: "synthetic".to_string(),
                recording: 0,
                start_frame: 0,
                obs,
                fut,
            });
        }
        let obs_m = crate::dataset::to_matrix(&tracklets, Segment::Observation, Layout::Interleaved).unwrap();
        let pred_m = crate::dataset::to_matrix(&tracklets, Segment::Prediction, Layout::Interleaved).unwrap();
        let pair = BasisPair {
            obs: TrajectoryBasis::fit(&obs_m, 2, false).unwrap(),
            pred: TrajectoryBasis::fit(&pred_m, 2, false).unwrap(),
            provenance: "test".to_string(),
        };
        let (obs_mm, pred_mm) = approximation_error(&pair, &tracklets).unwrap();
        assert!(obs_mm < 1e-6, "obs error {obs_mm} mm");
        assert!(pred_mm < 1e-6, "pred error {pred_mm} mm");

        // Analytic subspace check: span{e_x ⊗ t, e_y ⊗ t}.
        let mut tx = DVector::zeros(24);
        let mut ty = DVector::zeros(24);
        for (i, t) in (8..20).enumerate() {
            tx[2 * i] = t as f64;
            ty[2 * i + 1] = t as f64;
        }
        tx /= tx.norm();
        ty /= ty.norm();
        let u = pair.pred.vectors();
        let analytic = tx.clone() * tx.transpose() + ty.clone() * ty.transpose();
        let fitted = u * u.transpose();
        assert!((analytic - fitted).amax() < 1e-9);
    }

    #[test]
    fn full_rank_pair_error_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut tracklets = Vec::new();
        for i in 0..50 {
            let obs: Vec<Point2> = (0..8)
                .map(|_| Point2::new(rng.random::<f64>() * 5.0, rng.random::<f64>() * 5.0))
                .collect();
            let fut: Vec<Point2> = (0..12)
                .map(|_| Point2::new(rng.random::<f64>() * 5.0, rng.random::<f64>() * 5.0))
                .collect();
            tracklets.push(Tracklet {
                pedestrian: i,
                scene: "s".to_string(),
                recording: 0,
                start_frame: 0,
                obs,
                fut,
            });
        }
        let obs_m = crate::dataset::to_matrix(&tracklets, Segment::Observation, Layout::Interleaved).unwrap();
        let pred_m = crate::dataset::to_matrix(&tracklets, Segment::Prediction, Layout::Interleaved).unwrap();
        let pair = BasisPair {
            obs: TrajectoryBasis::fit(&obs_m, 16, false).unwrap(),
            pred: TrajectoryBasis::fit(&pred_m, 24, false).unwrap(),
            provenance: String::new(),
        };
        let (obs_mm, pred_mm) = approximation_error(&pair, &tracklets).unwrap();
        assert!(obs_mm < 1e-6 && pred_mm < 1e-6, "full-rank error {obs_mm}/{pred_mm} mm");
    }

    #[test]
    fn error_is_monotone_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut tracklets = Vec::new();
        for i in 0..60 {
            let mut p = Point2::new(rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0);
            let mut v = Point2::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let mut obs = Vec::new();
            let mut fut = Vec::new();
            for t in 0..20 {
                if t < 8 {
                    obs.push(p);
                } else {
                    fut.push(p);
                }
                v = v.rotate(0.1 * (rng.random::<f64>() - 0.5));
                p = p + v;
            }
            tracklets.push(Tracklet {
                pedestrian: i,
                scene: "s".to_string(),
                recording: 0,
                start_frame: 0,
                obs,
                fut,
            });
        }
        let obs_m = crate::dataset::to_matrix(&tracklets, Segment::Observation, Layout::Interleaved).unwrap();
        let pred_m = crate::dataset::to_matrix(&tracklets, Segment::Prediction, Layout::Interleaved).unwrap();
        let obs_full = TrajectoryBasis::fit(&obs_m, 16, false).unwrap();
        let pred_full = TrajectoryBasis::fit(&pred_m, 24, false).unwrap();
        let mut last = (f64::INFINITY, f64::INFINITY);
        for k in [2, 4, 6, 8, 10, 12] {
            let pair = BasisPair {
                obs: obs_full.truncate(k).unwrap(),
                pred: pred_full.truncate(k).unwrap(),
                provenance: String::new(),
            };
            let err = approximation_error(&pair, &tracklets).unwrap();
            assert!(err.0 <= last.0 + 1e-9 && err.1 <= last.1 + 1e-9);
            last = err;
        }
    }
}
