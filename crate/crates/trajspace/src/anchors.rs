//! Data-driven trajectory anchors: training futures are normalized for
//! translation, heading and speed, projected into the coefficient space and
//! clustered there. At prediction time the anchors (plus optional correction
//! offsets) are reconstructed and mapped back through the query
//! observation's similarity transform.

use crate::basis::{Coefficients, TrajectoryBasis};
use crate::cluster::kmeans;
use crate::dataset::{Segment, Tracklet};
use crate::error::{Error, Result};
use crate::geometry::{flatten, unflatten, Point2};
use nalgebra::DMatrix;

/// Near-stationary observations fall back to a translation-only transform.
const STATIONARY_STEP: f64 = 1e-6;

/// The similarity transform that maps a tracklet to its normalized form and
/// back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationParams {
    /// World position mapped to the origin (the last observed point).
    pub translation: Point2,
    /// Heading angle mapped to +x, radians.
    pub rotation: f64,
    /// Mean observed step length mapped to 1.
    pub scale: f64,
}

impl NormalizationParams {
    pub fn identity() -> Self {
        NormalizationParams { translation: Point2::ZERO, rotation: 0.0, scale: 1.0 }
    }

    /// Derive the transform from an observation: the last point maps to the
    /// origin, the net-displacement direction to +x and the mean step length
    /// to 1. Near-stationary observations keep rotation 0 and scale 1.
    pub fn from_observation(obs: &[Point2]) -> Result<Self> {
        if obs.len() < 2 {
            return Err(Error::argument("normalization needs at least 2 observed points"));
        }
        let translation = obs[obs.len() - 1];
        let mean_step = obs
            .windows(2)
            .map(|w| w[1].dist(w[0]))
            .sum::<f64>()
            / (obs.len() - 1) as f64;
        if mean_step < STATIONARY_STEP {
            return Ok(NormalizationParams { translation, rotation: 0.0, scale: 1.0 });
        }
        let net = obs[obs.len() - 1] - obs[0];
        let rotation = net.y.atan2(net.x);
        Ok(NormalizationParams { translation, rotation, scale: mean_step })
    }

    /// World frame to normalized frame.
    pub fn normalize_point(&self, p: Point2) -> Point2 {
        (p - self.translation).rotate(-self.rotation) * (1.0 / self.scale)
    }

    /// Normalized frame back to world frame.
    pub fn denormalize_point(&self, p: Point2) -> Point2 {
        (p * self.scale).rotate(self.rotation) + self.translation
    }
}

/// Normalize translation, heading and speed of a tracklet. The same
/// transform is applied to both segments; the returned params invert it.
pub fn normalize_tracklet(tracklet: &Tracklet) -> Result<(Tracklet, NormalizationParams)> {
    let params = NormalizationParams::from_observation(&tracklet.obs)?;
    let mut out = tracklet.clone();
    for p in out.obs.iter_mut().chain(out.fut.iter_mut()) {
        *p = params.normalize_point(*p);
    }
    Ok((out, params))
}

/// Exact inverse of [`normalize_tracklet`].
pub fn denormalize(tracklet: &Tracklet, params: &NormalizationParams) -> Result<Tracklet> {
    if !(params.scale.is_finite() && params.scale > 0.0) {
        return Err(Error::argument("normalization scale must be positive"));
    }
    let mut out = tracklet.clone();
    for p in out.obs.iter_mut().chain(out.fut.iter_mut()) {
        *p = params.denormalize_point(*p);
    }
    Ok(out)
}

/// Cluster centroids of normalized future-trajectory coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    /// s x k centroid matrix.
    pub centroids: DMatrix<f64>,
    /// Modes (rows).
    pub s: usize,
    /// Coefficient dimension (columns).
    pub k: usize,
    /// Final clustering inertia.
    pub inertia: f64,
    pub seed: u64,
}

/// Externally supplied per-anchor refinement offsets, s x k.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionOffsets {
    pub f: DMatrix<f64>,
}

impl CorrectionOffsets {
    pub fn zeros(s: usize, k: usize) -> Self {
        CorrectionOffsets { f: DMatrix::zeros(s, k) }
    }
}

/// Build `s` anchors from a training corpus: normalize every tracklet,
/// project its future through the prediction basis and cluster the
/// coefficient vectors.
pub fn generate_anchors(
    train: &[Tracklet],
    pred_basis: &TrajectoryBasis,
    s: usize,
    seed: u64,
    max_iter: usize,
) -> Result<AnchorSet> {
    if train.is_empty() {
        return Err(Error::argument("anchor generation needs a non-empty training set"));
    }
    if pred_basis.segment() != Segment::Prediction {
        return Err(Error::config(
            "anchors must be generated from a prediction-segment basis".to_string(),
        ));
    }
    let k = pred_basis.k();
    let mut coeffs = DMatrix::zeros(train.len(), k);
    for (i, tracklet) in train.iter().enumerate() {
        let (normalized, _) = normalize_tracklet(tracklet)?;
        let c = pred_basis.project(&flatten(&normalized.fut, pred_basis.layout()))?;
        coeffs.row_mut(i).copy_from(&c.values.transpose());
    }
    let result = kmeans(&coeffs, s, seed, max_iter)?;
    Ok(AnchorSet { centroids: result.centroids, s, k, inertia: result.inertia, seed })
}

/// Apply correction offsets to the anchors: the s x k candidate matrix
/// `c̄ + f`.
pub fn refine(anchors: &AnchorSet, offsets: &CorrectionOffsets) -> Result<DMatrix<f64>> {
    if offsets.f.nrows() != anchors.s || offsets.f.ncols() != anchors.k {
        return Err(Error::shape(format!(
            "offsets are {}x{}, anchors are {}x{}",
            offsets.f.nrows(),
            offsets.f.ncols(),
            anchors.s,
            anchors.k
        )));
    }
    Ok(&anchors.centroids + &offsets.f)
}

/// Predict `s` future trajectories for an observation: refine the anchors,
/// reconstruct each candidate through the prediction basis and map the
/// normalized futures back through the observation's similarity transform.
///
/// Returns world-frame trajectories of `pred_basis.frames()` points each.
pub fn anchor_predict(
    obs: &[Point2],
    anchors: &AnchorSet,
    pred_basis: &TrajectoryBasis,
    offsets: Option<&CorrectionOffsets>,
) -> Result<Vec<Vec<Point2>>> {
    if anchors.k != pred_basis.k() {
        return Err(Error::config(format!(
            "anchor coefficient dimension {} does not match basis rank {}",
            anchors.k,
            pred_basis.k()
        )));
    }
    let params = NormalizationParams::from_observation(obs)?;
    let zero;
    let offsets = match offsets {
        Some(f) => f,
        None => {
            zero = CorrectionOffsets::zeros(anchors.s, anchors.k);
            &zero
        }
    };
    let candidates = refine(anchors, offsets)?;

    let mut out = Vec::with_capacity(anchors.s);
    for row in 0..anchors.s {
        let c = Coefficients {
            values: candidates.row(row).transpose(),
            segment: Segment::Prediction,
        };
        let flat = pred_basis.reconstruct(&c)?;
        let normalized = unflatten(flat.as_slice(), pred_basis.layout());
        out.push(normalized.iter().map(|p| params.denormalize_point(*p)).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::to_matrix;
    use crate::geometry::Layout;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tracklet(obs: Vec<Point2>, fut: Vec<Point2>) -> Tracklet {
        Tracklet {
            pedestrian: 0,
            scene: "s".to_string(),
            recording: 0,
            start_frame: 0,
            obs,
            fut,
        }
    }

    fn constant_velocity(origin: Point2, dir: Point2, step: f64) -> Tracklet {
        let obs = (0..8).map(|t| origin + dir * (step * t as f64)).collect();
        let fut = (8..20).map(|t| origin + dir * (step * t as f64)).collect();
        tracklet(obs, fut)
    }

    fn random_tracklet(rng: &mut ChaCha8Rng) -> Tracklet {
        let mut p = Point2::new(rng.random::<f64>() * 8.0, rng.random::<f64>() * 8.0);
        let mut v = Point2::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let mut obs = Vec::new();
        let mut fut = Vec::new();
        for t in 0..20 {
            if t < 8 {
                obs.push(p)
            } else {
                fut.push(p)
            }
            v = v.rotate((rng.random::<f64>() - 0.5) * 0.2);
            p = p + v;
        }
        tracklet(obs, fut)
    }

    #[test]
    fn axis_aligned_walk_normalizes_to_unit_steps() {
        let t = constant_velocity(Point2::ZERO, Point2::new(1.0, 0.0), 0.4);
        let (n, params) = normalize_tracklet(&t).unwrap();
        assert!((params.scale - 0.4).abs() < 1e-12);
        assert!(params.rotation.abs() < 1e-12);
        // Ends at the origin with unit steps along +x.
        assert!(n.obs[7].norm() < 1e-12);
        for w in n.obs.windows(2) {
            assert!((w[1].x - w[0].x - 1.0).abs() < 1e-12);
            assert!(w[1].y.abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_then_denormalize_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let t = random_tracklet(&mut rng);
            let (n, params) = normalize_tracklet(&t).unwrap();
            let back = denormalize(&n, &params).unwrap();
            let max_err = t
                .obs
                .iter()
                .chain(&t.fut)
                .zip(back.obs.iter().chain(&back.fut))
                .map(|(a, b)| a.dist(*b))
                .fold(0.0, f64::max)
                .max(0.0);
            assert!(max_err < 1e-9, "round trip error {max_err}");
        }
    }

    #[test]
    fn similarity_transformed_tracklets_share_a_normalized_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tracklet(&mut rng);
        let angle = 37f64.to_radians();
        let scale = 3.0;
        let shift = Point2::new(5.0, -2.0);
        let transform = |p: Point2| p.rotate(angle) * scale + shift;
        let t2 = tracklet(
            t.obs.iter().map(|&p| transform(p)).collect(),
            t.fut.iter().map(|&p| transform(p)).collect(),
        );
        let (n1, _) = normalize_tracklet(&t).unwrap();
        let (n2, _) = normalize_tracklet(&t2).unwrap();
        for (a, b) in n1.obs.iter().chain(&n1.fut).zip(n2.obs.iter().chain(&n2.fut)) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tracklet(&mut rng);
        let (n1, _) = normalize_tracklet(&t).unwrap();
        let (n2, params) = normalize_tracklet(&n1).unwrap();
        assert!(params.translation.norm() < 1e-9);
        assert!(params.rotation.abs() < 1e-9);
        assert!((params.scale - 1.0).abs() < 1e-9);
        for (a, b) in n1.obs.iter().chain(&n1.fut).zip(n2.obs.iter().chain(&n2.fut)) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn identity_params_change_nothing() {
        let t = constant_velocity(Point2::new(1.0, 2.0), Point2::new(0.0, 1.0), 0.5);
        let back = denormalize(&t, &NormalizationParams::identity()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn non_positive_scale_rejected() {
        let t = constant_velocity(Point2::ZERO, Point2::new(1.0, 0.0), 0.4);
        let params = NormalizationParams { translation: Point2::ZERO, rotation: 0.0, scale: 0.0 };
        assert!(matches!(denormalize(&t, &params), Err(Error::Argument(_))));
    }

    fn fit_pred_basis(tracklets: &[Tracklet], k: usize) -> TrajectoryBasis {
        let m = to_matrix(tracklets, Segment::Prediction, Layout::Interleaved).unwrap();
        TrajectoryBasis::fit(&m, k, false).unwrap()
    }

    #[test]
    fn identical_futures_collapse_to_one_anchor_value() {
        let corpus: Vec<Tracklet> = (0..10)
            .map(|_| constant_velocity(Point2::ZERO, Point2::new(1.0, 0.0), 0.4))
            .collect();
        let basis = fit_pred_basis(&corpus, 2);
        let anchors = generate_anchors(&corpus, &basis, 3, 0, 300).unwrap();
        let first = anchors.centroids.row(0).clone_owned();
        for r in 1..3 {
            assert!((anchors.centroids.row(r) - &first).amax() < 1e-12);
        }
        assert!(anchors.inertia < 1e-18);
    }

    #[test]
    fn refine_is_elementwise_addition() {
        let corpus: Vec<Tracklet> = (0..12)
            .map(|i| {
                constant_velocity(
                    Point2::new(i as f64, 0.0),
                    Point2::new(1.0, 0.2 * i as f64).rotate(0.3),
                    0.4,
                )
            })
            .collect();
        let basis = fit_pred_basis(&corpus, 4);
        let anchors = generate_anchors(&corpus, &basis, 4, 1, 300).unwrap();

        let zero = CorrectionOffsets::zeros(4, 4);
        assert_eq!(refine(&anchors, &zero).unwrap(), anchors.centroids);

        let negate = CorrectionOffsets { f: -anchors.centroids.clone() };
        assert_eq!(refine(&anchors, &negate).unwrap().amax(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = DMatrix::from_fn(4, 4, |_, _| rng.random::<f64>() - 0.5);
        let refined = refine(&anchors, &CorrectionOffsets { f: f.clone() }).unwrap();
        assert_eq!(refined, &anchors.centroids + &f);
    }

    #[test]
    fn refine_shape_mismatch_rejected() {
        let corpus: Vec<Tracklet> = (0..8)
            .map(|_| constant_velocity(Point2::ZERO, Point2::new(1.0, 0.0), 0.4))
            .collect();
        let basis = fit_pred_basis(&corpus, 2);
        let anchors = generate_anchors(&corpus, &basis, 2, 0, 300).unwrap();
        let bad = CorrectionOffsets::zeros(3, 2);
        assert!(matches!(refine(&anchors, &bad), Err(Error::Shape(_))));
    }

    #[test]
    fn constant_velocity_anchor_extends_the_observation() {
        // Corpus of constant-velocity walks in many directions and speeds:
        // the normalized future is the same for all of them, so any anchor
        // reconstructs to "keep going at the observed pace".
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let corpus: Vec<Tracklet> = (0..50)
            .map(|_| {
                let angle = rng.random::<f64>() * std::f64::consts::TAU;
                let speed = 0.2 + rng.random::<f64>();
                constant_velocity(
                    Point2::new(rng.random::<f64>() * 5.0, rng.random::<f64>() * 5.0),
                    Point2::new(angle.cos(), angle.sin()),
                    speed,
                )
            })
            .collect();
        let basis = fit_pred_basis(&corpus, 4);
        let anchors = generate_anchors(&corpus, &basis, 1, 0, 300).unwrap();

        let obs: Vec<Point2> = (0..8).map(|t| Point2::new(t as f64, 0.0)).collect();
        let preds = anchor_predict(&obs, &anchors, &basis, None).unwrap();
        assert_eq!(preds.len(), 1);
        for (i, p) in preds[0].iter().enumerate() {
            let expect = Point2::new(8.0 + i as f64, 0.0);
            assert!(p.dist(expect) < 1e-6, "step {i}: {p:?} vs {expect:?}");
        }
    }

    #[test]
    fn stationary_observation_predicts_near_last_point() {
        let corpus: Vec<Tracklet> = (0..20)
            .map(|i| constant_velocity(Point2::ZERO, Point2::new(1.0, 0.0).rotate(i as f64), 0.5))
            .collect();
        let basis = fit_pred_basis(&corpus, 4);
        let anchors = generate_anchors(&corpus, &basis, 4, 0, 300).unwrap();
        let obs = vec![Point2::new(3.0, 4.0); 8];
        let preds = anchor_predict(&obs, &anchors, &basis, None).unwrap();
        // Translation-only fallback: normalized futures stay at unit scale
        // around the last observed point.
        for path in &preds {
            for p in path {
                assert!(p.dist(Point2::new(3.0, 4.0)) < 20.0);
            }
            assert_eq!(path.len(), 12);
        }
    }

    #[test]
    fn prediction_count_and_shape_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let corpus: Vec<Tracklet> = (0..40).map(|_| random_tracklet(&mut rng)).collect();
        let basis = fit_pred_basis(&corpus, 6);
        let anchors = generate_anchors(&corpus, &basis, 20, 3, 300).unwrap();
        let preds = anchor_predict(&corpus[0].obs, &anchors, &basis, None).unwrap();
        assert_eq!(preds.len(), 20);
        assert!(preds.iter().all(|p| p.len() == 12));
    }

    #[test]
    fn mismatched_anchor_and_basis_rank_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let corpus: Vec<Tracklet> = (0..20).map(|_| random_tracklet(&mut rng)).collect();
        let basis6 = fit_pred_basis(&corpus, 6);
        let basis4 = fit_pred_basis(&corpus, 4);
        let anchors = generate_anchors(&corpus, &basis6, 5, 0, 300).unwrap();
        assert!(matches!(
            anchor_predict(&corpus[0].obs, &anchors, &basis4, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn observation_basis_rejected_for_anchor_generation() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let corpus: Vec<Tracklet> = (0..20).map(|_| random_tracklet(&mut rng)).collect();
        let m = to_matrix(&corpus, Segment::Observation, Layout::Interleaved).unwrap();
        let obs_basis = TrajectoryBasis::fit(&m, 4, false).unwrap();
        assert!(matches!(
            generate_anchors(&corpus, &obs_basis, 4, 0, 300),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn prediction_is_equivariant_under_similarity_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let corpus: Vec<Tracklet> = (0..40).map(|_| random_tracklet(&mut rng)).collect();
        let basis = fit_pred_basis(&corpus, 6);
        let anchors = generate_anchors(&corpus, &basis, 8, 2, 300).unwrap();
        let obs = corpus[3].obs.clone();
        let base = anchor_predict(&obs, &anchors, &basis, None).unwrap();
        for _ in 0..20 {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let scale = 0.5 + rng.random::<f64>() * 2.5;
            let shift = Point2::new(rng.random::<f64>() * 10.0 - 5.0, rng.random::<f64>() * 10.0 - 5.0);
            let transform = |p: Point2| p.rotate(angle) * scale + shift;
            let moved: Vec<Point2> = obs.iter().map(|&p| transform(p)).collect();
            let preds = anchor_predict(&moved, &anchors, &basis, None).unwrap();
            for (path, base_path) in preds.iter().zip(&base) {
                for (p, q) in path.iter().zip(base_path) {
                    assert!(p.dist(transform(*q)) < 1e-8);
                }
            }
        }
    }
}
