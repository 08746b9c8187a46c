//! Property tests for the structural invariants: flattening bijectivity,
//! normalization round trips, partition of unity, split partitioning and
//! clustering determinism.

use nalgebra::DMatrix;
use proptest::prelude::*;
use std::collections::BTreeMap;
use trajspace::anchors::{denormalize, normalize_tracklet};
use trajspace::cluster::kmeans;
use trajspace::curves::{bernstein_basis, bspline_basis};
use trajspace::dataset::{leave_one_out, SplitSpec, Tracklet};
use trajspace::geometry::{flatten, unflatten, Layout, Point2};

fn coord() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn points(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((coord(), coord()).prop_map(|(x, y)| Point2::new(x, y)), len)
}

fn tracklet() -> impl Strategy<Value = Tracklet> {
    (points(2..10), points(1..14)).prop_map(|(obs, fut)| Tracklet {
        pedestrian: 0,
        scene: "p".to_string(),
        recording: 0,
        start_frame: 0,
        obs,
        fut,
    })
}

proptest! {
    #[test]
    fn flatten_unflatten_bijective(pts in points(1..24), planar in any::<bool>()) {
        let layout = if planar { Layout::Planar } else { Layout::Interleaved };
        let v = flatten(&pts, layout);
        prop_assert_eq!(unflatten(v.as_slice(), layout), pts);
    }

    #[test]
    fn normalization_round_trips(t in tracklet()) {
        let (normalized, params) = normalize_tracklet(&t).unwrap();
        // The transform always maps the last observed point to the origin.
        prop_assert!(normalized.obs.last().unwrap().norm() < 1e-6 * params.scale.max(1.0) + 1e-9);
        let back = denormalize(&normalized, &params).unwrap();
        for (a, b) in t.obs.iter().chain(&t.fut).zip(back.obs.iter().chain(&back.fut)) {
            prop_assert!(a.dist(*b) < 1e-8, "round trip error {}", a.dist(*b));
        }
    }

    #[test]
    fn bernstein_partition_of_unity(order in 1usize..7, frames in 2usize..16) {
        let b = bernstein_basis(order, frames).unwrap();
        for t in 0..frames {
            let sum: f64 = b.m.row(t).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bspline_partition_of_unity(order in 1usize..6, extra in 0usize..5, frames in 2usize..16) {
        let num_ctrl = order + 1 + extra;
        let b = bspline_basis(order, num_ctrl, frames).unwrap();
        for t in 0..frames {
            let sum: f64 = b.m.row(t).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for v in b.m.row(t).iter() {
                prop_assert!(*v >= -1e-12, "negative basis value {v}");
            }
        }
    }

    #[test]
    fn split_is_a_partition(counts in prop::collection::vec(0usize..5, 2..6), held in 0usize..6) {
        let scenes: BTreeMap<String, Vec<Tracklet>> = counts
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let name = format!("scene{i}");
                let ts = (0..n)
                    .map(|j| Tracklet {
                        pedestrian: j as i64,
                        scene: name.clone(),
                        recording: 0,
                        start_frame: 0,
                        obs: vec![Point2::ZERO; 2],
                        fut: vec![Point2::ZERO; 1],
                    })
                    .collect();
                (name, ts)
            })
            .collect();
        let held = format!("scene{}", held % counts.len());
        let split = SplitSpec::new(
            held.clone(),
            scenes.keys().filter(|s| **s != held).cloned(),
        ).unwrap();
        let (train, test) = leave_one_out(&scenes, &split).unwrap();
        let total: usize = scenes.values().map(Vec::len).sum();
        prop_assert_eq!(train.len() + test.len(), total);
        prop_assert!(test.iter().all(|t| t.scene == held));
        prop_assert!(train.iter().all(|t| t.scene != held));
    }

    #[test]
    fn kmeans_is_deterministic_and_monotone(
        n in 4usize..40,
        s in 1usize..4,
        seed in any::<u64>(),
        values in prop::collection::vec(-50.0..50.0f64, 80),
    ) {
        let d = 2;
        let points = DMatrix::from_fn(n, d, |i, j| values[(i * d + j) % values.len()]);
        prop_assume!(n >= s);
        let a = kmeans(&points, s, seed, 100).unwrap();
        let b = kmeans(&points, s, seed, 100).unwrap();
        prop_assert_eq!(&a.centroids, &b.centroids);
        prop_assert_eq!(&a.assignments, &b.assignments);
        for w in a.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }
}
