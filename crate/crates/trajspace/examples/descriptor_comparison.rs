//! Compare trajectory descriptors at reconstruction: endpoint linear
//! interpolation, a Bézier curve, a clamped B-spline and the learned basis
//! at several ranks, on a held-out synthetic scene.

use trajspace::basis::{approximation_error, BasisPair, TrajectoryBasis};
use trajspace::curves::{bernstein_basis, bspline_basis, curve_error, linear_error};
use trajspace::dataset::{to_matrix, Segment, Tracklet};
use trajspace::geometry::Layout;
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let train = synthetic::mixed_corpus(1500, 8, 12, 100);
    let test = synthetic::mixed_corpus(400, 8, 12, 200);
    println!("train {} / test {} tracklets\n", train.len(), test.len());
    println!(" descriptor   | dim | obs (mm) | pred (mm)");
    println!(" -------------+-----+----------+----------");

    let mm = |v: f64| v * 1000.0 / test.len() as f64;

    let mut obs = 0.0;
    let mut pred = 0.0;
    for t in &test {
        obs += linear_error(&t.obs)?;
        pred += linear_error(&t.fut)?;
    }
    println!(" linear       | {:>3} | {:>8.1} | {:>8.1}", 4, mm(obs), mm(pred));

    let order = 5;
    let bezier = (bernstein_basis(order, 8)?, bernstein_basis(order, 12)?);
    let bspline = (bspline_basis(order, 6, 8)?, bspline_basis(order, 6, 12)?);
    for (name, pair) in [("bezier-o5", &bezier), ("bspline-o5", &bspline)] {
        let mut obs = 0.0;
        let mut pred = 0.0;
        for t in &test {
            obs += curve_error(&pair.0, &t.obs)?;
            pred += curve_error(&pair.1, &t.fut)?;
        }
        println!(" {name:<12} | {:>3} | {:>8.1} | {:>8.1}", pair.1.dim(), mm(obs), mm(pred));
    }

    let obs_full = TrajectoryBasis::fit(&to_matrix(&train, Segment::Observation, Layout::Interleaved)?, 12, false)?;
    let pred_full = TrajectoryBasis::fit(&to_matrix(&train, Segment::Prediction, Layout::Interleaved)?, 12, false)?;
    for k in [4, 6, 8, 10, 12] {
        let pair = BasisPair {
            obs: obs_full.truncate(k.min(obs_full.k()))?,
            pred: pred_full.truncate(k)?,
            provenance: String::new(),
        };
        let (obs_mm, pred_mm) = approximation_error(&pair, &test)?;
        println!(" basis-k{k:<5} | {k:>3} | {obs_mm:>8.1} | {pred_mm:>8.1}");
    }

    println!("\n(the learned basis is fitted on train and scored on test;");
    println!(" curve descriptors are fitted per segment, so no train set)");

    // Straight-line sanity: every family represents constant velocity
    // exactly.
    let straight: Vec<Tracklet> = synthetic::constant_velocity_corpus(50, 8, 12, 5, false);
    let mut worst: f64 = 0.0;
    for t in &straight {
        worst = worst.max(linear_error(&t.fut)?);
        worst = worst.max(curve_error(&bezier.1, &t.fut)?);
        worst = worst.max(curve_error(&bspline.1, &t.fut)?);
    }
    println!("\nworst constant-velocity error over all curve families: {worst:.2e} m");
    Ok(())
}
