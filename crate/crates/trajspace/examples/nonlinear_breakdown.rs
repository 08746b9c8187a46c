//! Split evaluation by path shape: futures whose best straight-line fit
//! misses by more than 0.02 m count as non-linear, and the metrics are
//! reported for the full set and the non-linear subset side by side.

use trajspace::anchors::{anchor_predict, generate_anchors};
use trajspace::basis::TrajectoryBasis;
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::Layout;
use trajspace::metrics::{ade, classify_nonlinear, fde, linear_fit_error, PredictionSet};
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let train = synthetic::mixed_corpus(1500, 8, 12, 51);
    let basis = TrajectoryBasis::fit(
        &to_matrix(&train, Segment::Prediction, Layout::Interleaved)?,
        6,
        false,
    )?;
    let anchors = generate_anchors(&train, &basis, 20, 2, 300)?;
    let test = synthetic::mixed_corpus(400, 8, 12, 52);

    let tol = 0.02;
    let mut all = (0usize, 0.0, 0.0);
    let mut nl = (0usize, 0.0, 0.0);
    for t in &test {
        let pred = PredictionSet::new(anchor_predict(&t.obs, &anchors, &basis, None)?);
        let a = ade(&pred, &t.fut)?;
        let f = fde(&pred, &t.fut)?;
        all = (all.0 + 1, all.1 + a, all.2 + f);
        if classify_nonlinear(&t.fut, tol)? {
            nl = (nl.0 + 1, nl.1 + a, nl.2 + f);
        }
    }

    println!("linear-fit error of three sample futures:");
    for t in test.iter().take(3) {
        println!(
            "  pedestrian {}: {:.4} m -> {}",
            t.pedestrian,
            linear_fit_error(&t.fut),
            if classify_nonlinear(&t.fut, tol)? { "non-linear" } else { "linear" }
        );
    }

    println!("\n subset     | count | ADE (m) | FDE (m)");
    println!(" -----------+-------+---------+--------");
    println!(
        " all        | {:>5} | {:>7.3} | {:>7.3}",
        all.0,
        all.1 / all.0 as f64,
        all.2 / all.0 as f64
    );
    println!(
        " non-linear | {:>5} | {:>7.3} | {:>7.3}",
        nl.0,
        nl.1 / nl.0 as f64,
        nl.2 / nl.0 as f64
    );
    Ok(())
}
