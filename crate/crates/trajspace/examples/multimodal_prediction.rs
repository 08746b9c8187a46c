//! Multi-modal prediction from anchors: one observation in, s candidate
//! futures out, scored best-of-s and rendered to an SVG.

use trajspace::anchors::{anchor_predict, generate_anchors};
use trajspace::basis::TrajectoryBasis;
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::Layout;
use trajspace::metrics::{ade, fde, tcc, PredictionSet};
use trajspace::plot;
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let train = synthetic::mixed_corpus(1500, 8, 12, 3);
    let basis = TrajectoryBasis::fit(
        &to_matrix(&train, Segment::Prediction, Layout::Interleaved)?,
        6,
        false,
    )?;
    let anchors = generate_anchors(&train, &basis, 20, 9, 300)?;

    // Predict for unseen walkers and score the best of the 20 candidates.
    let test = synthetic::mixed_corpus(200, 8, 12, 4);
    let mut sum_ade = 0.0;
    let mut sum_fde = 0.0;
    let mut sum_tcc = 0.0;
    for t in &test {
        let pred = PredictionSet::new(anchor_predict(&t.obs, &anchors, &basis, None)?);
        sum_ade += ade(&pred, &t.fut)?;
        sum_fde += fde(&pred, &t.fut)?;
        sum_tcc += tcc(&pred, &t.fut)?;
    }
    let n = test.len() as f64;
    println!(
        "best-of-20 over {} unseen tracklets: ADE {:.3} m, FDE {:.3} m, TCC {:.3}",
        test.len(),
        sum_ade / n,
        sum_fde / n,
        sum_tcc / n
    );

    // Render one case.
    let case = &test[7];
    let samples = anchor_predict(&case.obs, &anchors, &basis, None)?;
    let svg = plot::trajectories_svg(&samples, Some(&case.fut));
    let path = std::env::temp_dir().join("trajspace_example_prediction.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {} (20 candidates in blue, ground truth in red)", path.display());
    Ok(())
}
