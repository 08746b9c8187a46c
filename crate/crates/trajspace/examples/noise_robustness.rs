//! The observation-perturbation protocol: add Gaussian noise to the
//! observed points at several levels and measure how the anchor predictor's
//! accuracy degrades. The rank-k projection filters part of the noise.

use trajspace::anchors::{anchor_predict, generate_anchors};
use trajspace::basis::TrajectoryBasis;
use trajspace::dataset::{perturb_observation, to_matrix, Segment};
use trajspace::geometry::Layout;
use trajspace::metrics::{ade, fde, PredictionSet};
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let train = synthetic::mixed_corpus(1200, 8, 12, 31);
    let basis = TrajectoryBasis::fit(
        &to_matrix(&train, Segment::Prediction, Layout::Interleaved)?,
        6,
        false,
    )?;
    let anchors = generate_anchors(&train, &basis, 20, 5, 300)?;
    let test = synthetic::mixed_corpus(300, 8, 12, 32);

    println!(" sigma (m) | ADE (m) | FDE (m)");
    println!(" ----------+---------+--------");
    for (si, sigma) in [0.0, 0.02, 0.05, 0.10].into_iter().enumerate() {
        let mut sum_ade = 0.0;
        let mut sum_fde = 0.0;
        for (i, t) in test.iter().enumerate() {
            let noisy = perturb_observation(t, sigma, (si * 100_000 + i) as u64)?;
            // The future segment stays untouched; only the input degrades.
            let pred = PredictionSet::new(anchor_predict(&noisy.obs, &anchors, &basis, None)?);
            sum_ade += ade(&pred, &t.fut)?;
            sum_fde += fde(&pred, &t.fut)?;
        }
        let n = test.len() as f64;
        println!(" {sigma:>9.2} | {:>7.3} | {:>7.3}", sum_ade / n, sum_fde / n);
    }
    Ok(())
}
