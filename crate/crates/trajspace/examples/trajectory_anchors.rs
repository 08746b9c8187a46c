//! Generate data-driven trajectory anchors: normalize the training futures,
//! project them into the coefficient space, cluster there, and confirm the
//! space duality (clustering in coefficient space equals clustering the
//! rank-k reconstructions in Euclidean space).

use nalgebra::DMatrix;
use trajspace::anchors::{generate_anchors, normalize_tracklet};
use trajspace::basis::TrajectoryBasis;
use trajspace::cluster::kmeans;
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::{flatten, Layout};
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let corpus = synthetic::mixed_corpus(1200, 8, 12, 77);
    let matrix = to_matrix(&corpus, Segment::Prediction, Layout::Interleaved)?;
    let basis = TrajectoryBasis::fit(&matrix, 6, false)?;

    let s = 20;
    let anchors = generate_anchors(&corpus, &basis, s, 42, 300)?;
    println!("{} anchors of dimension {} (inertia {:.3})", anchors.s, anchors.k, anchors.inertia);
    println!("\nfirst five anchors as normalized end points:");
    for row in 0..5 {
        let c = trajspace::basis::Coefficients {
            values: anchors.centroids.row(row).transpose(),
            segment: Segment::Prediction,
        };
        let path = trajspace::geometry::unflatten(basis.reconstruct(&c)?.as_slice(), basis.layout());
        let end = path.last().unwrap();
        println!("  anchor {row}: ends at ({:6.2}, {:6.2}) after 12 steps", end.x, end.y);
    }

    // Duality: identical seeds cluster identically in both spaces.
    let mut coeffs = DMatrix::zeros(corpus.len(), basis.k());
    let mut recon = DMatrix::zeros(corpus.len(), basis.len());
    for (i, t) in corpus.iter().enumerate() {
        let (normalized, _) = normalize_tracklet(t)?;
        let c = basis.project(&flatten(&normalized.fut, basis.layout()))?;
        recon.row_mut(i).copy_from(&basis.reconstruct(&c)?.transpose());
        coeffs.row_mut(i).copy_from(&c.values.transpose());
    }
    let in_coeff = kmeans(&coeffs, s, 42, 300)?;
    let in_euclid = kmeans(&recon, s, 42, 300)?;
    let agree = in_coeff
        .assignments
        .iter()
        .zip(&in_euclid.assignments)
        .filter(|(a, b)| a == b)
        .count();
    println!(
        "\nduality: {}/{} assignments identical between coefficient space (dim {}) \
         and Euclidean space (dim {})",
        agree,
        corpus.len(),
        basis.k(),
        basis.len()
    );
    Ok(())
}
