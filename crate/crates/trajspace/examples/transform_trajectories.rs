//! Move a trajectory between Euclidean space and the coefficient space:
//! project, reconstruct, and watch the approximation sharpen as the rank
//! grows.

use trajspace::basis::TrajectoryBasis;
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::{flatten, Layout};
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let corpus = synthetic::mixed_corpus(800, 8, 12, 13);
    let matrix = to_matrix(&corpus, Segment::Prediction, Layout::Interleaved)?;
    let full = TrajectoryBasis::fit(&matrix, 24, false)?;

    // A curving test trajectory the corpus has never seen.
    let probe = &synthetic::mixed_corpus(1, 8, 12, 999)[0];
    println!("probe future: {} points", probe.fut.len());

    println!("\n rank | coefficients (leading)            | mean error (mm)");
    println!(" -----+-----------------------------------+----------------");
    for k in [1, 2, 4, 6, 8, 12, 24] {
        let basis = full.truncate(k)?;
        let coeffs = basis.project(&flatten(&probe.fut, basis.layout()))?;
        let recon = basis.round_trip(&probe.fut)?;
        let err: f64 = probe
            .fut
            .iter()
            .zip(&recon)
            .map(|(a, b)| a.dist(*b))
            .sum::<f64>()
            / probe.fut.len() as f64;
        let lead: Vec<String> = coeffs.values.iter().take(4).map(|c| format!("{c:7.3}")).collect();
        println!(" {k:4} | {:<33} | {:>12.4}", lead.join(" "), err * 1000.0);
    }

    // The transform is an isometry: distances survive the projection.
    let a = &corpus[10].fut;
    let b = &corpus[11].fut;
    let basis = full.truncate(6)?;
    let ca = basis.project(&flatten(a, Layout::Interleaved))?;
    let cb = basis.project(&flatten(b, Layout::Interleaved))?;
    let euclid = (basis.reconstruct(&ca)? - basis.reconstruct(&cb)?).norm();
    let coeff = (&ca.values - &cb.values).norm();
    println!("\nisometry check: |U ca - U cb| = {euclid:.9}, |ca - cb| = {coeff:.9}");
    Ok(())
}
