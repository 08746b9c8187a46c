//! Fit a trajectory basis pair on a synthetic corpus, inspect its spectrum
//! and persist it to a versioned file.

use trajspace::basis::{BasisPair, TrajectoryBasis};
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::Layout;
use trajspace::persist;
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let corpus = synthetic::mixed_corpus(500, 8, 12, 7);
    println!("corpus: {} tracklets, T_obs=8, T_fut=12", corpus.len());

    let obs_matrix = to_matrix(&corpus, Segment::Observation, Layout::Interleaved)?;
    let pred_matrix = to_matrix(&corpus, Segment::Prediction, Layout::Interleaved)?;
    println!(
        "stacked matrices: observation {}x{}, prediction {}x{}",
        obs_matrix.data.nrows(),
        obs_matrix.data.ncols(),
        pred_matrix.data.nrows(),
        pred_matrix.data.ncols()
    );

    let k = 6;
    let pair = BasisPair {
        obs: TrajectoryBasis::fit(&obs_matrix, k, false)?,
        pred: TrajectoryBasis::fit(&pred_matrix, k, false)?,
        provenance: "synthetic mixed corpus, seed 7".to_string(),
    };

    for (name, basis) in [("observation", &pair.obs), ("prediction", &pair.pred)] {
        let sigma = basis.singular_values();
        let energy: f64 = sigma.iter().map(|s| s * s).sum();
        let kept: f64 = sigma.iter().take(k).map(|s| s * s).sum();
        println!("\n{name} basis: rank {k}, {} singular values", sigma.len());
        print!("  spectrum:");
        for s in sigma.iter().take(10) {
            print!(" {s:.2}");
        }
        println!(" ...");
        println!("  top-{k} energy fraction: {:.6}", kept / energy);
    }

    let path = std::env::temp_dir().join("trajspace_example_descriptor.json");
    persist::save_basis_pair(&path, &pair)?;
    let loaded = persist::load_basis_pair(&path)?;
    println!(
        "\nsaved to {} and loaded back: k={}, provenance='{}'",
        path.display(),
        loaded.pred.k(),
        loaded.provenance
    );
    Ok(())
}
