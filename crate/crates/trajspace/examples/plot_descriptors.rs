//! Render the leading basis vectors as SVG plots: the 2D path each vector
//! traces plus its x(t) and y(t) components. On walking data the first two
//! vectors read as constant-velocity motion along each axis and the later
//! ones as speed and heading changes.

use trajspace::basis::TrajectoryBasis;
use trajspace::dataset::{to_matrix, Segment};
use trajspace::geometry::Layout;
use trajspace::plot::basis_vector_svg;
use trajspace::synthetic;

fn main() -> trajspace::Result<()> {
    let corpus = synthetic::mixed_corpus(1500, 8, 12, 23);
    let basis = TrajectoryBasis::fit(
        &to_matrix(&corpus, Segment::Prediction, Layout::Interleaved)?,
        6,
        false,
    )?;

    let dir = std::env::temp_dir().join("trajspace_example_plots");
    std::fs::create_dir_all(&dir)?;
    for i in 0..basis.k() {
        let svg = basis_vector_svg(&basis, i)?;
        let path = dir.join(format!("u{}.svg", i + 1));
        std::fs::write(&path, svg)?;
        // A quick textual sketch of the same information.
        let pts = basis.vector_as_path(i);
        let net = *pts.last().unwrap() - pts[0];
        println!(
            "u{}: net direction ({:+.2}, {:+.2}), wrote {}",
            i + 1,
            net.x,
            net.y,
            path.display()
        );
    }
    Ok(())
}
