//! The evaluation metrics on a small hand-built scene: best-of-s ADE/FDE,
//! temporal correlation, collision rate and the three training losses.

use trajspace::geometry::Point2;
use trajspace::metrics::{
    ade, col, fde, loss_dist, loss_end, tcc, CollisionMode, LossReport, PredictionSet,
};

fn path(start: Point2, step: Point2, bend: f64, len: usize) -> Vec<Point2> {
    let mut p = start;
    let mut dir = step;
    (0..len)
        .map(|_| {
            p = p + dir;
            dir = dir.rotate(bend);
            p
        })
        .collect()
}

fn main() -> trajspace::Result<()> {
    let t_fut = 12;
    let gt = path(Point2::ZERO, Point2::new(0.4, 0.0), 0.05, t_fut);

    // Three candidate futures: one close, one veering off, one offset.
    let close = path(Point2::ZERO, Point2::new(0.42, 0.01), 0.045, t_fut);
    let veering = path(Point2::ZERO, Point2::new(0.4, 0.0), -0.12, t_fut);
    let offset: Vec<Point2> = gt.iter().map(|p| *p + Point2::new(0.0, 1.5)).collect();
    let pred = PredictionSet::new(vec![veering.clone(), close, offset]);

    println!("ADE  (best of 3): {:.4} m", ade(&pred, &gt)?);
    println!("FDE  (best of 3): {:.4} m", fde(&pred, &gt)?);
    println!("TCC  (best-ADE sample): {:.4}", tcc(&pred, &gt)?);

    // A second pedestrian crossing the first one's path.
    let gt2 = path(Point2::new(2.4, -1.2), Point2::new(0.0, 0.25), 0.0, t_fut);
    let pred2 = PredictionSet::new(vec![gt2.clone()]);
    let window = [(&pred, gt.as_slice()), (&pred2, gt2.as_slice())];
    for threshold in [0.05, 0.2, 0.5] {
        let rate = col(&window, threshold, CollisionMode::BestAde)?.unwrap();
        println!("COL  @ {threshold:.2} m threshold: {rate:.0}%");
    }

    // Training losses on the single-tracklet batch; the time-distance and
    // endpoint terms coincide with ADE and FDE by construction.
    let report = LossReport::new(0.37, loss_dist(&pred, &gt)?, loss_end(&pred, &gt)?, 1.0, 1.0);
    println!(
        "\nlosses: coeff {:.4} + dist {:.4} + end {:.4} = {:.4}",
        report.l_coeff, report.l_dist, report.l_end, report.total
    );
    Ok(())
}
