//! Seeded synthetic pedestrian corpora for the examples, tests and demos.
//! No external data is needed to exercise the full pipeline.

use crate::dataset::Tracklet;
use crate::error::Result;
use crate::geometry::Point2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

fn tracklet(id: i64, obs: Vec<Point2>, fut: Vec<Point2>) -> Tracklet {
    Tracklet {
        pedestrian: id,
        scene: "synthetic".to_string(),
        recording: 0,
        start_frame: 0,
        obs,
        fut,
    }
}

/// Constant-velocity walkers. With `through_origin` every path satisfies
/// p(t) = v*t, confining both segments to a two-dimensional subspace.
pub fn constant_velocity_corpus(
    n: usize,
    t_obs: usize,
    t_fut: usize,
    seed: u64,
    through_origin: bool,
) -> Vec<Tracklet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let speed = 0.2 + 1.2 * rng.random::<f64>();
            let v = Point2::new(angle.cos(), angle.sin()) * speed;
            let origin = if through_origin {
                Point2::ZERO
            } else {
                Point2::new(rng.random::<f64>() * 10.0 - 5.0, rng.random::<f64>() * 10.0 - 5.0)
            };
            let obs = (0..t_obs).map(|t| origin + v * t as f64).collect();
            let fut = (t_obs..t_obs + t_fut).map(|t| origin + v * t as f64).collect();
            tracklet(i as i64, obs, fut)
        })
        .collect()
}

/// Walkers with mixed motion patterns: straight, arcing turns and speed
/// changes, plus small per-step jitter.
pub fn mixed_corpus(n: usize, t_obs: usize, t_fut: usize, seed: u64) -> Vec<Tracklet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (obs, fut) = simulate_walk(&mut rng, t_obs, t_fut);
            tracklet(i as i64, obs, fut)
        })
        .collect()
}

fn simulate_walk(rng: &mut ChaCha8Rng, t_obs: usize, t_fut: usize) -> (Vec<Point2>, Vec<Point2>) {
    let mut p = Point2::new(rng.random::<f64>() * 12.0 - 6.0, rng.random::<f64>() * 12.0 - 6.0);
    let heading = rng.random::<f64>() * std::f64::consts::TAU;
    let mut speed = 0.25 + rng.random::<f64>();
    let mode = rng.random_range(0..5u32);
    // Per-step heading turn and speed factor by motion mode.
    let (turn, speed_factor) = match mode {
        0 | 1 => (0.0, 1.0),                                       // straight
        2 => (0.04 + 0.08 * rng.random::<f64>(), 1.0),             // arc left
        3 => (-(0.04 + 0.08 * rng.random::<f64>()), 1.0),          // arc right
        _ => (0.0, if rng.random::<bool>() { 0.93 } else { 1.06 }), // decelerate / accelerate
    };
    let mut dir = heading;
    let mut obs = Vec::with_capacity(t_obs);
    let mut fut = Vec::with_capacity(t_fut);
    for t in 0..t_obs + t_fut {
        if t < t_obs {
            obs.push(p);
        } else {
            fut.push(p);
        }
        dir += turn;
        speed *= speed_factor;
        let jitter = Point2::new(
            (rng.random::<f64>() - 0.5) * 0.02,
            (rng.random::<f64>() - 0.5) * 0.02,
        );
        p = p + Point2::new(dir.cos(), dir.sin()) * speed + jitter;
    }
    (obs, fut)
}

/// Write synthetic annotation files, one `<scene>.txt` per requested scene,
/// in the raw `frame pedestrian_id x y` format. Each scene holds
/// `pedestrians` walkers observed over `samples` frames at interval 10, all
/// overlapping in time so collision windows exist.
pub fn write_scene_files(
    dir: &Path,
    scenes: &[&str],
    pedestrians: usize,
    samples: usize,
    seed: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (si, scene) in scenes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((si as u64 + 1) << 32));
        let mut lines = String::new();
        let _ = writeln!(lines, "# synthetic scene '{scene}'");
        let mut tracks = Vec::new();
        for _ in 0..pedestrians {
            let (mut obs, mut fut) = simulate_walk(&mut rng, samples / 2, samples - samples / 2);
            obs.append(&mut fut);
            tracks.push(obs);
        }
        for t in 0..samples {
            for (ped, track) in tracks.iter().enumerate() {
                let _ = writeln!(
                    lines,
                    "{} {} {:.6} {:.6}",
                    t as i64 * 10,
                    ped as i64 + 1,
                    track[t].x,
                    track[t].y
                );
            }
        }
        std::fs::write(dir.join(format!("{scene}.txt")), lines)?;
    }
    Ok(())
}
