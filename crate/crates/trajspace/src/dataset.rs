//! Annotation parsing, tracklet windowing and trajectory matrix assembly.
//!
//! Raw files hold one record per line (`frame pedestrian_id x y` by default,
//! whitespace separated, `#` comments skipped). Records are grouped per
//! pedestrian and cut into fixed-length (observation, future) windows.

use crate::error::{Error, Result};
use crate::geometry::{flatten, Layout, Point2};
use log::info;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

/// One annotation line: a pedestrian observed at a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotationRecord {
    pub frame: i64,
    pub pedestrian: i64,
    pub position: Point2,
}

/// Which whitespace-separated column holds which field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldOrder {
    pub frame: usize,
    pub pedestrian: usize,
    pub x: usize,
    pub y: usize,
}

impl Default for FieldOrder {
    fn default() -> Self {
        FieldOrder { frame: 0, pedestrian: 1, x: 2, y: 3 }
    }
}

/// Which half of a tracklet an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Observation,
    Prediction,
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Segment::Observation => f.write_str("observation"),
            Segment::Prediction => f.write_str("prediction"),
        }
    }
}

/// One pedestrian's fixed-length (observation, future) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tracklet {
    pub pedestrian: i64,
    pub scene: String,
    /// Index of the source file within the scene; pedestrian ids are only
    /// unique per recording.
    pub recording: u32,
    /// Frame of the first observed sample.
    pub start_frame: i64,
    pub obs: Vec<Point2>,
    pub fut: Vec<Point2>,
}

impl Tracklet {
    pub fn segment(&self, segment: Segment) -> &[Point2] {
        match segment {
            Segment::Observation => &self.obs,
            Segment::Prediction => &self.fut,
        }
    }
}

/// Windowing parameters for tracklet extraction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Observed frames per tracklet.
    pub t_obs: usize,
    /// Future frames per tracklet.
    pub t_fut: usize,
    /// Offset between consecutive windows, in samples.
    pub stride: usize,
    /// Expected raw-frame gap between consecutive samples of one pedestrian.
    /// Windows containing any other gap are skipped.
    pub frame_interval: i64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { t_obs: 8, t_fut: 12, stride: 1, frame_interval: 10 }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t_obs < 2 {
            return Err(Error::argument("t_obs must be at least 2"));
        }
        if self.t_fut < 1 {
            return Err(Error::argument("t_fut must be at least 1"));
        }
        if self.stride < 1 {
            return Err(Error::argument("stride must be at least 1"));
        }
        if self.frame_interval < 1 {
            return Err(Error::argument("frame_interval must be at least 1"));
        }
        Ok(())
    }

    pub fn window_len(&self) -> usize {
        self.t_obs + self.t_fut
    }
}

/// Counts of windows discarded during extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipStats {
    /// Pedestrians whose track is shorter than one window.
    pub short_tracks: usize,
    /// Windows rejected because of a frame gap.
    pub gapped_windows: usize,
}

/// Leave-one-out split request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub held_out_scene: String,
    pub train_scenes: BTreeSet<String>,
}

impl SplitSpec {
    pub fn new(held_out: impl Into<String>, train: impl IntoIterator<Item = String>) -> Result<Self> {
        let held_out_scene = held_out.into();
        let train_scenes: BTreeSet<String> = train.into_iter().collect();
        if train_scenes.contains(&held_out_scene) {
            return Err(Error::config(format!(
                "held-out scene '{held_out_scene}' also appears in the training scenes"
            )));
        }
        Ok(SplitSpec { held_out_scene, train_scenes })
    }
}

/// Column-stacked flattened trajectories: L x N with L = 2T.
#[derive(Debug, Clone)]
pub struct TrajectoryMatrix {
    pub data: DMatrix<f64>,
    pub segment: Segment,
    pub layout: Layout,
    /// Frames per column.
    pub frames: usize,
}

/// Parse annotation text into records sorted by (pedestrian, frame).
///
/// `unit_scale` converts raw coordinate units to meters (1.0 for data that is
/// already metric). Frames must be strictly increasing per pedestrian;
/// duplicates are a data error.
pub fn parse_annotations(
    text: &str,
    unit_scale: f64,
    order: FieldOrder,
) -> Result<Vec<AnnotationRecord>> {
    if !(unit_scale.is_finite() && unit_scale > 0.0) {
        return Err(Error::argument("unit_scale must be positive and finite"));
    }
    let needed = order.frame.max(order.pedestrian).max(order.x).max(order.y) + 1;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < needed {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least {needed} fields, found {}", fields.len()),
            });
        }
        let num = |pos: usize| -> Result<f64> {
            fields[pos].parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("field {} ('{}') is not numeric", pos + 1, fields[pos]),
            })
        };
        let frame = as_index(num(order.frame)?, "frame", line_no)?;
        let pedestrian = as_index(num(order.pedestrian)?, "pedestrian id", line_no)?;
        let x = num(order.x)?;
        let y = num(order.y)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                message: "coordinates must be finite".to_string(),
            });
        }
        records.push(AnnotationRecord {
            frame,
            pedestrian,
            position: Point2::new(x * unit_scale, y * unit_scale),
        });
    }
    records.sort_by_key(|r| (r.pedestrian, r.frame));
    for pair in records.windows(2) {
        if pair[0].pedestrian == pair[1].pedestrian && pair[0].frame == pair[1].frame {
            return Err(Error::data(format!(
                "pedestrian {} has duplicate records for frame {}",
                pair[0].pedestrian, pair[0].frame
            )));
        }
    }
    Ok(records)
}

fn as_index(value: f64, what: &str, line: usize) -> Result<i64> {
    if value.fract() != 0.0 || value < 0.0 || value > i64::MAX as f64 {
        return Err(Error::Parse {
            line,
            message: format!("{what} must be a non-negative integer, got {value}"),
        });
    }
    Ok(value as i64)
}

/// Cut per-pedestrian tracks into sliding windows of `t_obs + t_fut` samples.
///
/// Records must be sorted as produced by [`parse_annotations`]. Pedestrians
/// with fewer samples than one window contribute nothing; windows with a
/// frame gap are skipped. Both cases are counted in the returned stats.
pub fn extract_tracklets(
    records: &[AnnotationRecord],
    scene: &str,
    recording: u32,
    spec: &WindowSpec,
) -> Result<(Vec<Tracklet>, SkipStats)> {
    spec.validate()?;
    let window = spec.window_len();
    let mut tracklets = Vec::new();
    let mut stats = SkipStats::default();

    let mut start = 0;
    while start < records.len() {
        let ped = records[start].pedestrian;
        let mut end = start;
        while end < records.len() && records[end].pedestrian == ped {
            end += 1;
        }
        let track = &records[start..end];
        if track.len() < window {
            stats.short_tracks += 1;
        } else {
            let mut offset = 0;
            while offset + window <= track.len() {
                let slice = &track[offset..offset + window];
                let contiguous = slice
                    .windows(2)
                    .all(|p| p[1].frame - p[0].frame == spec.frame_interval);
                if contiguous {
                    tracklets.push(Tracklet {
                        pedestrian: ped,
                        scene: scene.to_string(),
                        recording,
                        start_frame: slice[0].frame,
                        obs: slice[..spec.t_obs].iter().map(|r| r.position).collect(),
                        fut: slice[spec.t_obs..].iter().map(|r| r.position).collect(),
                    });
                } else {
                    stats.gapped_windows += 1;
                }
                offset += spec.stride;
            }
        }
        start = end;
    }
    Ok((tracklets, stats))
}

/// Stack one segment of every tracklet into an L x N matrix (column n is
/// tracklet n flattened).
pub fn to_matrix(tracklets: &[Tracklet], segment: Segment, layout: Layout) -> Result<TrajectoryMatrix> {
    let first = tracklets
        .first()
        .ok_or_else(|| Error::argument("cannot build a trajectory matrix from zero tracklets"))?;
    let frames = first.segment(segment).len();
    let l = 2 * frames;
    let mut data = DMatrix::zeros(l, tracklets.len());
    for (n, tracklet) in tracklets.iter().enumerate() {
        let pts = tracklet.segment(segment);
        if pts.len() != frames {
            return Err(Error::shape(format!(
                "tracklet {n} has {} {segment} frames, expected {frames}",
                pts.len()
            )));
        }
        data.set_column(n, &flatten(pts, layout));
    }
    Ok(TrajectoryMatrix { data, segment, layout, frames })
}

/// Split scene tracklets into (train, test) per the leave-one-out protocol.
pub fn leave_one_out(
    scenes: &BTreeMap<String, Vec<Tracklet>>,
    spec: &SplitSpec,
) -> Result<(Vec<Tracklet>, Vec<Tracklet>)> {
    if !scenes.contains_key(&spec.held_out_scene) {
        return Err(Error::config(format!(
            "held-out scene '{}' not found; known scenes: {}",
            spec.held_out_scene,
            scenes.keys().cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    for scene in &spec.train_scenes {
        if !scenes.contains_key(scene) {
            return Err(Error::config(format!("train scene '{scene}' not found")));
        }
    }
    let test = scenes[&spec.held_out_scene].clone();
    let mut train = Vec::new();
    for scene in &spec.train_scenes {
        train.extend(scenes[scene].iter().cloned());
    }
    Ok((train, test))
}

/// Add i.i.d. zero-mean Gaussian noise with standard deviation `sigma` to the
/// observed points. The future segment is returned bit-exactly unchanged.
pub fn perturb_observation(tracklet: &Tracklet, sigma: f64, seed: u64) -> Result<Tracklet> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::argument("sigma must be non-negative"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::argument(format!("invalid noise parameters: {e}")))?;
    let mut out = tracklet.clone();
    for p in &mut out.obs {
        p.x += normal.sample(&mut rng);
        p.y += normal.sample(&mut rng);
    }
    Ok(out)
}

/// Load every configured scene from `root`.
///
/// A scene named `s` is read from `root/s.txt` when present, otherwise from
/// all `*.txt` files under `root/s/` in sorted order (each file is an
/// independent recording). Tracklet counts and skip statistics are logged.
pub fn load_scenes(
    root: &Path,
    scenes: &[String],
    unit_scale: f64,
    order: FieldOrder,
    window: &WindowSpec,
) -> Result<BTreeMap<String, Vec<Tracklet>>> {
    let mut out = BTreeMap::new();
    for scene in scenes {
        let mut files = Vec::new();
        let single = root.join(format!("{scene}.txt"));
        let dir = root.join(scene);
        if single.is_file() {
            files.push(single.clone());
        } else if dir.is_dir() {
            for entry in std::fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "txt") {
                    files.push(path);
                }
            }
            files.sort();
        }
        if files.is_empty() {
            return Err(Error::config(format!(
                "scene '{scene}': no annotation file at {} or {}",
                single.display(),
                dir.display()
            )));
        }
        let mut tracklets = Vec::new();
        let mut stats = SkipStats::default();
        for (recording, path) in files.iter().enumerate() {
            let text = std::fs::read_to_string(path)?;
            let records = parse_annotations(&text, unit_scale, order).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?;
            let (mut ts, s) = extract_tracklets(&records, scene, recording as u32, window)?;
            tracklets.append(&mut ts);
            stats.short_tracks += s.short_tracks;
            stats.gapped_windows += s.gapped_windows;
        }
        info!(
            "scene={scene} files={} tracklets={} skipped_short_tracks={} skipped_gapped_windows={}",
            files.len(),
            tracklets.len(),
            stats.short_tracks,
            stats.gapped_windows
        );
        out.insert(scene.clone(), tracklets);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(frame: i64, ped: i64, x: f64, y: f64) -> AnnotationRecord {
        AnnotationRecord { frame, pedestrian: ped, position: Point2::new(x, y) }
    }

    fn straight_track(ped: i64, len: usize) -> Vec<AnnotationRecord> {
        (0..len)
            .map(|i| record(i as i64 * 10, ped, i as f64 * 0.4, 0.0))
            .collect()
    }

    #[test]
    fn parse_two_records() {
        let recs = parse_annotations("0 1 0.0 0.0\n10 1 0.4 0.0", 1.0, FieldOrder::default()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0], record(0, 1, 0.0, 0.0));
        assert_eq!(recs[1], record(10, 1, 0.4, 0.0));
    }

    #[test]
    fn parse_applies_unit_scale_and_sorts() {
        let recs =
            parse_annotations("10 2 1 2\n0 1 3 4\n0 2 5 6", 0.5, FieldOrder::default()).unwrap();
        assert_eq!(recs[0].pedestrian, 1);
        assert_eq!(recs[1], record(0, 2, 2.5, 3.0));
        assert_eq!(recs[2], record(10, 2, 0.5, 1.0));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_annotations("a b c", 1.0, FieldOrder::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let recs =
            parse_annotations("# header\n\n0 1 1.0 1.0\n", 1.0, FieldOrder::default()).unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn duplicate_frame_is_data_error() {
        let err = parse_annotations("0 1 0 0\n0 1 1 1", 1.0, FieldOrder::default()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn custom_field_order() {
        let order = FieldOrder { frame: 1, pedestrian: 0, x: 2, y: 3 };
        let recs = parse_annotations("7 30 1.5 2.5", 1.0, order).unwrap();
        assert_eq!(recs[0], record(30, 7, 1.5, 2.5));
    }

    #[test]
    fn exact_window_yields_one_tracklet() {
        let spec = WindowSpec::default();
        let (ts, stats) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(stats, SkipStats::default());
        assert_eq!(ts[0].obs.len(), 8);
        assert_eq!(ts[0].fut.len(), 12);
        assert_eq!(ts[0].start_frame, 0);
    }

    #[test]
    fn windowing_count_matches_enumeration() {
        // 22 samples, window 20, stride 1: offsets 0, 1, 2.
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 22), "s", 0, &spec).unwrap();
        assert_eq!(ts.len(), 3);
    }

    #[test]
    fn short_track_yields_nothing() {
        let spec = WindowSpec::default();
        let (ts, stats) = extract_tracklets(&straight_track(1, 19), "s", 0, &spec).unwrap();
        assert!(ts.is_empty());
        assert_eq!(stats.short_tracks, 1);
    }

    #[test]
    fn gapped_window_is_skipped_and_counted() {
        let mut recs = straight_track(1, 21);
        recs.remove(10); // hole in the middle
        let spec = WindowSpec::default();
        let (ts, stats) = extract_tracklets(&recs, "s", 0, &spec).unwrap();
        assert!(ts.is_empty());
        assert_eq!(stats.gapped_windows, 1);
    }

    #[test]
    fn stride_two_halves_window_count() {
        let spec = WindowSpec { stride: 2, ..WindowSpec::default() };
        let (ts, _) = extract_tracklets(&straight_track(1, 24), "s", 0, &spec).unwrap();
        // offsets 0, 2, 4
        assert_eq!(ts.len(), 3);
    }

    #[test]
    fn matrix_column_is_interleaved_flattening() {
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        let m = to_matrix(&ts, Segment::Observation, Layout::Interleaved).unwrap();
        assert_eq!(m.data.nrows(), 16);
        assert_eq!(m.data.ncols(), 1);
        for i in 0..8 {
            assert_eq!(m.data[(2 * i, 0)], i as f64 * 0.4);
            assert_eq!(m.data[(2 * i + 1, 0)], 0.0);
        }
    }

    #[test]
    fn identical_tracklets_give_rank_one_matrix() {
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        let many: Vec<Tracklet> = (0..5).map(|_| ts[0].clone()).collect();
        let m = to_matrix(&many, Segment::Prediction, Layout::Interleaved).unwrap();
        assert_eq!(m.data.rank(1e-9), 1);
    }

    #[test]
    fn empty_tracklet_list_rejected() {
        assert!(matches!(
            to_matrix(&[], Segment::Observation, Layout::Interleaved),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn leave_one_out_partitions() {
        let spec = WindowSpec::default();
        let (a, _) = extract_tracklets(&straight_track(1, 20), "a", 0, &spec).unwrap();
        let (b, _) = extract_tracklets(&straight_track(2, 21), "b", 0, &spec).unwrap();
        let mut scenes = BTreeMap::new();
        scenes.insert("a".to_string(), a.clone());
        scenes.insert("b".to_string(), b.clone());
        let split = SplitSpec::new("a", ["b".to_string()].into_iter()).unwrap();
        let (train, test) = leave_one_out(&scenes, &split).unwrap();
        assert_eq!(test, a);
        assert_eq!(train, b);
    }

    #[test]
    fn unknown_held_out_scene_is_config_error() {
        let scenes: BTreeMap<String, Vec<Tracklet>> =
            [("a".to_string(), vec![]), ("b".to_string(), vec![])].into();
        let split = SplitSpec::new("c", ["a".to_string(), "b".to_string()].into_iter()).unwrap();
        assert!(matches!(leave_one_out(&scenes, &split), Err(Error::Config(_))));
    }

    #[test]
    fn zero_sigma_perturbation_is_identity() {
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        let p = perturb_observation(&ts[0], 0.0, 42).unwrap();
        assert_eq!(p, ts[0]);
    }

    #[test]
    fn perturbation_is_deterministic_and_leaves_future_untouched() {
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        let a = perturb_observation(&ts[0], 0.05, 7).unwrap();
        let b = perturb_observation(&ts[0], 0.05, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fut, ts[0].fut);
        assert_ne!(a.obs, ts[0].obs);
    }

    #[test]
    fn negative_sigma_rejected() {
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        assert!(matches!(
            perturb_observation(&ts[0], -0.1, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn noise_standard_deviation_matches_sigma() {
        // Statistics oracle: the sample stddev over 1e5 points stays within
        // 1% of the requested sigma.
        let spec = WindowSpec::default();
        let (ts, _) = extract_tracklets(&straight_track(1, 20), "s", 0, &spec).unwrap();
        let sigma = 0.1;
        let mut noise = Vec::new();
        for seed in 0..6250u64 {
            let p = perturb_observation(&ts[0], sigma, seed).unwrap();
            for (np, op) in p.obs.iter().zip(&ts[0].obs) {
                noise.push(np.x - op.x);
                noise.push(np.y - op.y);
            }
        }
        assert!(noise.len() >= 100_000);
        let mean = noise.iter().sum::<f64>() / noise.len() as f64;
        let var = noise.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (noise.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - sigma).abs() < 0.01 * sigma, "sample sd {sd}");
    }
}
