//! Evaluation drivers and report emission: per-scene metric aggregation,
//! the descriptor reconstruction study, CSV rows and JSON reports.

use crate::basis::Coefficients;
use crate::config::RunConfig;
use crate::dataset::Tracklet;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::metrics::{
    ade, classify_nonlinear, collision_cases, fde, loss_coeff, tcc, CollisionMode, LossReport,
    PredictionSet,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const REPORT_VERSION: u32 = 1;

/// One evaluated tracklet: its predictions plus the ground truth it is
/// scored against.
#[derive(Debug, Clone)]
pub struct EvalCase {
    pub tracklet: Tracklet,
    pub prediction: PredictionSet,
    /// Ground-truth coefficients in the candidates' frame, when known.
    pub gt_coeff: Option<Coefficients>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub col_threshold: f64,
    pub col_mode: CollisionMode,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            col_threshold: 0.1,
            col_mode: CollisionMode::BestAde,
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Flat result row for one (scene, model, k, s, sigma, subset) evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scene: String,
    pub model: String,
    pub k: usize,
    pub s: usize,
    pub sigma: f64,
    pub subset: String,
    pub count: usize,
    pub ade: f64,
    pub fde: f64,
    pub tcc: f64,
    /// Collision percentage; absent when no window holds two pedestrians.
    pub col: Option<f64>,
    pub losses: Option<LossReport>,
}

/// Evaluation report: resolved configuration plus one row per protocol cell.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub config: RunConfig,
    pub rows: Vec<MetricsRow>,
}

/// Score one scene's cases: best-of-s ADE/FDE/TCC averaged over tracklets,
/// collision rate over windows that share (recording, start_frame), and the
/// training losses (the coefficient term only when ground-truth coefficients
/// and candidates are available).
pub fn evaluate_cases(
    cases: &[EvalCase],
    candidates: Option<&DMatrix<f64>>,
    opts: &EvalOptions,
) -> Result<(usize, f64, f64, f64, Option<f64>, Option<LossReport>)> {
    if cases.is_empty() {
        return Err(Error::argument("nothing to evaluate"));
    }
    let n = cases.len() as f64;
    let mut sum_ade = 0.0;
    let mut sum_fde = 0.0;
    let mut sum_tcc = 0.0;
    let mut sum_coeff = 0.0;
    let mut coeff_count = 0usize;
    for case in cases {
        sum_ade += ade(&case.prediction, &case.tracklet.fut)?;
        sum_fde += fde(&case.prediction, &case.tracklet.fut)?;
        sum_tcc += tcc(&case.prediction, &case.tracklet.fut)?;
        if let (Some(cand), Some(gt)) = (candidates, &case.gt_coeff) {
            sum_coeff += loss_coeff(cand, gt)?;
            coeff_count += 1;
        }
    }

    // Collision windows: pedestrians observed over the same frames of the
    // same recording.
    let mut windows: BTreeMap<(u32, i64), Vec<usize>> = BTreeMap::new();
    for (i, case) in cases.iter().enumerate() {
        windows
            .entry((case.tracklet.recording, case.tracklet.start_frame))
            .or_default()
            .push(i);
    }
    let mut hits = 0usize;
    let mut total = 0usize;
    for members in windows.values() {
        if members.len() < 2 {
            continue;
        }
        let window: Vec<(&PredictionSet, &[Point2])> = members
            .iter()
            .map(|&i| (&cases[i].prediction, cases[i].tracklet.fut.as_slice()))
            .collect();
        if let Some((h, t)) = collision_cases(&window, opts.col_threshold, opts.col_mode)? {
            hits += h;
            total += t;
        }
    }
    let col = (total > 0).then(|| 100.0 * hits as f64 / total as f64);

    let l_dist = sum_ade / n;
    let l_end = sum_fde / n;
    let losses = (coeff_count == cases.len()).then(|| {
        LossReport::new(sum_coeff / n, l_dist, l_end, opts.alpha, opts.beta)
    });

    Ok((cases.len(), sum_ade / n, sum_fde / n, sum_tcc / n, col, losses))
}

/// Wrap [`evaluate_cases`] into a labeled row.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_to_row(
    scene: &str,
    model: &str,
    k: usize,
    s: usize,
    sigma: f64,
    subset: &str,
    cases: &[EvalCase],
    candidates: Option<&DMatrix<f64>>,
    opts: &EvalOptions,
) -> Result<MetricsRow> {
    let (count, ade, fde, tcc, col, losses) = evaluate_cases(cases, candidates, opts)?;
    Ok(MetricsRow {
        scene: scene.to_string(),
        model: model.to_string(),
        k,
        s,
        sigma,
        subset: subset.to_string(),
        count,
        ade,
        fde,
        tcc,
        col,
        losses,
    })
}

/// The subset of cases whose future fails the straight-line test.
pub fn nonlinear_subset(cases: &[EvalCase], tol: f64) -> Result<Vec<EvalCase>> {
    let mut out = Vec::new();
    for case in cases {
        if classify_nonlinear(&case.tracklet.fut, tol)? {
            out.push(case.clone());
        }
    }
    Ok(out)
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(
        "scene,model,k,s,sigma,subset,count,ade,fde,tcc,col,l_coeff,l_dist,l_end,loss_total\n",
    );
    for r in rows {
        let col = r.col.map(|v| v.to_string()).unwrap_or_default();
        let (lc, ld, le, lt) = match &r.losses {
            Some(l) => (
                l.l_coeff.to_string(),
                l.l_dist.to_string(),
                l.l_end.to_string(),
                l.total.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scene, r.model, r.k, r.s, r.sigma, r.subset, r.count, r.ade, r.fde, r.tcc, col,
            lc, ld, le, lt
        );
    }
    out
}

/// One cell of the descriptor reconstruction study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    /// Descriptor label, e.g. `linear`, `bezier-o5`, `basis-k6`.
    pub descriptor: String,
    /// Descriptor dimension (parameters per trajectory).
    pub dim: usize,
    pub scene: String,
    pub obs_mm: f64,
    pub pred_mm: f64,
    pub count: usize,
}

/// Reconstruction-accuracy study over descriptors and scenes.
#[derive(Debug, Serialize, Deserialize)]
pub struct StudyReport {
    pub format_version: u32,
    pub config: RunConfig,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn new(config: RunConfig, rows: Vec<StudyRow>) -> Self {
        StudyReport { format_version: REPORT_VERSION, config, rows }
    }

    /// Per-descriptor average across scenes (unweighted, like the study's
    /// AVG column).
    pub fn averages(&self) -> Vec<StudyRow> {
        let mut grouped: BTreeMap<(String, usize), (f64, f64, usize, usize)> = BTreeMap::new();
        let mut order: Vec<(String, usize)> = Vec::new();
        for r in &self.rows {
            let key = (r.descriptor.clone(), r.dim);
            if !grouped.contains_key(&key) {
                order.push(key.clone());
            }
            let e = grouped.entry(key).or_insert((0.0, 0.0, 0, 0));
            e.0 += r.obs_mm;
            e.1 += r.pred_mm;
            e.2 += r.count;
            e.3 += 1;
        }
        order
            .into_iter()
            .map(|key| {
                let (obs, pred, count, scenes) = grouped[&key];
                StudyRow {
                    descriptor: key.0,
                    dim: key.1,
                    scene: "avg".to_string(),
                    obs_mm: obs / scenes as f64,
                    pred_mm: pred / scenes as f64,
                    count,
                }
            })
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("descriptor,dim,scene,obs_mm,pred_mm,count\n");
        for r in self.rows.iter() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.descriptor, r.dim, r.scene, r.obs_mm, r.pred_mm, r.count
            );
        }
        for r in self.averages() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.descriptor, r.dim, r.scene, r.obs_mm, r.pred_mm, r.count
            );
        }
        out
    }

    /// Human-readable table: one row per descriptor, one `obs / pred` column
    /// per scene plus the average, rounded to whole millimeters.
    pub fn table(&self, scenes: &[String]) -> String {
        let mut labels: Vec<(String, usize)> = Vec::new();
        for r in &self.rows {
            let key = (r.descriptor.clone(), r.dim);
            if !labels.contains(&key) {
                labels.push(key);
            }
        }
        let cell = |descriptor: &str, scene: &str| -> String {
            self.rows
                .iter()
                .find(|r| r.descriptor == descriptor && r.scene == scene)
                .map(|r| format!("{:.0} / {:.0}", r.obs_mm, r.pred_mm))
                .unwrap_or_else(|| "-".to_string())
        };
        let averages = self.averages();

        let mut header = format!("{:<14} {:>4}", "descriptor", "dim");
        for s in scenes {
            let _ = write!(header, " {:>13}", s);
        }
        let _ = write!(header, " {:>13}", "avg");
        let mut out = String::new();
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.len()));
        for (descriptor, dim) in &labels {
            let _ = write!(out, "{:<14} {:>4}", descriptor, dim);
            for s in scenes {
                let _ = write!(out, " {:>13}", cell(descriptor, s));
            }
            let avg = averages
                .iter()
                .find(|r| &r.descriptor == descriptor)
                .map(|r| format!("{:.0} / {:.0}", r.obs_mm, r.pred_mm))
                .unwrap_or_else(|| "-".to_string());
            let _ = writeln!(out, " {:>13}", avg);
        }
        out.push_str("(mean point distance in mm, observation / prediction)\n");
        out
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::data(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}
