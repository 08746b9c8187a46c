//! Command-line surface: `fit`, `recon-eval`, `anchors`, `predict`, `eval`,
//! `perturb-eval`, `nonlinear-eval` and `plot-basis`, wired to the library
//! pipeline. All commands are deterministic for a fixed config and seed.

use crate::anchors::{anchor_predict, generate_anchors, refine, CorrectionOffsets, NormalizationParams};
use crate::basis::{BasisPair, TrajectoryBasis};
use crate::config::RunConfig;
use crate::curves::{bernstein_basis, bspline_basis, curve_error, linear_error};
use crate::dataset::{
    leave_one_out, load_scenes, perturb_observation, to_matrix, Segment, SplitSpec, Tracklet,
};
use crate::error::{Error, Result};
use crate::geometry::{flatten, Layout};
use crate::metrics::{CollisionMode, PredictionSet};
use crate::persist;
use crate::plot;
use crate::report::{
    evaluate_to_row, metrics_csv, nonlinear_subset, write_json, write_text, EvalCase, EvalOptions,
    MetricsReport, MetricsRow, StudyReport, StudyRow, REPORT_VERSION,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "trajspace", version, about = "Low-rank trajectory descriptors: fit, evaluate and predict")]
pub struct Cli {
    /// TOML config file; command-line flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Interleaved,
    Planar,
}

impl From<LayoutArg> for Layout {
    fn from(v: LayoutArg) -> Layout {
        match v {
            LayoutArg::Interleaved => Layout::Interleaved,
            LayoutArg::Planar => Layout::Planar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmentArg {
    Obs,
    Pred,
    Both,
}

/// Command-line overrides mirroring the config fields.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Dataset root directory.
    #[arg(long, global = true)]
    pub data_root: Option<PathBuf>,
    /// Output directory for descriptors, anchors, predictions and reports.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated scene list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub scenes: Option<Vec<String>>,
    /// Held-out scene for leave-one-out commands.
    #[arg(long, global = true)]
    pub held_out: Option<String>,
    #[arg(long, global = true)]
    pub t_obs: Option<usize>,
    #[arg(long, global = true)]
    pub t_fut: Option<usize>,
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// Raw-frame gap between consecutive samples.
    #[arg(long, global = true)]
    pub frame_interval: Option<i64>,
    /// Meters per raw coordinate unit.
    #[arg(long, global = true)]
    pub unit_scale: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub layout: Option<LayoutArg>,
    /// Subtract the corpus mean before fitting the basis.
    #[arg(long, global = true)]
    pub center: bool,
    /// Basis rank.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Prediction modes / anchor count.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub kmeans_max_iter: Option<usize>,
    /// Collision threshold in meters.
    #[arg(long, global = true)]
    pub col_threshold: Option<f64>,
    /// Collision check over all s x s sample pairings.
    #[arg(long, global = true)]
    pub col_all_pairs: bool,
    /// Comma-separated noise levels for perturb-eval.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    /// Order of the comparison curves.
    #[arg(long, global = true)]
    pub curve_order: Option<usize>,
    /// Control points of the comparison B-spline.
    #[arg(long, global = true)]
    pub bspline_controls: Option<usize>,
    /// Comma-separated ranks swept by recon-eval.
    #[arg(long, global = true, value_delimiter = ',')]
    pub study_ks: Option<Vec<usize>>,
    /// Evaluate the study on all scenes instead of the held-out fold.
    #[arg(long, global = true)]
    pub full_corpus: bool,
    /// Linear-fit error threshold for the non-linear subset, meters.
    #[arg(long, global = true)]
    pub nonlinear_tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            };
        }
        set!(data_root);
        set!(out_dir);
        set!(scenes);
        set!(t_obs);
        set!(t_fut);
        set!(stride);
        set!(frame_interval);
        set!(unit_scale);
        set!(k);
        set!(s);
        set!(seed);
        set!(kmeans_max_iter);
        set!(col_threshold);
        set!(sigmas);
        set!(curve_order);
        set!(bspline_controls);
        set!(study_ks);
        set!(nonlinear_tol);
        if let Some(h) = &self.held_out {
            cfg.held_out = Some(h.clone());
        }
        if let Some(layout) = self.layout {
            cfg.layout = layout.into();
        }
        if self.center {
            cfg.center = true;
        }
        if self.col_all_pairs {
            cfg.col_all_pairs = true;
        }
        if self.full_corpus {
            cfg.full_corpus = true;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the descriptor basis pair per leave-one-out fold.
    Fit,
    /// Reconstruction-accuracy study of every descriptor over all folds.
    ReconEval,
    /// Cluster trajectory anchors for the held-out fold.
    Anchors,
    /// Predict multi-modal futures for the held-out fold's test tracklets.
    Predict {
        /// Correction-offset file applied to the anchors (default: zeros).
        #[arg(long)]
        offsets: Option<PathBuf>,
    },
    /// Evaluate a prediction file against ground truth.
    Eval {
        /// Prediction file (default: the fold's predict output).
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Prediction robustness under Gaussian observation noise.
    PerturbEval,
    /// Evaluation restricted to non-linear futures, next to the full set.
    NonlinearEval,
    /// Render the basis vectors of a descriptor file as SVG plots.
    PlotBasis {
        /// Descriptor file (default: the fold's fit output).
        #[arg(long)]
        descriptor: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pred")]
        segment: SegmentArg,
    },
}

/// Resolve the config, apply overrides and dispatch.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    match cli.command {
        Command::Fit => cmd_fit(&cfg),
        Command::ReconEval => cmd_recon_eval(&cfg),
        Command::Anchors => cmd_anchors(&cfg),
        Command::Predict { offsets } => cmd_predict(&cfg, offsets.as_deref()),
        Command::Eval { predictions } => cmd_eval(&cfg, predictions.as_deref()),
        Command::PerturbEval => cmd_perturb_eval(&cfg),
        Command::NonlinearEval => cmd_nonlinear_eval(&cfg),
        Command::PlotBasis { descriptor, segment } => {
            cmd_plot_basis(&cfg, descriptor.as_deref(), segment)
        }
    }
}

fn split_for(cfg: &RunConfig, fold: &str) -> Result<SplitSpec> {
    SplitSpec::new(
        fold.to_string(),
        cfg.scenes.iter().filter(|s| s.as_str() != fold).cloned(),
    )
}

fn load_all(cfg: &RunConfig) -> Result<BTreeMap<String, Vec<Tracklet>>> {
    load_scenes(
        &cfg.data_root,
        &cfg.scenes,
        cfg.unit_scale,
        cfg.field_order,
        &cfg.window(),
    )
}

fn fit_pair(cfg: &RunConfig, train: &[Tracklet], fold: &str, k: usize) -> Result<BasisPair> {
    if train.is_empty() {
        return Err(Error::data(format!("fold '{fold}' has no training tracklets")));
    }
    let obs_m = to_matrix(train, Segment::Observation, cfg.layout)?;
    let pred_m = to_matrix(train, Segment::Prediction, cfg.layout)?;
    let obs = TrajectoryBasis::fit(&obs_m, k.min(obs_m.data.nrows()), cfg.center)?;
    let pred = TrajectoryBasis::fit(&pred_m, k.min(pred_m.data.nrows()), cfg.center)?;
    let provenance = format!(
        "train_scenes={}; held_out={fold}; n={}; k={k}; layout={}; centered={}",
        cfg.scenes
            .iter()
            .filter(|s| s.as_str() != fold)
            .cloned()
            .collect::<Vec<_>>()
            .join("+"),
        train.len(),
        cfg.layout,
        cfg.center
    );
    Ok(BasisPair { obs, pred, provenance })
}

fn spectrum_string(basis: &TrajectoryBasis) -> String {
    basis
        .singular_values()
        .iter()
        .map(|s| format!("{s:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_fit(cfg: &RunConfig) -> Result<()> {
    let scenes = load_all(cfg)?;
    let folds: Vec<String> = match &cfg.held_out {
        Some(f) => vec![f.clone()],
        None => cfg.scenes.clone(),
    };
    for fold in &folds {
        let (train, _) = leave_one_out(&scenes, &split_for(cfg, fold)?)?;
        let pair = fit_pair(cfg, &train, fold, cfg.k)?;
        info!("fold={fold} segment=observation spectrum=[{}]", spectrum_string(&pair.obs));
        info!("fold={fold} segment=prediction spectrum=[{}]", spectrum_string(&pair.pred));
        let path = cfg.descriptor_path(fold);
        persist::save_basis_pair(&path, &pair)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_recon_eval(cfg: &RunConfig) -> Result<()> {
    let scenes = load_all(cfg)?;
    let bezier_obs = bernstein_basis(cfg.curve_order, cfg.t_obs)?;
    let bezier_pred = bernstein_basis(cfg.curve_order, cfg.t_fut)?;
    let bspline_obs = bspline_basis(cfg.curve_order, cfg.bspline_controls, cfg.t_obs)?;
    let bspline_pred = bspline_basis(cfg.curve_order, cfg.bspline_controls, cfg.t_fut)?;

    let mut rows = Vec::new();
    for fold in &cfg.scenes {
        let (train, test) = leave_one_out(&scenes, &split_for(cfg, fold)?)?;
        let eval_set: Vec<Tracklet> = if cfg.full_corpus {
            scenes.values().flat_map(|v| v.iter().cloned()).collect()
        } else {
            test
        };
        if eval_set.is_empty() {
            return Err(Error::data(format!("fold '{fold}' has no evaluation tracklets")));
        }
        let n = eval_set.len();
        let to_mm = |v: f64| v * 1000.0 / n as f64;

        // Endpoint interpolation.
        let mut obs_sum = 0.0;
        let mut pred_sum = 0.0;
        for t in &eval_set {
            obs_sum += linear_error(&t.obs)?;
            pred_sum += linear_error(&t.fut)?;
        }
        rows.push(StudyRow {
            descriptor: "linear".to_string(),
            dim: 4,
            scene: fold.clone(),
            obs_mm: to_mm(obs_sum),
            pred_mm: to_mm(pred_sum),
            count: n,
        });

        // Parametric curves.
        for (label, basis_obs, basis_pred) in [
            (format!("bezier-o{}", cfg.curve_order), &bezier_obs, &bezier_pred),
            (format!("bspline-o{}", cfg.curve_order), &bspline_obs, &bspline_pred),
        ] {
            let mut obs_sum = 0.0;
            let mut pred_sum = 0.0;
            for t in &eval_set {
                obs_sum += curve_error(basis_obs, &t.obs)?;
                pred_sum += curve_error(basis_pred, &t.fut)?;
            }
            rows.push(StudyRow {
                descriptor: label,
                dim: basis_pred.dim(),
                scene: fold.clone(),
                obs_mm: to_mm(obs_sum),
                pred_mm: to_mm(pred_sum),
                count: n,
            });
        }

        // Learned basis at every requested rank: fit the full decomposition
        // once per fold, then slice.
        let k_max = *cfg.study_ks.iter().max().unwrap();
        let full = fit_pair(cfg, &train, fold, k_max)?;
        for &k in &cfg.study_ks {
            if k > full.obs.k() || k > full.pred.k() {
                continue;
            }
            let pair = BasisPair {
                obs: full.obs.truncate(k)?,
                pred: full.pred.truncate(k)?,
                provenance: full.provenance.clone(),
            };
            let (obs_mm, pred_mm) = crate::basis::approximation_error(&pair, &eval_set)?;
            rows.push(StudyRow {
                descriptor: format!("basis-k{k}"),
                dim: k,
                scene: fold.clone(),
                obs_mm,
                pred_mm,
                count: n,
            });
        }
    }

    let report = StudyReport::new(cfg.clone(), rows);
    write_json(&cfg.out_dir.join("recon_study.json"), &report)?;
    write_text(&cfg.out_dir.join("recon_study.csv"), &report.csv())?;
    let table = report.table(&cfg.scenes);
    write_text(&cfg.out_dir.join("recon_study.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn require_artifact(path: &Path, hint: &str) -> Result<()> {
    if !path.is_file() {
        return Err(Error::config(format!(
            "required file {} does not exist; {hint}",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_anchors(cfg: &RunConfig) -> Result<()> {
    let fold = cfg.require_held_out()?.to_string();
    let descriptor_path = cfg.descriptor_path(&fold);
    require_artifact(&descriptor_path, "run `trajspace fit` first")?;
    let pair = persist::load_basis_pair(&descriptor_path)?;
    if pair.pred.k() != cfg.k {
        info!("descriptor file holds k={} (config k={}), using the file", pair.pred.k(), cfg.k);
    }
    let scenes = load_all(cfg)?;
    let (train, _) = leave_one_out(&scenes, &split_for(cfg, &fold)?)?;
    let anchors = generate_anchors(&train, &pair.pred, cfg.s, cfg.seed, cfg.kmeans_max_iter)?;
    info!(
        "fold={fold} anchors={} k={} inertia={:.6} seed={}",
        anchors.s, anchors.k, anchors.inertia, anchors.seed
    );
    let provenance = format!("{}; s={}; seed={}", pair.provenance, cfg.s, cfg.seed);
    let path = cfg.anchors_path(&fold);
    persist::save_anchors(&path, &anchors, &provenance)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sorted_test(mut test: Vec<Tracklet>) -> Vec<Tracklet> {
    test.sort_by_key(|t| (t.recording, t.pedestrian, t.start_frame));
    test
}

fn cmd_predict(cfg: &RunConfig, offsets_path: Option<&Path>) -> Result<()> {
    let fold = cfg.require_held_out()?.to_string();
    let descriptor_path = cfg.descriptor_path(&fold);
    require_artifact(&descriptor_path, "run `trajspace fit` first")?;
    let anchors_path = cfg.anchors_path(&fold);
    require_artifact(&anchors_path, "run `trajspace anchors` first")?;
    let pair = persist::load_basis_pair(&descriptor_path)?;
    let anchors = persist::load_anchors(&anchors_path)?;
    let offsets = match offsets_path {
        Some(p) => {
            require_artifact(p, "provide a correction-offset file")?;
            persist::load_offsets(p)?
        }
        None => CorrectionOffsets::zeros(anchors.s, anchors.k),
    };
    let candidates = refine(&anchors, &offsets)?;

    let scenes = load_all(cfg)?;
    let (_, test) = leave_one_out(&scenes, &split_for(cfg, &fold)?)?;
    let test = sorted_test(test);
    if test.is_empty() {
        return Err(Error::data(format!("fold '{fold}' has no test tracklets")));
    }

    let mut items = Vec::with_capacity(test.len());
    for t in &test {
        let samples = anchor_predict(&t.obs, &anchors, &pair.pred, Some(&offsets))?;
        items.push(persist::PredictionItem {
            pedestrian: t.pedestrian,
            recording: t.recording,
            start_frame: t.start_frame,
            samples,
        });
    }

    let mut flat = Vec::with_capacity(anchors.s * anchors.k);
    for r in 0..anchors.s {
        for c in 0..anchors.k {
            flat.push(candidates[(r, c)]);
        }
    }
    let file = persist::PredictionFile {
        format_version: persist::FORMAT_VERSION,
        kind: "predictions".to_string(),
        scene: fold.clone(),
        k: anchors.k,
        s: anchors.s,
        seed: cfg.seed,
        candidates: flat,
        items,
    };
    let path = cfg.predictions_path(&fold);
    persist::save_predictions(&path, &file)?;
    println!("wrote {} ({} tracklets, {} samples each)", path.display(), file.items.len(), file.s);
    Ok(())
}

fn eval_options(cfg: &RunConfig) -> EvalOptions {
    EvalOptions {
        col_threshold: cfg.col_threshold,
        col_mode: if cfg.col_all_pairs {
            CollisionMode::AllPairs
        } else {
            CollisionMode::BestAde
        },
        alpha: 1.0,
        beta: 1.0,
    }
}

/// Ground-truth coefficients in the candidates' frame: the future normalized
/// by the observation-derived transform, projected through the prediction
/// basis.
fn gt_coefficients(
    pred_basis: &TrajectoryBasis,
    tracklet: &Tracklet,
) -> Result<crate::basis::Coefficients> {
    let params = NormalizationParams::from_observation(&tracklet.obs)?;
    let normalized: Vec<_> = tracklet.fut.iter().map(|p| params.normalize_point(*p)).collect();
    pred_basis.project(&flatten(&normalized, pred_basis.layout()))
}

fn cmd_eval(cfg: &RunConfig, predictions: Option<&Path>) -> Result<()> {
    let fold = cfg.require_held_out()?.to_string();
    let pred_path = predictions
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.predictions_path(&fold));
    require_artifact(&pred_path, "run `trajspace predict` first")?;
    let descriptor_path = cfg.descriptor_path(&fold);
    require_artifact(&descriptor_path, "run `trajspace fit` first")?;
    let file = persist::load_predictions(&pred_path)?;
    let pair = persist::load_basis_pair(&descriptor_path)?;
    if file.k != pair.pred.k() {
        return Err(Error::data(format!(
            "prediction file was made with k={} but the descriptor holds k={}",
            file.k,
            pair.pred.k()
        )));
    }

    let scenes = load_all(cfg)?;
    let (_, test) = leave_one_out(&scenes, &split_for(cfg, &fold)?)?;
    let mut by_key: BTreeMap<(u32, i64, i64), &Tracklet> = BTreeMap::new();
    for t in &test {
        by_key.insert((t.recording, t.pedestrian, t.start_frame), t);
    }

    let mut cases = Vec::with_capacity(file.items.len());
    for item in &file.items {
        let key = (item.recording, item.pedestrian, item.start_frame);
        let tracklet = by_key.get(&key).copied().ok_or_else(|| {
            Error::data(format!(
                "prediction for recording {} pedestrian {} frame {} has no matching tracklet",
                item.recording, item.pedestrian, item.start_frame
            ))
        })?;
        cases.push(EvalCase {
            tracklet: tracklet.clone(),
            prediction: PredictionSet::new(item.samples.clone()),
            gt_coeff: Some(gt_coefficients(&pair.pred, tracklet)?),
        });
    }
    if file.candidates.len() != file.s * file.k {
        return Err(Error::data("prediction file candidates have a bad shape".to_string()));
    }
    let candidates = DMatrix::from_row_slice(file.s, file.k, &file.candidates);

    let row = evaluate_to_row(
        &fold,
        "anchors",
        file.k,
        file.s,
        0.0,
        "all",
        &cases,
        Some(&candidates),
        &eval_options(cfg),
    )?;
    print_row(&row);
    let report = MetricsReport {
        format_version: REPORT_VERSION,
        config: cfg.clone(),
        rows: vec![row],
    };
    write_json(&cfg.out_dir.join(format!("eval_{fold}.json")), &report)?;
    write_text(&cfg.out_dir.join(format!("eval_{fold}.csv")), &metrics_csv(&report.rows))?;
    Ok(())
}

fn print_row(row: &MetricsRow) {
    let col = row
        .col
        .map(|c| format!("{c:.3}"))
        .unwrap_or_else(|| "n/a".to_string());
    println!(
        "scene={} subset={} sigma={} count={} ade={:.4} fde={:.4} tcc={:.4} col={}",
        row.scene, row.subset, row.sigma, row.count, row.ade, row.fde, row.tcc, col
    );
}

/// Per-tracklet child seed for the perturbation protocol (splitmix64 mix).
fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct FoldArtifacts {
    fold: String,
    pair: BasisPair,
    anchors: crate::anchors::AnchorSet,
    test: Vec<Tracklet>,
}

fn load_fold_artifacts(cfg: &RunConfig) -> Result<FoldArtifacts> {
    let fold = cfg.require_held_out()?.to_string();
    let descriptor_path = cfg.descriptor_path(&fold);
    require_artifact(&descriptor_path, "run `trajspace fit` first")?;
    let anchors_path = cfg.anchors_path(&fold);
    require_artifact(&anchors_path, "run `trajspace anchors` first")?;
    let pair = persist::load_basis_pair(&descriptor_path)?;
    let anchors = persist::load_anchors(&anchors_path)?;
    let scenes = load_all(cfg)?;
    let (_, test) = leave_one_out(&scenes, &split_for(cfg, &fold)?)?;
    let test = sorted_test(test);
    if test.is_empty() {
        return Err(Error::data(format!("fold '{fold}' has no test tracklets")));
    }
    Ok(FoldArtifacts { fold, pair, anchors, test })
}

fn predict_cases(
    artifacts: &FoldArtifacts,
    tracklets: &[Tracklet],
) -> Result<Vec<EvalCase>> {
    let mut cases = Vec::with_capacity(tracklets.len());
    for t in tracklets {
        let samples = anchor_predict(&t.obs, &artifacts.anchors, &artifacts.pair.pred, None)?;
        cases.push(EvalCase {
            tracklet: t.clone(),
            prediction: PredictionSet::new(samples),
            gt_coeff: Some(gt_coefficients(&artifacts.pair.pred, t)?),
        });
    }
    Ok(cases)
}

fn cmd_perturb_eval(cfg: &RunConfig) -> Result<()> {
    let artifacts = load_fold_artifacts(cfg)?;
    let candidates = artifacts.anchors.centroids.clone();
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        let perturbed: Vec<Tracklet> = artifacts
            .test
            .iter()
            .enumerate()
            .map(|(i, t)| perturb_observation(t, sigma, derive_seed(cfg.seed, si as u64, i as u64)))
            .collect::<Result<_>>()?;
        // The future segment is untouched by the perturbation, so these
        // tracklets carry both the noisy input and the clean ground truth.
        let cases = predict_cases(&artifacts, &perturbed)?;
        let row = evaluate_to_row(
            &artifacts.fold,
            "anchors",
            artifacts.anchors.k,
            artifacts.anchors.s,
            sigma,
            "all",
            &cases,
            Some(&candidates),
            &eval_options(cfg),
        )?;
        print_row(&row);
        rows.push(row);
    }
    let report = MetricsReport { format_version: REPORT_VERSION, config: cfg.clone(), rows };
    let fold = &artifacts.fold;
    write_json(&cfg.out_dir.join(format!("perturb_{fold}.json")), &report)?;
    write_text(
        &cfg.out_dir.join(format!("perturb_{fold}.csv")),
        &metrics_csv(&report.rows),
    )?;
    Ok(())
}

fn cmd_nonlinear_eval(cfg: &RunConfig) -> Result<()> {
    let artifacts = load_fold_artifacts(cfg)?;
    let candidates = artifacts.anchors.centroids.clone();
    let cases = predict_cases(&artifacts, &artifacts.test)?;
    let opts = eval_options(cfg);
    let mut rows = vec![evaluate_to_row(
        &artifacts.fold,
        "anchors",
        artifacts.anchors.k,
        artifacts.anchors.s,
        0.0,
        "all",
        &cases,
        Some(&candidates),
        &opts,
    )?];
    let subset = nonlinear_subset(&cases, cfg.nonlinear_tol)?;
    if subset.is_empty() {
        info!("no non-linear futures at tol={}", cfg.nonlinear_tol);
    } else {
        rows.push(evaluate_to_row(
            &artifacts.fold,
            "anchors",
            artifacts.anchors.k,
            artifacts.anchors.s,
            0.0,
            "nonlinear",
            &subset,
            Some(&candidates),
            &opts,
        )?);
    }
    for row in &rows {
        print_row(row);
    }
    let report = MetricsReport { format_version: REPORT_VERSION, config: cfg.clone(), rows };
    let fold = &artifacts.fold;
    write_json(&cfg.out_dir.join(format!("nonlinear_{fold}.json")), &report)?;
    write_text(
        &cfg.out_dir.join(format!("nonlinear_{fold}.csv")),
        &metrics_csv(&report.rows),
    )?;
    Ok(())
}

fn cmd_plot_basis(cfg: &RunConfig, descriptor: Option<&Path>, segment: SegmentArg) -> Result<()> {
    let path = match descriptor {
        Some(p) => p.to_path_buf(),
        None => cfg.descriptor_path(cfg.require_held_out()?),
    };
    // No existence pre-check: an unreadable descriptor surfaces as an I/O
    // error by contract.
    let pair = persist::load_basis_pair(&path)?;
    let plots_dir = cfg.out_dir.join("plots");
    std::fs::create_dir_all(&plots_dir)?;
    let mut selected: Vec<(&TrajectoryBasis, &str)> = Vec::new();
    match segment {
        SegmentArg::Obs => selected.push((&pair.obs, "obs")),
        SegmentArg::Pred => selected.push((&pair.pred, "pred")),
        SegmentArg::Both => {
            selected.push((&pair.obs, "obs"));
            selected.push((&pair.pred, "pred"));
        }
    }
    let mut count = 0;
    for (basis, tag) in selected {
        for i in 0..basis.k() {
            let svg = plot::basis_vector_svg(basis, i)?;
            let file = plots_dir.join(format!("basis_{tag}_u{}.svg", i + 1));
            write_text(&file, &svg)?;
            count += 1;
        }
    }
    println!("wrote {count} plots to {}", plots_dir.display());
    Ok(())
}
