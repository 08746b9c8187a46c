//! Run configuration: a single TOML file with full command-line overrides.
//! Every report embeds the resolved configuration.

use crate::dataset::{FieldOrder, WindowSpec};
use crate::error::{Error, Result};
use crate::geometry::Layout;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding one `<scene>.txt` file or one `<scene>/` directory
    /// of recordings per scene.
    pub data_root: PathBuf,
    pub scenes: Vec<String>,
    /// Scene evaluated under leave-one-out. Commands that work per fold
    /// require it; `fit` and `recon-eval` loop over all scenes when unset.
    pub held_out: Option<String>,
    pub t_obs: usize,
    pub t_fut: usize,
    pub stride: usize,
    /// Raw-frame gap between consecutive annotation samples.
    pub frame_interval: i64,
    /// Meters per raw coordinate unit.
    pub unit_scale: f64,
    pub field_order: FieldOrder,
    pub layout: Layout,
    /// Subtract the corpus mean before the basis fit.
    pub center: bool,
    /// Basis rank.
    pub k: usize,
    /// Prediction modes / anchor count.
    pub s: usize,
    pub seed: u64,
    pub kmeans_max_iter: usize,
    /// Collision distance threshold in meters.
    pub col_threshold: f64,
    /// Check all s x s sample pairings instead of the best-ADE pairing.
    pub col_all_pairs: bool,
    /// Noise levels (std dev, meters) for the perturbation protocol.
    pub sigmas: Vec<f64>,
    /// Order of the Bézier / B-spline comparison curves.
    pub curve_order: usize,
    /// Control-point count of the B-spline comparison curve.
    pub bspline_controls: usize,
    /// Basis ranks swept by the reconstruction study.
    pub study_ks: Vec<usize>,
    /// Evaluate the study on all scenes instead of the held-out fold.
    pub full_corpus: bool,
    /// Mean linear-fit error (meters) above which a future counts as
    /// non-linear.
    pub nonlinear_tol: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_root: PathBuf::from("data"),
            scenes: vec![
                "eth".to_string(),
                "hotel".to_string(),
                "univ".to_string(),
                "zara1".to_string(),
                "zara2".to_string(),
            ],
            held_out: None,
            t_obs: 8,
            t_fut: 12,
            stride: 1,
            frame_interval: 10,
            unit_scale: 1.0,
            field_order: FieldOrder::default(),
            layout: Layout::Interleaved,
            center: false,
            k: 6,
            s: 20,
            seed: 1,
            kmeans_max_iter: 300,
            col_threshold: 0.1,
            col_all_pairs: false,
            sigmas: vec![0.0, 0.02, 0.05, 0.10],
            curve_order: 5,
            bspline_controls: 6,
            study_ks: vec![4, 6, 8, 10, 12],
            full_corpus: false,
            nonlinear_tol: 0.02,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn window(&self) -> WindowSpec {
        WindowSpec {
            t_obs: self.t_obs,
            t_fut: self.t_fut,
            stride: self.stride,
            frame_interval: self.frame_interval,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window().validate()?;
        if self.scenes.is_empty() {
            return Err(Error::config("no scenes configured"));
        }
        if let Some(h) = &self.held_out {
            if !self.scenes.contains(h) {
                return Err(Error::config(format!(
                    "held-out scene '{h}' is not in the scene list"
                )));
            }
        }
        if !(self.unit_scale.is_finite() && self.unit_scale > 0.0) {
            return Err(Error::config("unit_scale must be positive"));
        }
        if self.k < 1 {
            return Err(Error::config("k must be at least 1"));
        }
        let l_max = 2 * self.t_obs.min(self.t_fut);
        if self.k > l_max {
            return Err(Error::config(format!(
                "k={} exceeds the smaller segment dimension (2*min(t_obs,t_fut) = {l_max})",
                self.k
            )));
        }
        if self.s < 1 {
            return Err(Error::config("s must be at least 1"));
        }
        if self.kmeans_max_iter < 1 {
            return Err(Error::config("kmeans_max_iter must be at least 1"));
        }
        if self.col_threshold < 0.0 {
            return Err(Error::config("col_threshold must be non-negative"));
        }
        if self.sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::config("noise sigmas must be non-negative"));
        }
        if self.curve_order < 1 {
            return Err(Error::config("curve_order must be at least 1"));
        }
        if self.bspline_controls < self.curve_order + 1 {
            return Err(Error::config(
                "bspline_controls must be at least curve_order + 1",
            ));
        }
        if self.study_ks.is_empty() || self.study_ks.iter().any(|&k| k < 1) {
            return Err(Error::config("study_ks must hold positive ranks"));
        }
        if !(self.nonlinear_tol.is_finite() && self.nonlinear_tol >= 0.0) {
            return Err(Error::config("nonlinear_tol must be non-negative"));
        }
        Ok(())
    }

    /// The fold this config asks for, or an error for commands that need one.
    pub fn require_held_out(&self) -> Result<&str> {
        self.held_out.as_deref().ok_or_else(|| {
            Error::config(
                "this command works per fold: set held_out in the config or pass --held-out"
                    .to_string(),
            )
        })
    }

    pub fn descriptor_path(&self, fold: &str) -> PathBuf {
        self.out_dir.join(format!("descriptor_{fold}.json"))
    }

    pub fn anchors_path(&self, fold: &str) -> PathBuf {
        self.out_dir.join(format!("anchors_{fold}.json"))
    }

    pub fn predictions_path(&self, fold: &str) -> PathBuf {
        self.out_dir.join(format!("predictions_{fold}.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip_keeps_fields() {
        let mut cfg = RunConfig::default();
        cfg.k = 8;
        cfg.held_out = Some("hotel".to_string());
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.k, 8);
        assert_eq!(back.held_out.as_deref(), Some("hotel"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<RunConfig>("definitely_not_a_key = 1").unwrap_err();
        assert!(err.to_string().contains("definitely_not_a_key"));
    }

    #[test]
    fn out_of_range_k_rejected() {
        let mut cfg = RunConfig::default();
        cfg.k = 17; // 2 * min(8, 12) = 16
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn held_out_must_be_a_known_scene() {
        let mut cfg = RunConfig::default();
        cfg.held_out = Some("nowhere".to_string());
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
