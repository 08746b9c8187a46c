//! Versioned on-disk containers (JSON) for fitted bases, anchor sets,
//! correction offsets and prediction files. Loaders reject unknown format
//! versions.

use crate::anchors::{AnchorSet, CorrectionOffsets};
use crate::basis::{BasisPair, TrajectoryBasis};
use crate::dataset::Segment;
use crate::error::{Error, Result};
use crate::geometry::{Layout, Point2};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

fn check_version(found: u32, what: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::data(format!(
            "{what}: unsupported format version {found} (this build reads version {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::data(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::data(format!("{}: invalid container: {e}", path.display())))
}

/// Serialized form of one fitted basis.
#[derive(Debug, Serialize, Deserialize)]
struct BasisRecord {
    segment: Segment,
    /// Frames per trajectory; the basis has 2*T rows.
    t: usize,
    k: usize,
    layout: Layout,
    /// L x k matrix in row-major order.
    u: Vec<f64>,
    singular_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean: Option<Vec<f64>>,
}

impl BasisRecord {
    fn from_basis(basis: &TrajectoryBasis) -> Self {
        let l = basis.len();
        let k = basis.k();
        let mut u = Vec::with_capacity(l * k);
        for r in 0..l {
            for c in 0..k {
                u.push(basis.vectors()[(r, c)]);
            }
        }
        BasisRecord {
            segment: basis.segment(),
            t: basis.frames(),
            k,
            layout: basis.layout(),
            u,
            singular_values: basis.singular_values().iter().copied().collect(),
            mean: basis.mean().map(|m| m.iter().copied().collect()),
        }
    }

    fn into_basis(self) -> Result<TrajectoryBasis> {
        let l = 2 * self.t;
        if self.u.len() != l * self.k {
            return Err(Error::data(format!(
                "basis payload holds {} values, expected {}x{}",
                self.u.len(),
                l,
                self.k
            )));
        }
        let u = DMatrix::from_row_slice(l, self.k, &self.u);
        let sigma = DVector::from_vec(self.singular_values);
        let mean = self.mean.map(DVector::from_vec);
        TrajectoryBasis::from_parts(u, sigma, self.segment, self.layout, self.t, mean)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DescriptorFile {
    format_version: u32,
    kind: String,
    provenance: String,
    observation: BasisRecord,
    prediction: BasisRecord,
}

pub fn save_basis_pair(path: &Path, pair: &BasisPair) -> Result<()> {
    write_json(
        path,
        &DescriptorFile {
            format_version: FORMAT_VERSION,
            kind: "trajectory-basis-pair".to_string(),
            provenance: pair.provenance.clone(),
            observation: BasisRecord::from_basis(&pair.obs),
            prediction: BasisRecord::from_basis(&pair.pred),
        },
    )
}

pub fn load_basis_pair(path: &Path) -> Result<BasisPair> {
    let file: DescriptorFile = read_json(path)?;
    check_version(file.format_version, "descriptor file")?;
    let obs = file.observation.into_basis()?;
    let pred = file.prediction.into_basis()?;
    if obs.segment() != Segment::Observation || pred.segment() != Segment::Prediction {
        return Err(Error::data("descriptor file has mismatched segment tags".to_string()));
    }
    Ok(BasisPair { obs, pred, provenance: file.provenance })
}

#[derive(Debug, Serialize, Deserialize)]
struct AnchorFile {
    format_version: u32,
    kind: String,
    provenance: String,
    s: usize,
    k: usize,
    seed: u64,
    inertia: f64,
    /// s x k matrix in row-major order.
    centroids: Vec<f64>,
}

pub fn save_anchors(path: &Path, anchors: &AnchorSet, provenance: &str) -> Result<()> {
    let mut centroids = Vec::with_capacity(anchors.s * anchors.k);
    for r in 0..anchors.s {
        for c in 0..anchors.k {
            centroids.push(anchors.centroids[(r, c)]);
        }
    }
    write_json(
        path,
        &AnchorFile {
            format_version: FORMAT_VERSION,
            kind: "trajectory-anchors".to_string(),
            provenance: provenance.to_string(),
            s: anchors.s,
            k: anchors.k,
            seed: anchors.seed,
            inertia: anchors.inertia,
            centroids,
        },
    )
}

pub fn load_anchors(path: &Path) -> Result<AnchorSet> {
    let file: AnchorFile = read_json(path)?;
    check_version(file.format_version, "anchor file")?;
    if file.centroids.len() != file.s * file.k {
        return Err(Error::data(format!(
            "anchor payload holds {} values, expected {}x{}",
            file.centroids.len(),
            file.s,
            file.k
        )));
    }
    Ok(AnchorSet {
        centroids: DMatrix::from_row_slice(file.s, file.k, &file.centroids),
        s: file.s,
        k: file.k,
        inertia: file.inertia,
        seed: file.seed,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct OffsetsFile {
    format_version: u32,
    kind: String,
    s: usize,
    k: usize,
    /// s x k matrix in row-major order.
    f: Vec<f64>,
}

pub fn save_offsets(path: &Path, offsets: &CorrectionOffsets) -> Result<()> {
    let (s, k) = (offsets.f.nrows(), offsets.f.ncols());
    let mut f = Vec::with_capacity(s * k);
    for r in 0..s {
        for c in 0..k {
            f.push(offsets.f[(r, c)]);
        }
    }
    write_json(
        path,
        &OffsetsFile { format_version: FORMAT_VERSION, kind: "correction-offsets".to_string(), s, k, f },
    )
}

pub fn load_offsets(path: &Path) -> Result<CorrectionOffsets> {
    let file: OffsetsFile = read_json(path)?;
    check_version(file.format_version, "offsets file")?;
    if file.f.len() != file.s * file.k {
        return Err(Error::data("offsets payload size mismatch".to_string()));
    }
    Ok(CorrectionOffsets { f: DMatrix::from_row_slice(file.s, file.k, &file.f) })
}

/// Predictions for one tracklet, keyed by its identity in the source data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionItem {
    pub pedestrian: i64,
    pub recording: u32,
    pub start_frame: i64,
    /// s trajectories of T_fut points each, world frame.
    pub samples: Vec<Vec<Point2>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionFile {
    pub format_version: u32,
    pub kind: String,
    pub scene: String,
    pub k: usize,
    pub s: usize,
    pub seed: u64,
    /// Refined coefficient candidates (s x k, row-major) in the normalized
    /// frame; shared by every tracklet.
    pub candidates: Vec<f64>,
    pub items: Vec<PredictionItem>,
}

pub fn save_predictions(path: &Path, file: &PredictionFile) -> Result<()> {
    write_json(path, file)
}

pub fn load_predictions(path: &Path) -> Result<PredictionFile> {
    let file: PredictionFile = read_json(path)?;
    check_version(file.format_version, "prediction file")?;
    Ok(file)
}
