//! On-disk formats: the face model and its subset sidecar, landmark files,
//! dataset manifests, pose records, feature tables, serialized classifiers,
//! and report tables. All numeric fields are written with Rust's shortest
//! round-trip float formatting, so identical data always produces identical
//! bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use headpose_core::dataset::{DatasetManifest, Label, ManifestRecord};
use headpose_core::face::{FaceModel3D, LandmarkSet2D, LANDMARK_COUNT};
use headpose_core::features::{FeatureVector, FEATURE_LEN};
use headpose_core::pose::HeadPose;
use headpose_core::svm::{PlattParams, SvmModel, TrainingMeta};

use crate::error::{CliError, Result};

/// Version tag written into serialized classifier documents.
pub const SVM_FORMAT_VERSION: u32 = 1;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

// ---------------------------------------------------------------------------
// Face model: 68 CSV rows "index,U,V,W" plus a TOML sidecar with the
// landmark subsets. The sidecar sits next to the model with a .toml
// extension.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ModelSidecar {
    name: String,
    inner_indices: Vec<usize>,
    all_indices: Vec<usize>,
}

pub fn sidecar_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("toml")
}

pub fn save_model(model: &FaceModel3D, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (i, p) in model.points().iter().enumerate() {
        out.push_str(&format!("{i},{},{},{}\n", p.x, p.y, p.z));
    }
    write_atomic(path, &out)?;

    let sidecar = ModelSidecar {
        name: model.name().to_string(),
        inner_indices: model.inner_indices().to_vec(),
        all_indices: model.all_indices().to_vec(),
    };
    let text = toml::to_string(&sidecar)
        .map_err(|e| CliError::InvalidData(format!("sidecar serialization: {e}")))?;
    write_atomic(&sidecar_path(path), &text)
}

pub fn load_model(path: &Path) -> Result<FaceModel3D> {
    let text = read_to_string(path)?;
    let mut points = Vec::with_capacity(LANDMARK_COUNT);
    let mut rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected 4 comma-separated fields, got {}", fields.len()),
            ));
        }
        let index: usize = fields[0].trim().parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric index: {:?}", fields[0]))
        })?;
        if index != rows - 1 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected index {}, got {index}", rows - 1),
            ));
        }
        let mut coords = [0.0f64; 3];
        for (slot, field) in coords.iter_mut().zip(&fields[1..]) {
            *slot = field.trim().parse().map_err(|_| {
                CliError::parse(path, lineno + 1, format!("non-numeric field: {field:?}"))
            })?;
        }
        points.push(Vector3::new(coords[0], coords[1], coords[2]));
    }
    if rows != LANDMARK_COUNT {
        return Err(CliError::parse(
            path,
            rows + 1,
            format!("expected {LANDMARK_COUNT} rows, got {rows}"),
        ));
    }

    let sidecar_file = sidecar_path(path);
    let sidecar_text = read_to_string(&sidecar_file)?;
    let sidecar: ModelSidecar = toml::from_str(&sidecar_text)
        .map_err(|e| CliError::parse(&sidecar_file, 0, e.to_string()))?;

    FaceModel3D::new(points, sidecar.inner_indices, sidecar.all_indices, sidecar.name)
        .map_err(|e| CliError::parse(path, 0, e.to_string()))
}

// ---------------------------------------------------------------------------
// Landmark files: header "index,x,y" then 68 rows.
// ---------------------------------------------------------------------------

pub fn save_landmarks(set: &LandmarkSet2D, path: &Path) -> Result<()> {
    let mut out = String::from("index,x,y\n");
    for (i, p) in set.points().iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", p.x, p.y));
    }
    write_atomic(path, &out)
}

pub fn load_landmarks(path: &Path, image_width: u32, image_height: u32) -> Result<LandmarkSet2D> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "index,x,y" => {}
        Some((_, header)) => {
            return Err(CliError::parse(
                path,
                1,
                format!("expected header \"index,x,y\", got {header:?}"),
            ))
        }
        None => return Err(CliError::parse(path, 1, "empty landmark file")),
    }
    let mut points = Vec::with_capacity(LANDMARK_COUNT);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected 3 comma-separated fields, got {}", fields.len()),
            ));
        }
        let index: usize = fields[0].trim().parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric index: {:?}", fields[0]))
        })?;
        if index != points.len() {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected index {}, got {index}", points.len()),
            ));
        }
        let x: f64 = fields[1].trim().parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[1]))
        })?;
        let y: f64 = fields[2].trim().parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[2]))
        })?;
        points.push(Vector2::new(x, y));
    }
    if points.len() != LANDMARK_COUNT {
        return Err(CliError::parse(
            path,
            points.len() + 2,
            format!("expected {LANDMARK_COUNT} rows, got {}", points.len()),
        ));
    }
    LandmarkSet2D::new(points, image_width, image_height)
        .map_err(|e| CliError::parse(path, 0, e.to_string()))
}

// ---------------------------------------------------------------------------
// Dataset manifest: one JSON record per line. Landmark paths are relative
// to the manifest's directory.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLine {
    frame_id: String,
    label: String,
    subjects: Vec<String>,
    landmarks: String,
    width: u32,
    height: u32,
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let mut out = String::new();
    for rec in manifest.records() {
        let line = ManifestLine {
            frame_id: rec.frame_id.clone(),
            label: rec.label.as_str().to_string(),
            subjects: rec.subjects.clone(),
            landmarks: rec.landmark_path.clone(),
            width: rec.image_width,
            height: rec.image_height,
        };
        out.push_str(
            &serde_json::to_string(&line)
                .map_err(|e| CliError::InvalidData(format!("manifest serialization: {e}")))?,
        );
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = read_to_string(path)?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(line)
            .map_err(|e| CliError::parse(path, lineno + 1, e.to_string()))?;
        let label = Label::parse(&parsed.label)
            .map_err(|e| CliError::parse(path, lineno + 1, e.to_string()))?;
        records.push(ManifestRecord {
            frame_id: parsed.frame_id,
            label,
            subjects: parsed.subjects,
            landmark_path: parsed.landmarks,
            image_width: parsed.width,
            image_height: parsed.height,
        });
    }
    DatasetManifest::new(records).map_err(|e| CliError::parse(path, 0, e.to_string()))
}

/// Resolve a manifest-relative landmark path.
pub fn resolve_landmark_path(manifest_path: &Path, record: &ManifestRecord) -> PathBuf {
    let relative = Path::new(&record.landmark_path);
    if relative.is_absolute() {
        relative.to_path_buf()
    } else {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new(""))
            .join(relative)
    }
}

// ---------------------------------------------------------------------------
// Pose records: one CSV row per (frame, index set).
// ---------------------------------------------------------------------------

/// Which landmark subset produced a pose row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseSet {
    Inner,
    All,
}

impl PoseSet {
    pub fn as_str(self) -> &'static str {
        match self {
            PoseSet::Inner => "inner",
            PoseSet::All => "all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoseRecord {
    pub frame_id: String,
    pub set: PoseSet,
    pub pose: HeadPose,
}

pub const POSE_HEADER: &str =
    "frame_id,set,r00,r01,r02,r10,r11,r12,r20,r21,r22,t0,t1,t2,cost,flipped,converged,iterations";

pub fn save_pose_records(records: &[PoseRecord], path: &Path) -> Result<()> {
    let mut out = String::from(POSE_HEADER);
    out.push('\n');
    for rec in records {
        let r = &rec.pose.rotation;
        let t = &rec.pose.translation;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            rec.frame_id,
            rec.set.as_str(),
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.x,
            t.y,
            t.z,
            rec.pose.cost,
            rec.pose.flipped,
            rec.pose.converged,
            rec.pose.iterations,
        ));
    }
    write_atomic(path, &out)
}

pub fn load_pose_records(path: &Path) -> Result<Vec<PoseRecord>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == POSE_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::parse(path, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(CliError::parse(path, 1, "empty pose file")),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 18 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected 18 fields, got {}", fields.len()),
            ));
        }
        let set = match fields[1] {
            "inner" => PoseSet::Inner,
            "all" => PoseSet::All,
            other => {
                return Err(CliError::parse(path, lineno + 1, format!("unknown set {other:?}")))
            }
        };
        let num = |field: &str| -> Result<f64> {
            field.parse().map_err(|_| {
                CliError::parse(path, lineno + 1, format!("non-numeric field: {field:?}"))
            })
        };
        let mut values = [0.0f64; 13];
        for (slot, field) in values.iter_mut().zip(&fields[2..15]) {
            *slot = num(field)?;
        }
        let rotation = nalgebra::Matrix3::new(
            values[0], values[1], values[2], values[3], values[4], values[5], values[6],
            values[7], values[8],
        );
        let translation = Vector3::new(values[9], values[10], values[11]);
        let mut pose = HeadPose::new(rotation, translation)
            .map_err(|e| CliError::parse(path, lineno + 1, e.to_string()))?;
        pose.cost = values[12];
        pose.converged = fields[16].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-boolean field: {:?}", fields[16]))
        })?;
        pose.iterations = fields[17].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[17]))
        })?;
        let flipped: bool = fields[15].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-boolean field: {:?}", fields[15]))
        })?;
        if flipped != pose.flipped {
            return Err(CliError::parse(
                path,
                lineno + 1,
                "flipped flag disagrees with translation sign",
            ));
        }
        records.push(PoseRecord {
            frame_id: fields[0].to_string(),
            set,
            pose,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Feature table: one CSV row per frame.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub frame_id: String,
    pub features: FeatureVector,
    pub cosine_distance: f64,
    pub inner_flipped: bool,
    pub all_flipped: bool,
}

pub const FEATURE_HEADER: &str = "frame_id,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,\
cosine_distance,inner_flipped,all_flipped,label,subjects";

pub fn save_features(rows: &[FeatureRow], path: &Path) -> Result<()> {
    let mut out = String::from(FEATURE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.frame_id);
        for v in row.features.values.iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(
            ",{},{},{}",
            row.cosine_distance, row.inner_flipped, row.all_flipped
        ));
        out.push(',');
        if let Some(label) = row.features.label {
            out.push_str(label.as_str());
        }
        out.push(',');
        out.push_str(&row.features.subjects.join(";"));
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn load_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == FEATURE_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::parse(path, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(CliError::parse(path, 1, "empty feature file")),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 17 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected 17 fields, got {}", fields.len()),
            ));
        }
        let mut values = [0.0f64; FEATURE_LEN];
        for (slot, field) in values.iter_mut().zip(&fields[1..13]) {
            *slot = field.parse().map_err(|_| {
                CliError::parse(path, lineno + 1, format!("non-numeric field: {field:?}"))
            })?;
        }
        let cosine_distance: f64 = fields[13].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[13]))
        })?;
        let parse_bool = |field: &str| -> Result<bool> {
            field.parse().map_err(|_| {
                CliError::parse(path, lineno + 1, format!("non-boolean field: {field:?}"))
            })
        };
        let label = if fields[15].is_empty() {
            None
        } else {
            Some(
                Label::parse(fields[15])
                    .map_err(|e| CliError::parse(path, lineno + 1, e.to_string()))?,
            )
        };
        let subjects: Vec<String> = if fields[16].is_empty() {
            Vec::new()
        } else {
            fields[16].split(';').map(str::to_string).collect()
        };
        rows.push(FeatureRow {
            frame_id: fields[0].to_string(),
            features: FeatureVector {
                values,
                label,
                subjects,
            },
            cosine_distance,
            inner_flipped: parse_bool(fields[14])?,
            all_flipped: parse_bool(fields[15 - 1])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Classifier document: JSON with a version tag; floats round-trip exactly.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SvmDocument {
    format_version: u32,
    gamma: f64,
    bias: f64,
    support_vectors: Vec<Vec<f64>>,
    dual_coefficients: Vec<f64>,
    platt: Option<(f64, f64)>,
    c: f64,
    seed: u64,
    feature_count: usize,
    training_samples: usize,
}

pub fn save_svm(model: &SvmModel, path: &Path) -> Result<()> {
    let doc = SvmDocument {
        format_version: SVM_FORMAT_VERSION,
        gamma: model.gamma,
        bias: model.bias,
        support_vectors: model.support_vectors.clone(),
        dual_coefficients: model.dual_coefficients.clone(),
        platt: model.platt.map(|p| (p.a, p.b)),
        c: model.meta.c,
        seed: model.meta.seed,
        feature_count: model.meta.feature_count,
        training_samples: model.meta.training_samples,
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::InvalidData(format!("model serialization: {e}")))?;
    text.push('\n');
    write_atomic(path, &text)
}

pub fn load_svm(path: &Path) -> Result<SvmModel> {
    let text = read_to_string(path)?;
    let doc: SvmDocument =
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, 0, e.to_string()))?;
    if doc.format_version != SVM_FORMAT_VERSION {
        return Err(CliError::parse(
            path,
            0,
            format!("unsupported model format version {}", doc.format_version),
        ));
    }
    if doc.support_vectors.len() != doc.dual_coefficients.len() {
        return Err(CliError::parse(
            path,
            0,
            "support vector and coefficient counts disagree",
        ));
    }
    Ok(SvmModel {
        support_vectors: doc.support_vectors,
        dual_coefficients: doc.dual_coefficients,
        bias: doc.bias,
        gamma: doc.gamma,
        platt: doc.platt.map(|(a, b)| PlattParams { a, b }),
        meta: TrainingMeta {
            c: doc.c,
            seed: doc.seed,
            feature_count: doc.feature_count,
            training_samples: doc.training_samples,
        },
    })
}

// ---------------------------------------------------------------------------
// Score table.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub frame_id: String,
    pub probability: f64,
    pub decision_value: f64,
    pub label: Option<Label>,
}

pub const SCORE_HEADER: &str = "frame_id,probability,decision_value,label";

pub fn save_scores(rows: &[ScoreRow], path: &Path) -> Result<()> {
    let mut out = String::from(SCORE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.frame_id,
            row.probability,
            row.decision_value,
            row.label.map(|l| l.as_str()).unwrap_or(""),
        ));
    }
    write_atomic(path, &out)
}

pub fn load_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SCORE_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::parse(path, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(CliError::parse(path, 1, "empty score file")),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::parse(
                path,
                lineno + 1,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let probability: f64 = fields[1].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[1]))
        })?;
        let decision_value: f64 = fields[2].parse().map_err(|_| {
            CliError::parse(path, lineno + 1, format!("non-numeric field: {:?}", fields[2]))
        })?;
        let label = if fields[3].is_empty() {
            None
        } else {
            Some(
                Label::parse(fields[3])
                    .map_err(|e| CliError::parse(path, lineno + 1, e.to_string()))?,
            )
        };
        rows.push(ScoreRow {
            frame_id: fields[0].to_string(),
            probability,
            decision_value,
            label,
        });
    }
    Ok(rows)
}
