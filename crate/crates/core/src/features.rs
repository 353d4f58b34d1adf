//! Classifier features from a pair of head poses: the flattened rotation
//! difference with the translation difference appended, plus the cosine
//! distance of the head orientation vectors.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::dataset::Label;
use crate::error::Error;
use crate::pose::HeadPose;

/// Length of the pose-difference feature vector: a flattened 3x3 rotation
/// difference plus a 3-vector translation difference.
pub const FEATURE_LEN: usize = 12;

/// The two per-frame pose estimates: `inner` from the inner-region subset,
/// `all` from the whole-face subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PosePair {
    pub frame_id: String,
    pub inner: HeadPose,
    pub all: HeadPose,
}

impl PosePair {
    /// Exactly one of the two estimates is flipped.
    pub fn conflicting(&self) -> bool {
        self.inner.flipped != self.all.flipped
    }
}

/// The 12-value feature vector with optional supervision metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_LEN],
    pub label: Option<Label>,
    pub subjects: Vec<String>,
}

/// Row-major flatten of (R_all - R_inner) followed by (t_all - t_inner).
pub fn pose_pair_features(pair: &PosePair) -> Result<FeatureVector, Error> {
    let dr: Matrix3<f64> = pair.all.rotation - pair.inner.rotation;
    let dt: Vector3<f64> = pair.all.translation - pair.inner.translation;
    let mut values = [0.0; FEATURE_LEN];
    for r in 0..3 {
        for c in 0..3 {
            values[3 * r + c] = dr[(r, c)];
        }
    }
    values[9] = dt.x;
    values[10] = dt.y;
    values[11] = dt.z;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("pose pair contains non-finite entries".into()));
    }
    Ok(FeatureVector {
        values,
        label: None,
        subjects: Vec::new(),
    })
}

/// Cosine distance between the head orientation vectors R^T w, w = e_z.
///
/// For valid rotations both vectors are unit, so the result lies in [0, 2];
/// the dot product is clamped to keep floating error inside that range.
pub fn cosine_distance(r_all: &Matrix3<f64>, r_inner: &Matrix3<f64>) -> f64 {
    let w = Vector3::z();
    let a = r_all.transpose() * w;
    let c = r_inner.transpose() * w;
    let cos = (a.dot(&c) / (a.norm() * c.norm())).clamp(-1.0, 1.0);
    1.0 - cos
}
