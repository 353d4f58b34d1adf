//! Head pose representation, forward projection, and the flipped-pose
//! construction that mirrors a pose through the model plane.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::camera::CameraIntrinsics;
use crate::error::Error;
use crate::face::{FaceModel3D, LandmarkSet2D};
use crate::rotation::{rotation_defect, rotation_z_pi};

/// A rigid head pose relative to the camera, with solver bookkeeping.
///
/// The camera looks along +z, so a physically plausible pose transforms
/// every landmark to positive depth; `flipped` records the sign of the
/// translation's z component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    /// Final reprojection cost in squared pixels (0 for constructed poses).
    pub cost: f64,
    pub flipped: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl HeadPose {
    /// Builds a pose from a rotation and translation, rejecting matrices
    /// that are not orthonormal with determinant +1 within 1e-10.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, Error> {
        if rotation_defect(&rotation) > 1e-10 {
            return Err(Error::InvalidInput(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(Self::from_parts_unchecked(rotation, translation))
    }

    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            flipped: translation.z < 0.0,
            rotation,
            translation,
            cost: 0.0,
            converged: false,
            iterations: 0,
        }
    }

    /// Transform a model point into the camera frame.
    pub fn transform(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

/// The planar-counterpart pose (R Rz(pi), -t).
///
/// Rz(pi) negates the in-plane model coordinates and -t completes the
/// camera-frame negation, so for an exactly planar model (all z = 0) the
/// flipped pose projects identically to the original.
pub fn flip_pose(pose: &HeadPose) -> HeadPose {
    let mut out = *pose;
    out.rotation = pose.rotation * rotation_z_pi();
    out.translation = -pose.translation;
    out.flipped = out.translation.z < 0.0;
    out
}

/// A pose is flipped when the translation's z component is negative.
pub fn detect_flip(pose: &HeadPose) -> bool {
    pose.translation.z < 0.0
}

/// Depth diagnostics over a landmark subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthDiagnostics {
    pub flipped: bool,
    /// Landmarks whose transformed depth is negative.
    pub negative_depths: usize,
    pub total: usize,
}

/// Flip detection with the count of negative transformed depths, useful
/// when the translation sign and the per-landmark signs disagree.
pub fn depth_diagnostics(pose: &HeadPose, model: &FaceModel3D, indices: &[usize]) -> DepthDiagnostics {
    let negative_depths = indices
        .iter()
        .filter(|&&i| pose.transform(&model.points()[i]).z < 0.0)
        .count();
    DepthDiagnostics {
        flipped: detect_flip(pose),
        negative_depths,
        total: indices.len(),
    }
}

/// Project the selected model landmarks through a pose and camera.
pub fn project(
    model: &FaceModel3D,
    indices: &[usize],
    pose: &HeadPose,
    cam: &CameraIntrinsics,
) -> Result<Vec<Vector2<f64>>, Error> {
    indices
        .iter()
        .map(|&i| {
            let p = pose.transform(&model.points()[i]);
            cam.project_point(&p)
                .ok_or(Error::ProjectionSingularity { index: i })
        })
        .collect()
}

/// Sum of squared pixel distances between projected and observed landmarks
/// over the index subset.
pub fn reprojection_cost(
    model: &FaceModel3D,
    indices: &[usize],
    pose: &HeadPose,
    cam: &CameraIntrinsics,
    observed: &LandmarkSet2D,
) -> Result<f64, Error> {
    if indices.is_empty() {
        return Err(Error::InvalidInput("empty index subset".into()));
    }
    let projected = project(model, indices, pose, cam)?;
    Ok(indices
        .iter()
        .zip(projected.iter())
        .map(|(&i, proj)| (proj - observed.points()[i]).norm_squared())
        .sum())
}
