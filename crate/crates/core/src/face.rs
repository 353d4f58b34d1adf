//! The 68-landmark reference face model and detected 2D landmark sets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Vector2, Vector3};

use crate::error::Error;

/// Number of landmarks in the standard annotation scheme.
pub const LANDMARK_COUNT: usize = 68;

/// A reference 3D face: 68 points in millimeters, face-centered, with the
/// gaze along +z, plus the landmark index subsets used for pose estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceModel3D {
    points: Vec<Vector3<f64>>,
    inner_indices: Vec<usize>,
    all_indices: Vec<usize>,
    name: String,
}

impl FaceModel3D {
    /// Validates the landmark count, subset relations, and centering.
    pub fn new(
        points: Vec<Vector3<f64>>,
        inner_indices: Vec<usize>,
        all_indices: Vec<usize>,
        name: String,
    ) -> Result<Self, Error> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::InvalidInput(format!(
                "face model must have {LANDMARK_COUNT} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
            return Err(Error::InvalidInput("face model contains non-finite point".into()));
        }
        for set in [&inner_indices, &all_indices] {
            if set.len() < 6 {
                return Err(Error::InvalidInput(format!(
                    "index subsets need at least 6 entries, got {}",
                    set.len()
                )));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= LANDMARK_COUNT) {
                return Err(Error::InvalidInput(format!("index out of range: {bad}")));
            }
            if has_duplicates(set) {
                return Err(Error::InvalidInput("index subset contains duplicates".into()));
            }
        }
        if !inner_indices.iter().all(|i| all_indices.contains(i)) {
            return Err(Error::InvalidInput(
                "inner indices must be a subset of the all-landmark indices".into(),
            ));
        }
        let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
        if centroid.norm() > 1.0 {
            return Err(Error::InvalidInput(format!(
                "face model centroid must lie within 1 mm of the origin, got |c| = {:.3}",
                centroid.norm()
            )));
        }
        Ok(Self {
            points,
            inner_indices,
            all_indices,
            name,
        })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn inner_indices(&self) -> &[usize] {
        &self.inner_indices
    }

    pub fn all_indices(&self) -> &[usize] {
        &self.all_indices
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Near-planarity statistic: mean |z| over the all-landmark subset,
    /// relative to the larger of the x and y extents.
    pub fn planarity_ratio(&self) -> f64 {
        let pts: Vec<&Vector3<f64>> = self.all_indices.iter().map(|&i| &self.points[i]).collect();
        let mean_abs_z = pts.iter().map(|p| p.z.abs()).sum::<f64>() / pts.len() as f64;
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
        let extent = (x_max - x_min).max(y_max - y_min);
        if extent == 0.0 {
            return 0.0;
        }
        mean_abs_z / extent
    }
}

fn has_duplicates(set: &[usize]) -> bool {
    let mut seen = [false; LANDMARK_COUNT];
    for &i in set {
        if seen[i] {
            return true;
        }
        seen[i] = true;
    }
    false
}

/// Landmarks detected in one image, in pixel coordinates. Points may fall
/// outside the frame; the dimensions identify the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet2D {
    points: Vec<Vector2<f64>>,
    pub image_width: u32,
    pub image_height: u32,
}

impl LandmarkSet2D {
    pub fn new(points: Vec<Vector2<f64>>, image_width: u32, image_height: u32) -> Result<Self, Error> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::InvalidInput(format!(
                "landmark set must have {LANDMARK_COUNT} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidInput("landmark set contains non-finite point".into()));
        }
        Ok(Self {
            points,
            image_width,
            image_height,
        })
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid_points() -> Vec<Vector3<f64>> {
        // 68 distinct points with zero centroid.
        let mut pts: Vec<Vector3<f64>> = (0..LANDMARK_COUNT)
            .map(|i| Vector3::new(i as f64, (i * i % 23) as f64, (i % 5) as f64))
            .collect();
        let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
        for p in &mut pts {
            *p -= centroid;
        }
        pts
    }

    #[test]
    fn model_accepts_valid_input() {
        let model = FaceModel3D::new(
            grid_points(),
            vec![0, 1, 2, 3, 4, 5],
            (0..10).collect(),
            "test".into(),
        )
        .unwrap();
        assert_eq!(model.points().len(), 68);
        assert!(model.planarity_ratio() >= 0.0);
    }

    #[test]
    fn model_rejects_wrong_count() {
        let err = FaceModel3D::new(
            grid_points()[..67].to_vec(),
            vec![0, 1, 2, 3, 4, 5],
            (0..10).collect(),
            "test".into(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn model_rejects_out_of_range_index() {
        let err = FaceModel3D::new(
            grid_points(),
            vec![0, 1, 2, 3, 4, 70],
            (0..10).collect(),
            "test".into(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(ref m) if m.contains("out of range")));
    }

    #[test]
    fn model_rejects_inner_not_subset() {
        let err = FaceModel3D::new(
            grid_points(),
            vec![60, 61, 62, 63, 64, 65],
            (0..10).collect(),
            "test".into(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(ref m) if m.contains("subset")));
    }

    #[test]
    fn model_rejects_off_center_cloud() {
        let pts: Vec<Vector3<f64>> = (0..LANDMARK_COUNT)
            .map(|i| Vector3::new(i as f64 + 100.0, 0.0, 0.0))
            .collect();
        let err = FaceModel3D::new(
            pts,
            vec![0, 1, 2, 3, 4, 5],
            (0..10).collect(),
            "test".into(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(ref m) if m.contains("centroid")));
    }

    #[test]
    fn landmarks_reject_non_finite() {
        let mut pts = vec![Vector2::new(0.0, 0.0); LANDMARK_COUNT];
        pts[3].x = f64::NAN;
        assert!(LandmarkSet2D::new(pts, 640, 480).is_err());
    }
}
