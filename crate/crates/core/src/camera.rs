//! Pinhole camera model and the single-image intrinsics approximation.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::Error;

/// Pinhole camera parameters in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, Error> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// The 3x3 camera matrix [[fx,0,cx],[0,fy,cy],[0,0,1]].
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Project a camera-frame point to pixel coordinates.
    ///
    /// Fails when the point lies on the principal plane (zero depth).
    pub fn project_point(&self, p: &Vector3<f64>) -> Option<Vector2<f64>> {
        if p.z == 0.0 {
            return None;
        }
        Some(Vector2::new(
            p.x / p.z * self.fx + self.cx,
            p.y / p.z * self.fy + self.cy,
        ))
    }
}

/// Single-image intrinsics approximation: principal point at the image
/// center, focal length equal to the image width.
pub fn approximate_intrinsics(
    image_width: u32,
    image_height: u32,
) -> Result<CameraIntrinsics, Error> {
    if image_width == 0 || image_height == 0 {
        return Err(Error::InvalidInput(alloc::format!(
            "image dimensions must be positive, got {image_width}x{image_height}"
        )));
    }
    let w = f64::from(image_width);
    let h = f64::from(image_height);
    CameraIntrinsics::new(w, w, w / 2.0, h / 2.0)
}
