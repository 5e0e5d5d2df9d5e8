use serde::{Deserialize, Serialize};

use super::{GeometryError, Pixel, Point3};

/// Pinhole camera with axes aligned to the world frame; only the origin moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Camera origin in world coordinates.
    pub viewpoint: Point3,
    pub min_depth: f64,
    pub max_depth: f64,
}

/// RealSense D435i color stream as used in the field: 1280 x 720, 69 x 42 degree FOV.
pub const DEFAULT_WIDTH: u32 = 1280;
pub const DEFAULT_HEIGHT: u32 = 720;
pub const DEFAULT_HFOV_DEG: f64 = 69.0;
pub const DEFAULT_VFOV_DEG: f64 = 42.0;

/// Focal length in pixels for a given extent and full field of view.
pub fn focal_from_fov(extent_px: u32, fov_deg: f64) -> f64 {
    (extent_px as f64 / 2.0) / libm::tan(fov_deg.to_radians() / 2.0)
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel::from_fov(DEFAULT_WIDTH, DEFAULT_HEIGHT, DEFAULT_HFOV_DEG, DEFAULT_VFOV_DEG)
    }
}

impl CameraModel {
    /// Principal point at the image center, focal lengths from the field of view.
    pub fn from_fov(width: u32, height: u32, hfov_deg: f64, vfov_deg: f64) -> Self {
        CameraModel {
            width,
            height,
            fx: focal_from_fov(width, hfov_deg),
            fy: focal_from_fov(height, vfov_deg),
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            viewpoint: Point3::ORIGIN,
            min_depth: 0.105,
            max_depth: 10.0,
        }
    }

    pub fn with_viewpoint(mut self, viewpoint: Point3) -> Self {
        self.viewpoint = viewpoint;
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.min_depth, self.max_depth]
            .iter()
            .all(|v| v.is_finite())
            && self.viewpoint.is_finite();
        if !finite {
            return Err(GeometryError::InvalidCamera("non-finite parameter"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(GeometryError::InvalidCamera("focal lengths must be positive"));
        }
        if self.cx < 0.0 || self.cx >= self.width as f64 || self.cy < 0.0 || self.cy >= self.height as f64 {
            return Err(GeometryError::InvalidCamera("principal point outside the image"));
        }
        if self.min_depth >= self.max_depth {
            return Err(GeometryError::InvalidCamera("min_depth must be below max_depth"));
        }
        Ok(())
    }

    pub fn depth_is_valid(&self, depth: f64) -> bool {
        depth.is_finite() && depth > 0.0 && depth >= self.min_depth && depth <= self.max_depth
    }

    /// Pixel plus depth to a camera-frame point.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> Result<Point3, GeometryError> {
        if !self.depth_is_valid(depth) {
            return Err(GeometryError::InvalidDepth(depth));
        }
        Ok(Point3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ))
    }

    /// Camera-frame point to `(pixel, depth)`; `None` for points at or behind the camera.
    pub fn project(&self, p: &Point3) -> Option<(Pixel, f64)> {
        if !(p.z > 0.0) || !p.is_finite() {
            return None;
        }
        Some((
            Pixel::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy),
            p.z,
        ))
    }

    pub fn world_to_camera(&self, p: &Point3) -> Point3 {
        *p - self.viewpoint
    }

    pub fn camera_to_world(&self, p: &Point3) -> Point3 {
        *p + self.viewpoint
    }

    pub fn in_image(&self, px: &Pixel) -> bool {
        px.u >= 0.0 && px.v >= 0.0 && px.u <= (self.width - 1) as f64 && px.v <= (self.height - 1) as f64
    }

    /// Unit-depth ray through a pixel, camera frame.
    pub fn ray(&self, u: f64, v: f64) -> Point3 {
        Point3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_ray_maps_to_axis() {
        let cam = CameraModel::default();
        let p = cam.back_project(cam.cx, cam.cy, 1.0).unwrap();
        assert_eq!(p, Point3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn fov_derived_focal_length() {
        let cam = CameraModel::default();
        // 640 / tan(34.5 deg)
        assert!((cam.fx - 931.205_778_350).abs() < 1e-6, "fx = {}", cam.fx);
        let p = cam.back_project(1280.0, 360.0, 1.0).unwrap();
        assert!((p.x - 0.687_280_958_6).abs() < 1e-9);
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn invalid_depths() {
        let cam = CameraModel::default();
        for d in [0.0, -1.0, f64::NAN, f64::INFINITY, 0.05, 11.0] {
            assert!(matches!(cam.back_project(10.0, 10.0, d), Err(GeometryError::InvalidDepth(_))));
        }
    }

    #[test]
    fn project_rejects_points_behind() {
        let cam = CameraModel::default();
        assert!(cam.project(&Point3::new(0.0, 0.0, -0.5)).is_none());
        assert!(cam.project(&Point3::new(0.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn validate_catches_bad_intrinsics() {
        let mut cam = CameraModel::default();
        assert!(cam.validate().is_ok());
        cam.cx = 1280.0;
        assert!(cam.validate().is_err());
        let mut cam = CameraModel::default();
        cam.fy = 0.0;
        assert!(cam.validate().is_err());
    }
}
