//! Shared geometric primitives: vectors, pinhole camera, convex hull,
//! symmetric 3x3 eigen-decomposition and a static k-d tree.

mod camera;
mod eigen;
mod kdtree;
mod polygon;
mod vec;

pub use camera::{focal_from_fov, CameraModel, DEFAULT_HEIGHT, DEFAULT_HFOV_DEG, DEFAULT_VFOV_DEG, DEFAULT_WIDTH};
pub use eigen::{eigen_sym3, SymEigen, SymMat3};
pub use kdtree::KdTree;
pub use polygon::{convex_hull, cross, Pixel, Polygon2};
pub use vec::{point_segment_distance, rotate_about, Point3, UnitVec3};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid depth {0} m")]
    InvalidDepth(f64),
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
}
