//! Cluster position and orientation from a single-view point cloud.
//!
//! Every seed point gets a normal from the PCA of its radius-limited neighborhood
//! (smallest-eigenvalue eigenvector, oriented toward the viewpoint). The cluster
//! normal is the renormalized mean of those sub-normals; the position is the cloud
//! centroid.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{eigen_sym3, KdTree, Point3, SymMat3, UnitVec3};
use crate::scene::ClusterId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoseParams {
    /// Neighborhood radius, meters.
    pub radius: f64,
    /// Maximum neighbors per neighborhood.
    pub neighbor_cap: usize,
    /// Use every `seed_stride`-th point as a neighborhood seed.
    pub seed_stride: usize,
}

impl Default for PoseParams {
    fn default() -> Self {
        PoseParams { radius: 0.1, neighbor_cap: 30, seed_stride: 1 }
    }
}

impl PoseParams {
    pub fn validate(&self) -> Result<(), PoseError> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(PoseError::InvalidParams("radius must be positive"));
        }
        if self.neighbor_cap < 3 {
            return Err(PoseError::InvalidParams("neighbor_cap must be at least 3"));
        }
        if self.seed_stride == 0 {
            return Err(PoseError::InvalidParams("seed_stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterPose {
    pub id: ClusterId,
    pub position: Point3,
    pub normal: UnitVec3,
    /// Number of sub-neighborhood normals averaged.
    pub sub_normal_count: usize,
    /// True when every neighborhood was too small and whole-cloud PCA was used.
    pub fallback: bool,
}

impl ClusterPose {
    pub fn translated(mut self, by: Point3) -> Self {
        self.position = self.position + by;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PoseError {
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("need at least 3 neighbors, got {0}")]
    TooFewNeighbors(usize),
    #[error("averaged normal vanished")]
    DegenerateNormals,
    #[error("pose params: {0}")]
    InvalidParams(&'static str),
}

pub fn centroid(points: &[Point3]) -> Result<Point3, PoseError> {
    if points.is_empty() {
        return Err(PoseError::EmptyCloud);
    }
    let sum = points.iter().fold(Point3::ORIGIN, |acc, p| acc + *p);
    Ok(sum / points.len() as f64)
}

/// Biased (1/k) scatter about the neighborhood mean; any non-empty set.
pub fn scatter(points: &[Point3]) -> Result<SymMat3, PoseError> {
    let mean = centroid(points)?;
    let sum = points
        .iter()
        .fold(SymMat3::ZERO, |acc, p| acc.add(&SymMat3::outer(&(*p - mean))));
    Ok(sum.scale(1.0 / points.len() as f64))
}

/// Neighborhood covariance; requires at least three points.
pub fn covariance(points: &[Point3]) -> Result<SymMat3, PoseError> {
    if points.len() < 3 {
        return Err(PoseError::TooFewNeighbors(points.len()));
    }
    scatter(points)
}

fn smallest_eigenvector(c: &SymMat3) -> Point3 {
    eigen_sym3(c).vectors[0]
}

/// Flip `n` so it faces `toward`; on an exact tie, use `fallback_dir` instead.
fn orient(n: Point3, toward: &Point3, fallback_dir: &Point3) -> Point3 {
    let s = n.dot(toward);
    if s > 0.0 {
        n
    } else if s < 0.0 {
        -n
    } else if n.dot(fallback_dir) < 0.0 {
        -n
    } else {
        n
    }
}

/// Surface normal at seed `index`, or `None` when its neighborhood has fewer than three points.
pub fn sub_normal(
    tree: &KdTree,
    index: usize,
    params: &PoseParams,
    viewpoint: &Point3,
    cluster_center: &Point3,
) -> Option<UnitVec3> {
    let points = tree.points();
    let seed = points[index];
    let neighbors: Vec<Point3> = tree
        .radius_search(&seed, params.radius, params.neighbor_cap)
        .into_iter()
        .map(|i| points[i])
        .collect();
    let c = covariance(&neighbors).ok()?;
    let n = orient(smallest_eigenvector(&c), &(*viewpoint - seed), &(*viewpoint - *cluster_center));
    UnitVec3::new_normalize(n)
}

pub fn estimate_pose(id: ClusterId, points: &[Point3], viewpoint: &Point3, params: &PoseParams) -> Result<ClusterPose, PoseError> {
    params.validate()?;
    let position = centroid(points)?;
    if points.len() < 3 {
        return Err(PoseError::TooFewNeighbors(points.len()));
    }
    let tree = KdTree::build(points);
    let mut sum = Point3::ORIGIN;
    let mut count = 0usize;
    for i in (0..points.len()).step_by(params.seed_stride) {
        if let Some(n) = sub_normal(&tree, i, params, viewpoint, &position) {
            sum += n.as_vec();
            count += 1;
        }
    }

    let to_view = *viewpoint - position;
    let (raw, fallback) = if count == 0 {
        let whole = smallest_eigenvector(&covariance(points)?);
        (orient(whole, &to_view, &to_view), true)
    } else {
        (sum / count as f64, false)
    };
    if raw.norm() < 1e-9 {
        return Err(PoseError::DegenerateNormals);
    }
    // the mean of individually oriented normals can still lean away from the view
    let n = orient(raw, &to_view, &to_view);
    let normal = UnitVec3::new_normalize(n).ok_or(PoseError::DegenerateNormals)?;
    Ok(ClusterPose { id, position, normal, sub_normal_count: count, fallback })
}
