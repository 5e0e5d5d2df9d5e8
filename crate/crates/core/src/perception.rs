//! Post-segmentation processing: hull simplification, back-projection and the
//! automatic depth filter.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_hull, CameraModel, GeometryError, Pixel, Point3, Polygon2};
use crate::scene::{ClusterId, ClusterObservation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionParams {
    /// Clusters whose mean depth exceeds this are rejected, meters.
    pub max_depth: f64,
    /// Interior sampling grid stride, pixels.
    pub sample_stride: u32,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        PerceptionParams { max_depth: 1.0, sample_stride: 4 }
    }
}

/// Back-projected cluster in the camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCloud {
    pub id: ClusterId,
    pub points: Vec<Point3>,
    pub hull2d: Polygon2,
    /// `hull2d` vertices lifted to 3D, same order.
    pub hull3d: Vec<Point3>,
}

impl ClusterCloud {
    pub fn centroid(&self) -> Point3 {
        let sum = self.points.iter().fold(Point3::ORIGIN, |acc, p| acc + *p);
        sum / self.points.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterStatus {
    Accepted,
    RejectedAutomatic,
    RejectedPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    BeyondDepthLimit,
    InvalidDepth,
    ObstacleClearance,
}

/// Outcome of a reachability check. `reason` is set exactly when rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub id: ClusterId,
    pub status: FilterStatus,
    pub reason: Option<RejectReason>,
}

impl FilterVerdict {
    pub fn accepted(id: ClusterId) -> Self {
        FilterVerdict { id, status: FilterStatus::Accepted, reason: None }
    }

    pub fn rejected_automatic(id: ClusterId, reason: RejectReason) -> Self {
        FilterVerdict { id, status: FilterStatus::RejectedAutomatic, reason: Some(reason) }
    }

    pub fn rejected_policy(id: ClusterId) -> Self {
        FilterVerdict { id, status: FilterStatus::RejectedPolicy, reason: Some(RejectReason::ObstacleClearance) }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == FilterStatus::Accepted
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerceptionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cluster {id}: only {valid} samples with valid depth")]
    TooFewValidDepths { id: ClusterId, valid: usize },
}

/// Convex hull of the mask outline.
pub fn simplify_boundary(obs: &ClusterObservation) -> Result<Polygon2, GeometryError> {
    convex_hull(obs.mask.vertices())
}

fn valid_vertex_depth(cam: &CameraModel, d: f64) -> Option<f64> {
    cam.depth_is_valid(d).then_some(d)
}

/// Back-projects mask vertices and an interior pixel grid with valid depth.
///
/// Hull vertices with missing depth are lifted at the mean depth of the valid samples.
pub fn to_cloud(obs: &ClusterObservation, cam: &CameraModel, params: &PerceptionParams) -> Result<ClusterCloud, PerceptionError> {
    let hull2d = simplify_boundary(obs)?;
    let mut points = Vec::new();

    for (px, d) in obs.mask.vertices().iter().zip(&obs.vertex_depth) {
        if let Some(d) = valid_vertex_depth(cam, *d) {
            points.push(cam.back_project(px.u, px.v, d)?);
        }
    }

    let stride = params.sample_stride.max(1) as i64;
    let (min_u, min_v, max_u, max_v) = obs.mask.bounds();
    let first = |lo: f64| {
        let c = libm::ceil(lo) as i64;
        c + (stride - c.rem_euclid(stride)) % stride
    };
    let mut v = first(min_v);
    while (v as f64) <= max_v {
        let mut u = first(min_u);
        while (u as f64) <= max_u {
            let px = Pixel::new(u as f64, v as f64);
            if obs.mask.contains(&px) {
                if let Some(d) = obs.depth_patch.get(u, v).and_then(|d| valid_vertex_depth(cam, d)) {
                    points.push(cam.back_project(px.u, px.v, d)?);
                }
            }
            u += stride;
        }
        v += stride;
    }

    if points.len() < 3 {
        return Err(PerceptionError::TooFewValidDepths { id: obs.id, valid: points.len() });
    }

    let mean_depth = points.iter().map(|p| p.z).sum::<f64>() / points.len() as f64;
    let hull3d = hull2d
        .vertices()
        .iter()
        .map(|hv| {
            let depth = obs
                .mask
                .vertices()
                .iter()
                .position(|mv| mv == hv)
                .and_then(|i| obs.vertex_depth.get(i).copied())
                .and_then(|d| valid_vertex_depth(cam, d))
                .unwrap_or(mean_depth);
            cam.back_project(hv.u, hv.v, depth)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ClusterCloud { id: obs.id, points, hull2d, hull3d })
}

/// Rejects clusters whose mean depth is strictly beyond `max_depth`.
pub fn depth_filter(cloud: &ClusterCloud, max_depth: f64) -> FilterVerdict {
    if cloud.centroid().z > max_depth {
        FilterVerdict::rejected_automatic(cloud.id, RejectReason::BeyondDepthLimit)
    } else {
        FilterVerdict::accepted(cloud.id)
    }
}
