//! Synthetic orchard scenes and their rendered cluster observations.
//!
//! The world frame shares its axes with the camera (`+z` forward, `+y` down); the
//! eye-in-hand camera only translates between imaging stops. The canopy is a plane
//! leaning toward the camera at `canopy_tilt_deg` from horizontal, with trellis
//! wires running along `x`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{rotate_about, CameraModel, Pixel, Point3, Polygon2, UnitVec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flower {
    pub id: u32,
    pub cluster_id: ClusterId,
    pub position: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub centroid: Point3,
    pub true_normal: UnitVec3,
    pub radius: f64,
    pub flowers: Vec<Flower>,
    /// Index of the imaging stop this cluster is thinned from.
    pub stop: usize,
    /// Adjacent-row cluster seen through the canopy; never a valid target.
    pub background: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstacleKind {
    Trunk,
    TrellisWire,
    Post,
}

/// Capsule-shaped obstacle: a segment with a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub kind: ObstacleKind,
    pub start: Point3,
    pub end: Point3,
    pub radius: f64,
}

impl Obstacle {
    /// Distance from `p` to the obstacle surface (negative inside).
    pub fn surface_distance(&self, p: &Point3) -> f64 {
        crate::geometry::point_segment_distance(p, &self.start, &self.end) - self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanopyPlane {
    pub point: Point3,
    pub normal: UnitVec3,
    pub tilt_deg: f64,
}

impl CanopyPlane {
    /// Horizontal in-plane axis (along the row).
    pub fn along_row(&self) -> UnitVec3 {
        UnitVec3::X
    }

    /// In-plane axis pointing up the canopy.
    pub fn up(&self) -> UnitVec3 {
        UnitVec3::new_normalize(self.normal.as_vec().cross(&UnitVec3::X.as_vec()))
            .expect("canopy normal is never along x")
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&(*p - self.point))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub clusters: Vec<Cluster>,
    pub obstacles: Vec<Obstacle>,
    pub canopy_plane: CanopyPlane,
    /// Camera origins, one per target trellis wire.
    pub stops: Vec<Point3>,
    pub rng_seed: u64,
}

impl Scene {
    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    /// Foreground clusters spread over the target wires.
    pub cluster_count: u32,
    /// Inclusive `[min, max]` flowers per cluster.
    pub flowers_per_cluster: [u32; 2],
    /// Inclusive `[min, max]` cluster radius, meters.
    pub cluster_radius: [f64; 2],
    /// Maximum deviation of a cluster's normal from the canopy normal, degrees.
    pub normal_jitter_deg: f64,
    pub canopy_tilt_deg: f64,
    /// Camera-to-canopy distance along the optical axis at each stop, meters.
    pub canopy_standoff: f64,
    pub wire_count: u32,
    pub wire_spacing: f64,
    pub wire_radius: f64,
    /// Wires (1 = bottom) whose branches are thinned; one imaging stop each.
    pub target_wires: Vec<u32>,
    /// Inclusive `[min, max]` in-plane distance of a cluster above or below its wire, meters.
    pub wire_offset: [f64; 2],
    /// Clusters span `x` in `[-row_half_width, row_half_width]`.
    pub row_half_width: f64,
    pub trunk_offsets: Vec<f64>,
    pub trunk_radius: f64,
    pub post_offsets: Vec<f64>,
    pub post_radius: f64,
    pub background_cluster_count: u32,
    /// Depth of adjacent-row clusters from the camera, meters.
    pub background_depth: f64,
    pub mask_vertices: u32,
    /// Relative radial jitter of mask vertices, in `[0, 1)`.
    pub mask_jitter: f64,
    /// Per-pixel probability of a missing depth reading.
    pub invalid_depth_fraction: f64,
    /// Per-cluster probability that the whole depth patch is missing.
    pub depth_dropout_prob: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            cluster_count: 24,
            flowers_per_cluster: [4, 6],
            cluster_radius: [0.052, 0.082],
            normal_jitter_deg: 15.0,
            canopy_tilt_deg: 75.0,
            canopy_standoff: 0.7,
            wire_count: 7,
            wire_spacing: 0.46,
            wire_radius: 0.002,
            target_wires: alloc::vec![2, 3, 4],
            wire_offset: [0.1, 0.2],
            row_half_width: 0.3,
            trunk_offsets: alloc::vec![0.42],
            trunk_radius: 0.04,
            post_offsets: Vec::new(),
            post_radius: 0.05,
            background_cluster_count: 1,
            background_depth: 1.3,
            mask_vertices: 48,
            mask_jitter: 0.15,
            invalid_depth_fraction: 0.02,
            depth_dropout_prob: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("scene config: {0}")]
    Config(&'static str),
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let [fmin, fmax] = self.flowers_per_cluster;
        let [rmin, rmax] = self.cluster_radius;
        let checks: [(bool, &'static str); 13] = [
            (fmin >= 1 && fmin <= fmax, "flowers_per_cluster must be 1 <= min <= max"),
            (rmin > 0.0 && rmin <= rmax && rmax <= 0.15, "cluster_radius must satisfy 0 < min <= max <= 0.15"),
            ((0.0..90.0).contains(&self.normal_jitter_deg), "normal_jitter_deg must be in [0, 90)"),
            (self.canopy_tilt_deg > 0.0 && self.canopy_tilt_deg <= 90.0, "canopy_tilt_deg must be in (0, 90]"),
            (self.canopy_standoff > 0.0, "canopy_standoff must be positive"),
            (self.wire_count >= 1 && self.wire_spacing > 0.0 && self.wire_radius > 0.0, "wire geometry must be positive"),
            (
                !self.target_wires.is_empty() && self.target_wires.iter().all(|w| *w >= 1 && *w <= self.wire_count),
                "target_wires must name existing wires",
            ),
            (
                self.wire_offset[0] >= 0.0 && self.wire_offset[0] <= self.wire_offset[1] && self.row_half_width > 0.0,
                "wire_offset must satisfy 0 <= min <= max and row_half_width must be positive",
            ),
            (self.trunk_radius > 0.0 && self.post_radius > 0.0, "obstacle radii must be positive"),
            (self.background_depth > 0.0, "background_depth must be positive"),
            (self.mask_vertices >= 3, "mask_vertices must be at least 3"),
            ((0.0..1.0).contains(&self.mask_jitter), "mask_jitter must be in [0, 1)"),
            (
                (0.0..=1.0).contains(&self.invalid_depth_fraction) && (0.0..=1.0).contains(&self.depth_dropout_prob),
                "depth failure probabilities must be in [0, 1]",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(SceneError::Config(msg)),
            None => Ok(()),
        }
    }

    fn canopy(&self) -> CanopyPlane {
        let t = self.canopy_tilt_deg.to_radians();
        CanopyPlane {
            point: Point3::new(0.0, 0.0, self.canopy_standoff),
            normal: UnitVec3::new_normalize(Point3::new(0.0, libm::cos(t), -libm::sin(t))).expect("unit"),
            tilt_deg: self.canopy_tilt_deg,
        }
    }

    fn reference_wire(&self) -> f64 {
        let mut w = self.target_wires.clone();
        w.sort_unstable();
        w[w.len() / 2] as f64
    }

    /// Point where wire `w` crosses `x = 0`.
    fn wire_point(&self, canopy: &CanopyPlane, w: u32) -> Point3 {
        canopy.point + canopy.up().as_vec() * ((w as f64 - self.reference_wire()) * self.wire_spacing)
    }
}

/// Builds a reproducible scene; a pure function of `(config, camera, seed)`.
///
/// `camera` supplies the field of view used to keep background clusters in frame.
pub fn generate_scene(config: &SceneConfig, camera: &CameraModel, seed: u64) -> Result<Scene, SceneError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canopy = config.canopy();
    let up = canopy.up().as_vec();
    let along = canopy.along_row().as_vec();

    let stops: Vec<Point3> = config
        .target_wires
        .iter()
        .map(|&w| config.wire_point(&canopy, w) - Point3::new(0.0, 0.0, config.canopy_standoff))
        .collect();

    let mut clusters = Vec::new();
    let mut next_flower = 0u32;
    for i in 0..config.cluster_count {
        let stop = rng.random_range(0..config.target_wires.len());
        let wire = config.wire_point(&canopy, config.target_wires[stop]);
        let x = rng.random_range(-config.row_half_width..=config.row_half_width);
        let [omin, omax] = config.wire_offset;
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let offset = side * rng.random_range(omin..=omax);
        let centroid = wire + along * x + up * offset;
        let normal = jitter_normal(&canopy.normal, config.normal_jitter_deg.to_radians(), &mut rng);
        let cluster = build_cluster(ClusterId(i), centroid, normal, stop, false, config, &mut rng, &mut next_flower);
        clusters.push(cluster);
    }

    for j in 0..config.background_cluster_count {
        let stop = rng.random_range(0..stops.len());
        let depth = config.background_depth;
        // keep the disk well inside the frame
        let half_w = 0.6 * depth * (camera.cx / camera.fx);
        let half_h = 0.6 * depth * (camera.cy / camera.fy);
        let centroid = stops[stop]
            + Point3::new(
                rng.random_range(-half_w..=half_w),
                rng.random_range(-half_h..=half_h),
                depth,
            );
        let facing = UnitVec3::new_normalize(Point3::new(0.0, 0.0, -1.0)).expect("unit");
        let normal = jitter_normal(&facing, config.normal_jitter_deg.to_radians(), &mut rng);
        let id = ClusterId(config.cluster_count + j);
        clusters.push(build_cluster(id, centroid, normal, stop, true, config, &mut rng, &mut next_flower));
    }

    let obstacles = build_obstacles(config, &canopy);
    Ok(Scene {
        clusters,
        obstacles,
        canopy_plane: canopy,
        stops,
        rng_seed: seed,
    })
}

fn jitter_normal(base: &UnitVec3, max_angle: f64, rng: &mut ChaCha8Rng) -> UnitVec3 {
    let angle = if max_angle > 0.0 { rng.random_range(0.0..=max_angle) } else { 0.0 };
    let azimuth = rng.random_range(0.0..2.0 * PI);
    let axis0 = base.any_orthogonal();
    let axis = UnitVec3::new_normalize(rotate_about(axis0.as_vec(), base, azimuth)).expect("unit");
    UnitVec3::new_normalize(rotate_about(base.as_vec(), &axis, angle)).expect("unit")
}

/// Orthonormal in-plane basis for a disk with normal `n`.
fn disk_basis(n: &UnitVec3) -> (Point3, Point3) {
    let a = n.any_orthogonal().as_vec();
    let b = n.as_vec().cross(&a);
    (a, b)
}

#[allow(clippy::too_many_arguments)]
fn build_cluster(
    id: ClusterId,
    centroid: Point3,
    normal: UnitVec3,
    stop: usize,
    background: bool,
    config: &SceneConfig,
    rng: &mut ChaCha8Rng,
    next_flower: &mut u32,
) -> Cluster {
    let [rmin, rmax] = config.cluster_radius;
    let radius = if rmax > rmin { rng.random_range(rmin..=rmax) } else { rmin };
    let [fmin, fmax] = config.flowers_per_cluster;
    let count = rng.random_range(fmin..=fmax);
    let (a, b) = disk_basis(&normal);
    let flowers = (0..count)
        .map(|_| {
            let rho = radius * libm::sqrt(rng.random::<f64>());
            let theta = rng.random_range(0.0..2.0 * PI);
            let position = centroid + a * (rho * libm::cos(theta)) + b * (rho * libm::sin(theta));
            let f = Flower { id: *next_flower, cluster_id: id, position };
            *next_flower += 1;
            f
        })
        .collect();
    Cluster { id, centroid, true_normal: normal, radius, flowers, stop, background }
}

fn build_obstacles(config: &SceneConfig, canopy: &CanopyPlane) -> Vec<Obstacle> {
    let up = canopy.up().as_vec();
    let along = canopy.along_row().as_vec();
    let bottom = config.wire_point(canopy, 1) - up * 0.5;
    let top = config.wire_point(canopy, config.wire_count) + up * 0.5;
    let half_len = config.row_half_width + 0.5;

    let mut obstacles: Vec<Obstacle> = (1..=config.wire_count)
        .map(|w| {
            let c = config.wire_point(canopy, w);
            Obstacle {
                kind: ObstacleKind::TrellisWire,
                start: c - along * half_len,
                end: c + along * half_len,
                radius: config.wire_radius,
            }
        })
        .collect();
    let uprights = config
        .trunk_offsets
        .iter()
        .map(|x| (ObstacleKind::Trunk, *x, config.trunk_radius))
        .chain(config.post_offsets.iter().map(|x| (ObstacleKind::Post, *x, config.post_radius)));
    for (kind, x, radius) in uprights {
        obstacles.push(Obstacle { kind, start: bottom + along * x, end: top + along * x, radius });
    }
    obstacles
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationSource {
    Synthetic,
    Annotated,
}

/// Dense depth raster over a pixel window; NaN or non-positive entries are invalid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DepthPatch {
    pub u0: i64,
    pub v0: i64,
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
}

impl DepthPatch {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Valid depth at integer pixel `(u, v)`, if any.
    pub fn get(&self, u: i64, v: i64) -> Option<f64> {
        let (du, dv) = (u - self.u0, v - self.v0);
        if du < 0 || dv < 0 || du >= self.width as i64 || dv >= self.height as i64 {
            return None;
        }
        let d = self.depth[(dv as usize) * self.width as usize + du as usize];
        (d.is_finite() && d > 0.0).then_some(d)
    }

    pub fn values(&self) -> &[f64] {
        &self.depth
    }
}

/// One segmented cluster as delivered by the vision front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterObservation {
    pub id: ClusterId,
    pub mask: Polygon2,
    /// Depth at each mask vertex (parallel to `mask`); NaN or 0 means invalid.
    pub vertex_depth: Vec<f64>,
    /// Depth raster over the mask's bounding box (empty for annotated data).
    pub depth_patch: DepthPatch,
    pub source: ObservationSource,
}

fn cluster_rng(scene_seed: u64, id: ClusterId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed);
    rng.set_stream((1u64 << 32) | id.0 as u64);
    rng
}

/// Projects every cluster visible from `cam` into a mask polygon plus depth patch.
///
/// Clusters behind the camera, facing away from it, or not entirely inside the image
/// are omitted. Mask shape depends only on the cluster; depth dropouts are drawn per
/// cluster from the scene seed.
pub fn render_observations(scene: &Scene, cam: &CameraModel, config: &SceneConfig) -> Vec<ClusterObservation> {
    scene
        .clusters
        .iter()
        .filter_map(|c| render_cluster(scene.rng_seed, c, cam, config))
        .collect()
}

fn render_cluster(seed: u64, cluster: &Cluster, cam: &CameraModel, config: &SceneConfig) -> Option<ClusterObservation> {
    let center = cam.world_to_camera(&cluster.centroid);
    if center.z <= 0.0 {
        return None;
    }
    let n = cluster.true_normal;
    if n.dot(&(-center)) <= 0.0 {
        return None;
    }
    let mut rng = cluster_rng(seed, cluster.id);
    let (a, b) = disk_basis(&n);
    let count = config.mask_vertices as usize;
    let mut vertices = Vec::with_capacity(count);
    let mut vertex_depth = Vec::with_capacity(count);
    for k in 0..count {
        let theta = 2.0 * PI * k as f64 / count as f64;
        let rho = cluster.radius * (1.0 - config.mask_jitter * rng.random::<f64>());
        let p = center + a * (rho * libm::cos(theta)) + b * (rho * libm::sin(theta));
        let (px, depth) = cam.project(&p)?;
        if !cam.in_image(&px) {
            return None;
        }
        vertices.push(px);
        vertex_depth.push(depth);
    }
    let mask = Polygon2::new(vertices).ok()?;

    let dropout = rng.random::<f64>() < config.depth_dropout_prob;
    let (min_u, min_v, max_u, max_v) = mask.bounds();
    let u0 = libm::floor(min_u) as i64;
    let v0 = libm::floor(min_v) as i64;
    let width = (libm::ceil(max_u) as i64 - u0 + 1) as u32;
    let height = (libm::ceil(max_v) as i64 - v0 + 1) as u32;
    let denom_n = n.as_vec();
    let plane_offset = denom_n.dot(&center);
    let mut depth = Vec::with_capacity(width as usize * height as usize);
    for dv in 0..height as i64 {
        for du in 0..width as i64 {
            let ray = cam.ray((u0 + du) as f64, (v0 + dv) as f64);
            let denom = denom_n.dot(&ray);
            let mut d = if denom.abs() > 1e-12 { plane_offset / denom } else { f64::NAN };
            if dropout || rng.random::<f64>() < config.invalid_depth_fraction {
                d = f64::NAN;
            }
            depth.push(d);
        }
    }
    if dropout {
        vertex_depth.iter_mut().for_each(|d| *d = f64::NAN);
    } else {
        for d in vertex_depth.iter_mut() {
            if rng.random::<f64>() < config.invalid_depth_fraction {
                *d = f64::NAN;
            }
        }
    }

    Some(ClusterObservation {
        id: cluster.id,
        mask,
        vertex_depth,
        depth_patch: DepthPatch { u0, v0, width, height, depth },
        source: ObservationSource::Synthetic,
    })
}

/// Pixel projection of a world point through `cam`, if in front of it.
pub fn project_world(cam: &CameraModel, p: &Point3) -> Option<Pixel> {
    cam.project(&cam.world_to_camera(p)).map(|(px, _)| px)
}
