//! Safety screening, reachability, waypoint geometry and visit ordering.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, UnitVec3};
use crate::perception::FilterVerdict;
use crate::pose::ClusterPose;
use crate::scene::{ClusterId, Obstacle, ObstacleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Boundary,
    Center,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Boundary, Strategy::Center];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Boundary => "boundary",
            Strategy::Center => "center",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetyPolicy {
    /// Minimum distance to trunk and post surfaces, meters.
    pub trunk_clearance: f64,
    pub wire_clearance: f64,
    /// Also screen hull vertices under the boundary strategy.
    pub check_boundary_vertices: bool,
}

impl Default for SafetyPolicy {
    fn default() -> Self {
        SafetyPolicy { trunk_clearance: 0.10, wire_clearance: 0.05, check_boundary_vertices: true }
    }
}

impl SafetyPolicy {
    fn clearance(&self, kind: ObstacleKind) -> f64 {
        match kind {
            ObstacleKind::Trunk | ObstacleKind::Post => self.trunk_clearance,
            ObstacleKind::TrellisWire => self.wire_clearance,
        }
    }

    fn violates(&self, p: &Point3, obstacles: &[Obstacle]) -> bool {
        obstacles.iter().any(|o| o.surface_distance(p) < self.clearance(o.kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicModel {
    pub base: Point3,
    pub reach: f64,
    pub min_reach: f64,
    /// Half-angle of the cone about the base-to-target direction, radians.
    pub max_approach_angle: f64,
    pub nonoptimal_ik_prob: f64,
}

impl Default for KinematicModel {
    fn default() -> Self {
        KinematicModel {
            base: Point3::new(0.0, 0.1, 0.25),
            reach: 0.85,
            min_reach: 0.15,
            max_approach_angle: 60f64.to_radians(),
            nonoptimal_ik_prob: 0.014,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("boundary thinning needs at least 3 hull vertices, got {0}")]
    DegenerateHull(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
}

impl KinematicModel {
    pub fn validate(&self) -> Result<(), RouteError> {
        if !(self.min_reach > 0.0 && self.min_reach < self.reach) {
            return Err(RouteError::InvalidParams("kinematics needs 0 < min_reach < reach"));
        }
        if !(0.0..=1.0).contains(&self.nonoptimal_ik_prob) {
            return Err(RouteError::InvalidParams("nonoptimal_ik_prob must be in [0, 1]"));
        }
        if !(self.max_approach_angle >= 0.0) || !self.base.is_finite() {
            return Err(RouteError::InvalidParams("kinematics angle and base must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: Point3,
    pub orientation: UnitVec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    pub approach: Waypoint,
    pub thin_start: Waypoint,
    /// Boundary sweep after `thin_start`; empty for center thinning.
    pub thin_path: Vec<Point3>,
    pub retract: Waypoint,
}

impl WaypointSet {
    pub fn positions(&self) -> impl Iterator<Item = Point3> + '_ {
        [self.approach.position, self.thin_start.position]
            .into_iter()
            .chain(self.thin_path.iter().copied())
            .chain(core::iter::once(self.retract.position))
    }

    /// Closed sweep length: zero for center thinning, the hull perimeter otherwise.
    pub fn sweep_length(&self) -> f64 {
        if self.thin_path.is_empty() {
            return 0.0;
        }
        let mut prev = self.thin_start.position;
        let mut total = 0.0;
        for p in &self.thin_path {
            total += prev.distance(p);
            prev = *p;
        }
        total + prev.distance(&self.thin_start.position)
    }

    /// `thin_start` followed by the sweep, for coverage checks.
    pub fn contact_path(&self) -> Vec<Point3> {
        let mut v = Vec::with_capacity(self.thin_path.len() + 1);
        v.push(self.thin_start.position);
        v.extend_from_slice(&self.thin_path);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IkVerdict {
    Success,
    NoIk,
    NonOptimalIk,
}

impl IkVerdict {
    pub fn name(self) -> &'static str {
        match self {
            IkVerdict::Success => "success",
            IkVerdict::NoIk => "no_ik",
            IkVerdict::NonOptimalIk => "non_optimal_ik",
        }
    }
}

pub fn safety_filter(
    pose: &ClusterPose,
    hull3d: &[Point3],
    obstacles: &[Obstacle],
    policy: &SafetyPolicy,
    strategy: Strategy,
) -> FilterVerdict {
    let mut reject = policy.violates(&pose.position, obstacles);
    if !reject && strategy == Strategy::Boundary && policy.check_boundary_vertices {
        reject = hull3d.iter().any(|v| policy.violates(v, obstacles));
    }
    if reject {
        FilterVerdict::rejected_policy(pose.id)
    } else {
        FilterVerdict::accepted(pose.id)
    }
}

/// Reachability verdict. Consumes exactly one draw from `rng` whatever the outcome.
pub fn check_ik<R: Rng + ?Sized>(wps: &WaypointSet, kin: &KinematicModel, rng: &mut R) -> IkVerdict {
    let draw: f64 = rng.random();
    let out_of_reach = wps.positions().any(|p| {
        let d = p.distance(&kin.base);
        !(d >= kin.min_reach && d <= kin.reach)
    });
    if out_of_reach {
        return IkVerdict::NoIk;
    }
    let tool_axis = -wps.approach.orientation.as_vec();
    let Some(reach_dir) = UnitVec3::new_normalize(wps.thin_start.position - kin.base) else {
        return IkVerdict::NoIk;
    };
    let cos = tool_axis.dot(&reach_dir.as_vec()).clamp(-1.0, 1.0);
    if libm::acos(cos) > kin.max_approach_angle {
        return IkVerdict::NoIk;
    }
    if draw < kin.nonoptimal_ik_prob {
        IkVerdict::NonOptimalIk
    } else {
        IkVerdict::Success
    }
}

/// Waypoints for one cluster. The boundary sweep runs clockwise when viewed
/// from the side the normal points to (the camera side).
pub fn compute_waypoints(
    pose: &ClusterPose,
    hull3d: &[Point3],
    strategy: Strategy,
    offset: f64,
) -> Result<WaypointSet, RouteError> {
    let n = pose.normal;
    let at = |position| Waypoint { position, orientation: n };
    let approach = at(pose.position + n.as_vec() * offset);
    let (thin_start, thin_path) = match strategy {
        Strategy::Center => (at(pose.position), Vec::new()),
        Strategy::Boundary => {
            if hull3d.len() < 3 {
                return Err(RouteError::DegenerateHull(hull3d.len()));
            }
            let p = pose.position;
            let winding: f64 = (0..hull3d.len())
                .map(|i| (hull3d[i] - p).cross(&(hull3d[(i + 1) % hull3d.len()] - p)).dot(&n.as_vec()))
                .sum();
            let mut ring: Vec<Point3> = hull3d.to_vec();
            if winding > 0.0 {
                ring[1..].reverse();
            }
            (at(ring[0]), ring[1..].to_vec())
        }
    };
    Ok(WaypointSet { approach, thin_start, thin_path, retract: approach })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// Exchange the positions of two clusters.
    Swap,
    /// Reverse the segment between two positions.
    TwoOpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RouteOptions {
    pub neighborhood: Neighborhood,
    /// Take the first improving move instead of the best one.
    pub first_improvement: bool,
    pub max_iters: u32,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions { neighborhood: Neighborhood::Swap, first_improvement: false, max_iters: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<ClusterId>,
    pub cost: f64,
    pub closed: bool,
    pub initial_cost: f64,
    pub iterations: u32,
    /// False when `max_iters` stopped the search.
    pub converged: bool,
}

const IMPROVEMENT_EPS: f64 = 1e-12;

/// Closed tour length: start, each point in order, back to start.
pub fn tour_cost(start: &Point3, points: &[Point3]) -> f64 {
    let mut prev = *start;
    let mut total = 0.0;
    for p in points {
        total += prev.distance(p);
        prev = *p;
    }
    total + prev.distance(start)
}

fn apply_move(order: &mut [usize], i: usize, j: usize, nb: Neighborhood) {
    match nb {
        Neighborhood::Swap => order.swap(i, j),
        Neighborhood::TwoOpt => order[i..=j].reverse(),
    }
}

fn cost_of(start: &Point3, pts: &[Point3], order: &[usize]) -> f64 {
    let mut prev = *start;
    let mut total = 0.0;
    for &k in order {
        total += prev.distance(&pts[k]);
        prev = pts[k];
    }
    total + prev.distance(start)
}

/// Local search over a closed tour through `start`, from a shuffled initial order.
pub fn plan_route<R: Rng + ?Sized>(
    targets: &[(ClusterId, Point3)],
    start: &Point3,
    rng: &mut R,
    options: &RouteOptions,
) -> Tour {
    let pts: Vec<Point3> = targets.iter().map(|t| t.1).collect();
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.shuffle(rng);
    let initial_cost = cost_of(start, &pts, &order);
    let mut cost = initial_cost;
    let mut iterations = 0;
    let mut converged = false;
    let n = order.len();

    while iterations < options.max_iters {
        let mut best: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..n {
            for j in i + 1..n {
                apply_move(&mut order, i, j, options.neighborhood);
                let c = cost_of(start, &pts, &order);
                apply_move(&mut order, i, j, options.neighborhood);
                let improves = c < cost - IMPROVEMENT_EPS;
                if improves && best.is_none_or(|b| c < b.2) {
                    best = Some((i, j, c));
                    if options.first_improvement {
                        break 'scan;
                    }
                }
            }
        }
        match best {
            Some((i, j, c)) => {
                apply_move(&mut order, i, j, options.neighborhood);
                cost = c;
                iterations += 1;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged && iterations == options.max_iters {
        converged = is_local_optimum(start, &pts, &order, options.neighborhood);
    }

    Tour {
        order: order.iter().map(|&k| targets[k].0).collect(),
        cost,
        closed: true,
        initial_cost,
        iterations,
        converged,
    }
}

fn is_local_optimum(start: &Point3, pts: &[Point3], order: &[usize], nb: Neighborhood) -> bool {
    let base = cost_of(start, pts, order);
    let mut work = order.to_vec();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            apply_move(&mut work, i, j, nb);
            let c = cost_of(start, pts, &work);
            apply_move(&mut work, i, j, nb);
            if c < base - IMPROVEMENT_EPS {
                return false;
            }
        }
    }
    true
}
