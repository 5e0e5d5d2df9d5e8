//! Home/Approach/Thin/Retract execution over a planned tour, with phase timing,
//! flower outcomes and run summaries.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, Point3};
use crate::pose::ClusterPose;
use crate::route::{IkVerdict, Strategy, Tour, WaypointSet};
use crate::scene::{Cluster, ClusterId, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingModel {
    pub segmentation_s: f64,
    pub pose_estimation_s: f64,
    pub motion_plan_s: f64,
    /// Extra planning time per sweep waypoint.
    pub motion_plan_per_waypoint_s: f64,
    pub travel_speed_mps: f64,
    pub center_thin_s: f64,
    pub sweep_speed_mps: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            segmentation_s: 1.2,
            pose_estimation_s: 0.9,
            motion_plan_s: 1.33,
            motion_plan_per_waypoint_s: 0.02,
            travel_speed_mps: 0.25,
            center_thin_s: 2.0,
            sweep_speed_mps: 0.125,
        }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<(), ExecError> {
        let all = [
            self.segmentation_s,
            self.pose_estimation_s,
            self.motion_plan_s,
            self.travel_speed_mps,
            self.center_thin_s,
            self.sweep_speed_mps,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.motion_plan_per_waypoint_s.is_finite()
            && self.motion_plan_per_waypoint_s >= 0.0
        {
            Ok(())
        } else {
            Err(ExecError::InvalidModel("timing values must be positive"))
        }
    }

    fn planning_s(&self, wps: &WaypointSet) -> f64 {
        self.motion_plan_s + self.motion_plan_per_waypoint_s * wps.thin_path.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlowerCategory {
    CompletelyRemoved,
    PetalAntherRemoved,
    PetalRemoved,
    Saved,
}

impl FlowerCategory {
    pub const ALL: [FlowerCategory; 4] = [
        FlowerCategory::CompletelyRemoved,
        FlowerCategory::PetalAntherRemoved,
        FlowerCategory::PetalRemoved,
        FlowerCategory::Saved,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FlowerCategory::CompletelyRemoved => "completely_removed",
            FlowerCategory::PetalAntherRemoved => "petal_anther_removed",
            FlowerCategory::PetalRemoved => "petal_removed",
            FlowerCategory::Saved => "saved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeMode {
    Categorical,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutcomeModel {
    pub mode: OutcomeMode,
    /// Probabilities in `FlowerCategory::ALL` order.
    pub boundary: [f64; 4],
    pub center: [f64; 4],
    pub core_radius: f64,
    pub effector_radius: f64,
    pub margin: f64,
}

impl Default for OutcomeModel {
    fn default() -> Self {
        OutcomeModel {
            mode: OutcomeMode::Categorical,
            boundary: [0.33, 0.1705, 0.1705, 0.329],
            center: [0.33, 0.1325, 0.1325, 0.405],
            core_radius: 0.015,
            effector_radius: 0.03,
            margin: 0.015,
        }
    }
}

impl OutcomeModel {
    pub fn validate(&self) -> Result<(), ExecError> {
        for v in [self.boundary, self.center] {
            if v.iter().any(|p| !(0.0..=1.0).contains(p)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(ExecError::InvalidModel("outcome probabilities must be in [0, 1] and sum to 1"));
            }
        }
        if !(self.core_radius >= 0.0 && self.core_radius <= self.effector_radius && self.margin >= 0.0) {
            return Err(ExecError::InvalidModel("outcome radii must satisfy 0 <= core <= effector, margin >= 0"));
        }
        Ok(())
    }

    pub fn probabilities(&self, strategy: Strategy) -> &[f64; 4] {
        match strategy {
            Strategy::Boundary => &self.boundary,
            Strategy::Center => &self.center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("tour references cluster {0} with no plan or scene entry")]
    PlanMismatch(ClusterId),
    #[error("{0}")]
    InvalidModel(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    Home,
    Approach,
    Thin,
    Retract,
}

/// Per-cluster durations, seconds. `approach` includes the move from the
/// approach point down to the thinning start point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseDurations {
    pub segmentation: f64,
    pub pose_estimation: f64,
    pub motion_planning: f64,
    pub approach: f64,
    pub thin: f64,
    pub retract: f64,
}

impl PhaseDurations {
    pub const NAMES: [&'static str; 6] = ["segmentation", "pose_estimation", "motion_planning", "approach", "thin", "retract"];

    pub fn as_array(&self) -> [f64; 6] {
        [self.segmentation, self.pose_estimation, self.motion_planning, self.approach, self.thin, self.retract]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn add(&self, o: &PhaseDurations) -> PhaseDurations {
        PhaseDurations {
            segmentation: self.segmentation + o.segmentation,
            pose_estimation: self.pose_estimation + o.pose_estimation,
            motion_planning: self.motion_planning + o.motion_planning,
            approach: self.approach + o.approach,
            thin: self.thin + o.thin,
            retract: self.retract + o.retract,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub cluster_id: ClusterId,
    pub strategy: Strategy,
    pub ik: IkVerdict,
    /// `(state, enter_time_s)`; empty when aborted.
    pub states: Vec<(State, f64)>,
    pub enter_time: f64,
    pub exit_time: f64,
    pub phases: PhaseDurations,
    pub flower_outcomes: Vec<(u32, FlowerCategory)>,
    pub aborted: bool,
}

impl ExecutionTrace {
    pub fn duration(&self) -> f64 {
        self.exit_time - self.enter_time
    }

    pub fn completely_removed(&self) -> bool {
        !self.aborted
            && !self.flower_outcomes.is_empty()
            && self.flower_outcomes.iter().all(|(_, c)| *c == FlowerCategory::CompletelyRemoved)
    }
}

/// Everything the executor needs to know about one accepted cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPlan {
    pub pose: ClusterPose,
    pub waypoints: WaypointSet,
    pub ik: IkVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRun {
    pub traces: Vec<ExecutionTrace>,
    /// Full state timeline, starting and ending at Home.
    pub timeline: Vec<(State, f64)>,
    /// Travel from the last retract point back home; not part of any cycle.
    pub return_home_s: f64,
}

impl ExecutionRun {
    pub fn total_s(&self) -> f64 {
        self.traces.iter().map(ExecutionTrace::duration).sum()
    }
}

/// Checks `Home (Approach Thin Retract)* Home`.
pub fn is_legal_sequence(states: &[State]) -> bool {
    if states.len() < 2 || states[0] != State::Home || states[states.len() - 1] != State::Home {
        return false;
    }
    let body = &states[1..states.len() - 1];
    body.len() % 3 == 0
        && body
            .chunks(3)
            .all(|c| c == [State::Approach, State::Thin, State::Retract])
}

/// Walks the tour in order. Clusters whose IK verdict is not `Success` are
/// planned but aborted: they cost perception and planning time and the arm stays put.
#[allow(clippy::too_many_arguments)]
pub fn execute<R: Rng + ?Sized>(
    tour: &Tour,
    plans: &[ClusterPlan],
    home: Point3,
    strategy: Strategy,
    timing: &TimingModel,
    outcome: &OutcomeModel,
    scene: &Scene,
    rng: &mut R,
) -> Result<ExecutionRun, ExecError> {
    let mut traces = Vec::with_capacity(tour.order.len());
    let mut timeline = alloc::vec![(State::Home, 0.0)];
    let mut position = home;
    let mut clock = 0.0;

    for id in &tour.order {
        let plan = plans.iter().find(|p| p.pose.id == *id).ok_or(ExecError::PlanMismatch(*id))?;
        let cluster = scene.cluster(*id).ok_or(ExecError::PlanMismatch(*id))?;
        let wps = &plan.waypoints;
        let mut phases = PhaseDurations {
            segmentation: timing.segmentation_s,
            pose_estimation: timing.pose_estimation_s,
            motion_planning: timing.planning_s(wps),
            ..PhaseDurations::default()
        };
        let enter = clock;
        let aborted = plan.ik != IkVerdict::Success;
        let mut states = Vec::new();
        let mut flower_outcomes = Vec::new();
        if !aborted {
            let speed = timing.travel_speed_mps;
            phases.approach = (position.distance(&wps.approach.position)
                + wps.approach.position.distance(&wps.thin_start.position))
                / speed;
            phases.thin = match strategy {
                Strategy::Center => timing.center_thin_s,
                Strategy::Boundary => wps.sweep_length() / timing.sweep_speed_mps,
            };
            phases.retract = wps.thin_start.position.distance(&wps.retract.position) / speed;
            let pre = phases.segmentation + phases.pose_estimation + phases.motion_planning + phases.approach;
            states.push((State::Approach, enter));
            states.push((State::Thin, enter + pre));
            states.push((State::Retract, enter + pre + phases.thin));
            flower_outcomes = apply_outcomes(cluster, strategy, &plan.pose, wps, outcome, rng);
            position = wps.retract.position;
        }
        clock = enter + phases.total();
        timeline.extend_from_slice(&states);
        traces.push(ExecutionTrace {
            cluster_id: *id,
            strategy,
            ik: plan.ik,
            states,
            enter_time: enter,
            exit_time: clock,
            phases,
            flower_outcomes,
            aborted,
        });
    }
    timeline.push((State::Home, clock));
    let return_home_s = position.distance(&home) / timing.travel_speed_mps;
    Ok(ExecutionRun { traces, timeline, return_home_s })
}

fn draw_category<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> FlowerCategory {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (cat, p) in FlowerCategory::ALL.iter().zip(probs) {
        acc += p;
        if x < acc {
            return *cat;
        }
    }
    // rounding left a sliver above the last cumulative sum
    *FlowerCategory::ALL
        .iter()
        .zip(probs)
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(c, _)| c)
        .unwrap_or(&FlowerCategory::Saved)
}

/// Distance from `p` to what the effector touches: the centroid, plus the closed
/// sweep polyline for boundary thinning.
pub fn contact_distance(p: &Point3, centroid: &Point3, strategy: Strategy, wps: &WaypointSet) -> f64 {
    let mut d = p.distance(centroid);
    if strategy == Strategy::Boundary {
        let ring = wps.contact_path();
        for i in 0..ring.len() {
            d = d.min(point_segment_distance(p, &ring[i], &ring[(i + 1) % ring.len()]));
        }
    }
    d
}

/// Per-flower outcome. Categorical draws consume one value per flower; geometric
/// mode is deterministic.
pub fn apply_outcomes<R: Rng + ?Sized>(
    cluster: &Cluster,
    strategy: Strategy,
    pose: &ClusterPose,
    wps: &WaypointSet,
    outcome: &OutcomeModel,
    rng: &mut R,
) -> Vec<(u32, FlowerCategory)> {
    cluster
        .flowers
        .iter()
        .map(|f| {
            let cat = match outcome.mode {
                OutcomeMode::Categorical => draw_category(outcome.probabilities(strategy), rng),
                OutcomeMode::Geometric => {
                    let d = contact_distance(&f.position, &pose.position, strategy, wps);
                    if d <= outcome.core_radius {
                        FlowerCategory::CompletelyRemoved
                    } else if d <= outcome.effector_radius {
                        FlowerCategory::PetalAntherRemoved
                    } else if d <= outcome.effector_radius + outcome.margin {
                        FlowerCategory::PetalRemoved
                    } else {
                        FlowerCategory::Saved
                    }
                }
            };
            (f.id, cat)
        })
        .collect()
}

/// Additive per-strategy statistics. Merging is field-wise addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub detected: u64,
    pub accepted: u64,
    pub rejected_automatic: u64,
    pub rejected_policy: u64,
    pub ik_success: u64,
    pub no_ik: u64,
    pub non_optimal_ik: u64,
    pub clusters_thinned: u64,
    pub clusters_completely_removed: u64,
    /// Flower counts in `FlowerCategory::ALL` order.
    pub flowers: [u64; 4],
    /// Phase sums over thinned clusters.
    pub phase_sums: PhaseDurations,
    pub cycle_sum_s: f64,
}

impl StrategySummary {
    pub fn empty(strategy: Strategy) -> Self {
        StrategySummary {
            strategy,
            detected: 0,
            accepted: 0,
            rejected_automatic: 0,
            rejected_policy: 0,
            ik_success: 0,
            no_ik: 0,
            non_optimal_ik: 0,
            clusters_thinned: 0,
            clusters_completely_removed: 0,
            flowers: [0; 4],
            phase_sums: PhaseDurations::default(),
            cycle_sum_s: 0.0,
        }
    }

    pub fn merge(&self, o: &StrategySummary) -> StrategySummary {
        let mut flowers = self.flowers;
        for (a, b) in flowers.iter_mut().zip(o.flowers) {
            *a += b;
        }
        StrategySummary {
            strategy: self.strategy,
            detected: self.detected + o.detected,
            accepted: self.accepted + o.accepted,
            rejected_automatic: self.rejected_automatic + o.rejected_automatic,
            rejected_policy: self.rejected_policy + o.rejected_policy,
            ik_success: self.ik_success + o.ik_success,
            no_ik: self.no_ik + o.no_ik,
            non_optimal_ik: self.non_optimal_ik + o.non_optimal_ik,
            clusters_thinned: self.clusters_thinned + o.clusters_thinned,
            clusters_completely_removed: self.clusters_completely_removed + o.clusters_completely_removed,
            flowers,
            phase_sums: self.phase_sums.add(&o.phase_sums),
            cycle_sum_s: self.cycle_sum_s + o.cycle_sum_s,
        }
    }

    pub fn flower_total(&self) -> u64 {
        self.flowers.iter().sum()
    }

    pub fn category_proportion(&self, c: FlowerCategory) -> Option<f64> {
        let total = self.flower_total();
        (total > 0).then(|| self.flowers[c.index()] as f64 / total as f64)
    }

    /// Share of flowers not saved.
    pub fn thinned_proportion(&self) -> Option<f64> {
        self.category_proportion(FlowerCategory::Saved).map(|s| 1.0 - s)
    }

    /// Share of thinned clusters that kept at least one flower.
    pub fn proportional_success(&self) -> Option<f64> {
        (self.clusters_thinned > 0)
            .then(|| 1.0 - self.clusters_completely_removed as f64 / self.clusters_thinned as f64)
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.detected > 0).then(|| self.accepted as f64 / self.detected as f64)
    }

    pub fn motion_success_rate(&self) -> Option<f64> {
        (self.accepted > 0).then(|| self.ik_success as f64 / self.accepted as f64)
    }

    pub fn mean_cycle_s(&self) -> Option<f64> {
        (self.clusters_thinned > 0).then(|| self.cycle_sum_s / self.clusters_thinned as f64)
    }

    pub fn mean_phases(&self) -> Option<PhaseDurations> {
        let n = self.clusters_thinned as f64;
        (self.clusters_thinned > 0).then(|| {
            let s = self.phase_sums;
            PhaseDurations {
                segmentation: s.segmentation / n,
                pose_estimation: s.pose_estimation / n,
                motion_planning: s.motion_planning / n,
                approach: s.approach / n,
                thin: s.thin / n,
                retract: s.retract / n,
            }
        })
    }

    pub fn check_consistency(&self) -> Result<(), &'static str> {
        if self.accepted != self.ik_success + self.no_ik + self.non_optimal_ik {
            return Err("accepted != success + no_ik + non_optimal");
        }
        if self.detected != self.accepted + self.rejected_automatic + self.rejected_policy {
            return Err("detected != accepted + rejected");
        }
        if self.clusters_completely_removed > self.clusters_thinned {
            return Err("more clusters completely removed than thinned");
        }
        Ok(())
    }
}

/// Folds execution traces into a summary. Every trace counts as detected and
/// accepted; callers with rejection counts overwrite the funnel fields.
pub fn summarize_traces(strategy: Strategy, traces: &[ExecutionTrace]) -> StrategySummary {
    let mut s = StrategySummary::empty(strategy);
    for t in traces {
        match t.ik {
            IkVerdict::Success => s.ik_success += 1,
            IkVerdict::NoIk => s.no_ik += 1,
            IkVerdict::NonOptimalIk => s.non_optimal_ik += 1,
        }
        if t.aborted {
            continue;
        }
        s.clusters_thinned += 1;
        if t.completely_removed() {
            s.clusters_completely_removed += 1;
        }
        for (_, c) in &t.flower_outcomes {
            s.flowers[c.index()] += 1;
        }
        s.phase_sums = s.phase_sums.add(&t.phases);
        s.cycle_sum_s += t.duration();
    }
    s.accepted = traces.len() as u64;
    s.detected = s.accepted;
    s
}
