//! Scenario configuration and the end-to-end simulated run:
//! generate, render, perceive, estimate poses, filter, plan, execute, summarize.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{execute, is_legal_sequence, summarize_traces, ClusterPlan, ExecError, ExecutionRun, OutcomeModel, StrategySummary, TimingModel};
use crate::geometry::{CameraModel, Point3};
use crate::perception::{depth_filter, to_cloud, FilterStatus, FilterVerdict, PerceptionParams, RejectReason};
use crate::pose::{estimate_pose, ClusterPose, PoseParams};
use crate::replay::DecisionRecord;
use crate::route::{check_ik, compute_waypoints, plan_route, safety_filter, IkVerdict, KinematicModel, RouteOptions, SafetyPolicy, Strategy, Tour};
use crate::scene::{generate_scene, render_observations, ClusterId, Scene, SceneConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Boundary,
    Center,
    Both,
}

impl StrategyChoice {
    pub fn strategies(self) -> &'static [Strategy] {
        match self {
            StrategyChoice::Boundary => &[Strategy::Boundary],
            StrategyChoice::Center => &[Strategy::Center],
            StrategyChoice::Both => &Strategy::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Independent scenes; replicate `i` uses seed `seed + i`.
    pub replicates: u32,
    pub strategy: StrategyChoice,
    /// End-effector rest position, world frame.
    pub home: Point3,
    /// Approach and retract distance along the cluster normal, meters.
    pub approach_offset: f64,
    pub scene: SceneConfig,
    pub camera: CameraModel,
    pub perception: PerceptionParams,
    pub pose: PoseParams,
    pub safety: SafetyPolicy,
    pub kinematics: KinematicModel,
    pub route: RouteOptions,
    pub timing: TimingModel,
    pub outcome: OutcomeModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            replicates: 1,
            strategy: StrategyChoice::Both,
            home: Point3::ORIGIN,
            approach_offset: 0.10,
            scene: SceneConfig::default(),
            camera: CameraModel::default(),
            perception: PerceptionParams::default(),
            pose: PoseParams::default(),
            safety: SafetyPolicy::default(),
            kinematics: KinematicModel::default(),
            route: RouteOptions::default(),
            timing: TimingModel::default(),
            outcome: OutcomeModel::default(),
        }
    }
}

/// Validation failure, tagged with the config section it belongs to (`None` for top-level keys).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{message}", section.map(|s| alloc::format!("[{s}] ")).unwrap_or_default())]
pub struct ConfigError {
    pub section: Option<&'static str>,
    pub message: String,
}

impl ConfigError {
    fn new(section: Option<&'static str>, message: impl ToString) -> Self {
        ConfigError { section, message: message.to_string() }
    }
}

fn in_section<E: ToString>(section: &'static str) -> impl Fn(E) -> ConfigError {
    move |e| ConfigError::new(Some(section), e)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scene.validate().map_err(in_section("scene"))?;
        self.camera.validate().map_err(in_section("camera"))?;
        self.pose.validate().map_err(in_section("pose"))?;
        self.kinematics.validate().map_err(in_section("kinematics"))?;
        self.timing.validate().map_err(in_section("timing"))?;
        self.outcome.validate().map_err(in_section("outcome"))?;
        if self.replicates == 0 {
            return Err(ConfigError::new(None, "replicates must be at least 1"));
        }
        if !(self.approach_offset > 0.0) || !self.home.is_finite() {
            return Err(ConfigError::new(None, "approach_offset must be positive and home finite"));
        }
        if !(self.perception.max_depth > 0.0) || self.perception.sample_stride == 0 {
            return Err(ConfigError::new(Some("perception"), "max_depth and sample_stride must be positive"));
        }
        if !(self.safety.trunk_clearance >= 0.0 && self.safety.wire_clearance >= 0.0) {
            return Err(ConfigError::new(Some("safety"), "clearances must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("invariant violated: {0}")]
    Invariant(&'static str),
}

/// A detected cluster after perception, pose estimation and the depth filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perceived {
    pub id: ClusterId,
    pub stop: usize,
    pub background: bool,
    pub verdict: FilterVerdict,
    /// World-frame pose; absent when perception failed.
    pub pose: Option<ClusterPose>,
    /// World-frame hull vertices, same order as the image hull.
    pub hull3d: Vec<Point3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub decisions: Vec<DecisionRecord>,
    pub tour: Tour,
    pub execution: ExecutionRun,
    pub summary: StrategySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub seed: u64,
    pub scene: Scene,
    pub perceived: Vec<Perceived>,
    pub runs: Vec<StrategyRun>,
}

const STREAM_IK: u64 = 2;
const STREAM_ROUTE: u64 = 3;
const STREAM_OUTCOME: u64 = 4;

fn stream_rng(seed: u64, kind: u64, strategy: Strategy) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind << 32) | strategy as u64);
    rng
}

/// Images every stop and runs perception on the clusters assigned to it.
pub fn perceive(cfg: &ScenarioConfig, scene: &Scene) -> Vec<Perceived> {
    let mut out = Vec::new();
    for (stop, viewpoint) in scene.stops.iter().enumerate() {
        let cam = cfg.camera.with_viewpoint(*viewpoint);
        for obs in render_observations(scene, &cam, &cfg.scene) {
            let Some(cluster) = scene.cluster(obs.id).filter(|c| c.stop == stop) else {
                continue;
            };
            let base = Perceived {
                id: obs.id,
                stop,
                background: cluster.background,
                verdict: FilterVerdict::rejected_automatic(obs.id, RejectReason::InvalidDepth),
                pose: None,
                hull3d: Vec::new(),
            };
            let Ok(cloud) = to_cloud(&obs, &cam, &cfg.perception) else {
                out.push(base);
                continue;
            };
            let verdict = depth_filter(&cloud, cfg.perception.max_depth);
            let Ok(pose) = estimate_pose(obs.id, &cloud.points, &Point3::ORIGIN, &cfg.pose) else {
                out.push(base);
                continue;
            };
            out.push(Perceived {
                verdict,
                pose: Some(pose.translated(*viewpoint)),
                hull3d: cloud.hull3d.iter().map(|p| cam.camera_to_world(p)).collect(),
                ..base
            });
        }
    }
    out
}

fn run_strategy(cfg: &ScenarioConfig, seed: u64, scene: &Scene, perceived: &[Perceived], strategy: Strategy) -> Result<StrategyRun, PipelineError> {
    let mut ik_rng = stream_rng(seed, STREAM_IK, strategy);
    let mut decisions = Vec::with_capacity(perceived.len());
    let mut plans = Vec::new();
    for p in perceived {
        let mut verdict = p.verdict;
        let mut ik = None;
        if let (true, Some(pose)) = (verdict.is_accepted(), p.pose) {
            verdict = safety_filter(&pose, &p.hull3d, &scene.obstacles, &cfg.safety, strategy);
            if verdict.is_accepted() {
                let verdict_ik = match compute_waypoints(&pose, &p.hull3d, strategy, cfg.approach_offset) {
                    Ok(waypoints) => {
                        let v = check_ik(&waypoints, &cfg.kinematics, &mut ik_rng);
                        plans.push(ClusterPlan { pose, waypoints, ik: v });
                        v
                    }
                    Err(_) => return Err(PipelineError::Invariant("accepted cluster without a usable hull")),
                };
                ik = Some(verdict_ik);
            }
        }
        decisions.push(DecisionRecord {
            id: p.id,
            strategy,
            status: verdict.status,
            reason: verdict.reason,
            ik,
            completely_removed: false,
        });
    }

    let targets: Vec<(ClusterId, Point3)> = plans.iter().map(|p| (p.pose.id, p.pose.position)).collect();
    let tour = plan_route(&targets, &cfg.home, &mut stream_rng(seed, STREAM_ROUTE, strategy), &cfg.route);
    let mut outcome_rng = stream_rng(seed, STREAM_OUTCOME, strategy);
    let execution = execute(&tour, &plans, cfg.home, strategy, &cfg.timing, &cfg.outcome, scene, &mut outcome_rng)?;

    for t in &execution.traces {
        if t.completely_removed() {
            if let Some(d) = decisions.iter_mut().find(|d| d.id == t.cluster_id) {
                d.completely_removed = true;
            }
        }
    }

    let mut summary = summarize_traces(strategy, &execution.traces);
    summary.detected = decisions.len() as u64;
    summary.rejected_automatic = decisions.iter().filter(|d| d.status == FilterStatus::RejectedAutomatic).count() as u64;
    summary.rejected_policy = decisions.iter().filter(|d| d.status == FilterStatus::RejectedPolicy).count() as u64;

    check_invariants(&tour, &plans, &execution, &summary)?;
    Ok(StrategyRun { strategy, decisions, tour, execution, summary })
}

fn check_invariants(tour: &Tour, plans: &[ClusterPlan], execution: &ExecutionRun, summary: &StrategySummary) -> Result<(), PipelineError> {
    let mut ids: Vec<ClusterId> = tour.order.clone();
    ids.sort_unstable();
    let mut want: Vec<ClusterId> = plans.iter().map(|p| p.pose.id).collect();
    want.sort_unstable();
    if ids != want {
        return Err(PipelineError::Invariant("tour is not a permutation of the accepted clusters"));
    }
    let states: Vec<_> = execution.timeline.iter().map(|s| s.0).collect();
    if !is_legal_sequence(&states) {
        return Err(PipelineError::Invariant("illegal state sequence"));
    }
    if execution.traces.iter().any(|t| (t.phases.total() - t.duration()).abs() > 1e-9) {
        return Err(PipelineError::Invariant("phase durations do not sum to trace duration"));
    }
    if tour.cost > tour.initial_cost + 1e-9 {
        return Err(PipelineError::Invariant("local search increased tour cost"));
    }
    summary.check_consistency().map_err(PipelineError::Invariant)
}

/// One scene, one seed, every requested strategy; a pure function of its inputs.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioRun, PipelineError> {
    cfg.validate()?;
    let scene = generate_scene(&cfg.scene, &cfg.camera, seed).map_err(in_section("scene"))?;
    let perceived = perceive(cfg, &scene);
    let runs = cfg
        .strategy
        .strategies()
        .iter()
        .map(|s| run_strategy(cfg, seed, &scene, &perceived, *s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioRun { seed, scene, perceived, runs })
}

/// Convenience wrapper for a single strategy.
pub fn run_pipeline(cfg: &ScenarioConfig, seed: u64, strategy: Strategy) -> Result<StrategyRun, PipelineError> {
    let single = ScenarioConfig {
        strategy: match strategy {
            Strategy::Boundary => StrategyChoice::Boundary,
            Strategy::Center => StrategyChoice::Center,
        },
        ..cfg.clone()
    };
    let mut run = run_scenario(&single, seed)?;
    Ok(run.runs.remove(0))
}

/// IK verdict lookup by cluster, for reporting.
pub fn ik_of(run: &StrategyRun, id: ClusterId) -> Option<IkVerdict> {
    run.decisions.iter().find(|d| d.id == id).and_then(|d| d.ik)
}
