//! TOML scenario files.

use std::path::Path;

use blossom_core::pipeline::ScenarioConfig;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// `line` is 1-based when known.
    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid { path: String, line: Option<usize>, message: String },
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Invalid { line, .. } => *line,
            LoadError::Io { .. } => None,
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn section_line(text: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}]");
    text.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

/// Parses and validates; `origin` only labels error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig, LoadError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| LoadError::Invalid {
        path: origin.to_string(),
        line: e.span().map(|s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate().map_err(|e| LoadError::Invalid {
        path: origin.to_string(),
        line: e.section.and_then(|s| section_line(text, s)),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_config(&text, &path.display().to_string())
}

pub fn to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string_pretty(cfg).expect("config values are representable in TOML")
}

/// `(section, key, comment)`; section `""` is the top level.
const DOCS: &[(&str, &str, &str)] = &[
    ("", "seed", "base RNG seed; replicate i uses seed + i"),
    ("", "replicates", "independent scenes per run"),
    ("", "strategy", "boundary | center | both (both shares each scene between strategies)"),
    ("", "approach_offset", "approach and retract distance along the cluster normal, m"),
    ("home", "x", "end-effector rest position, world frame, m"),
    ("scene", "cluster_count", "foreground clusters per scene"),
    ("scene", "flowers_per_cluster", "inclusive [min, max]"),
    ("scene", "cluster_radius", "inclusive [min, max], m"),
    ("scene", "normal_jitter_deg", "max tilt of a cluster normal away from the canopy normal"),
    ("scene", "canopy_tilt_deg", "canopy angle from horizontal"),
    ("scene", "canopy_standoff", "camera to canopy distance at each imaging stop, m"),
    ("scene", "wire_spacing", "vertical spacing along the canopy between trellis wires, m"),
    ("scene", "target_wires", "wires (1 = bottom) whose branches are thinned; one imaging stop each"),
    ("scene", "wire_offset", "[min, max] distance of a cluster above or below its wire, m"),
    ("scene", "row_half_width", "clusters span x in [-w, w], m"),
    ("scene", "trunk_offsets", "x position of each trunk, m"),
    ("scene", "post_offsets", "x position of each post, m"),
    ("scene", "background_cluster_count", "adjacent-row clusters seen through the canopy"),
    ("scene", "background_depth", "their depth from the camera, m"),
    ("scene", "mask_vertices", "vertices per rendered mask polygon"),
    ("scene", "mask_jitter", "relative radial jitter of mask vertices, [0, 1)"),
    ("scene", "invalid_depth_fraction", "per-pixel probability of a missing depth reading"),
    ("scene", "depth_dropout_prob", "per-cluster probability of losing all depth"),
    ("camera", "width", "image size and intrinsics, pixels (69 x 42 degree field of view)"),
    ("camera", "min_depth", "valid sensor range, m"),
    ("camera.viewpoint", "x", "overwritten per imaging stop"),
    ("perception", "max_depth", "clusters with mean depth beyond this are rejected, m"),
    ("perception", "sample_stride", "interior sampling grid stride, pixels"),
    ("pose", "radius", "neighborhood radius, m"),
    ("pose", "neighbor_cap", "max neighbors per neighborhood"),
    ("pose", "seed_stride", "use every n-th point as a neighborhood seed"),
    ("safety", "trunk_clearance", "min distance to trunk and post surfaces, m"),
    ("safety", "wire_clearance", "min distance to trellis wires, m"),
    ("safety", "check_boundary_vertices", "also screen hull vertices under the boundary strategy"),
    ("kinematics", "reach", "max distance from the base to any waypoint, m"),
    ("kinematics", "min_reach", "min distance from the base to any waypoint, m"),
    ("kinematics", "max_approach_angle", "cone half-angle about the base-to-target direction, radians"),
    ("kinematics", "nonoptimal_ik_prob", "chance a reachable cluster still gets an unusable plan"),
    ("kinematics.base", "x", "robot base position, world frame, m"),
    ("route", "neighborhood", "swap | two_opt"),
    ("route", "first_improvement", "take the first improving move instead of the best"),
    ("route", "max_iters", "local search iteration cap"),
    ("timing", "segmentation_s", "per-cluster fixed costs, s"),
    ("timing", "motion_plan_per_waypoint_s", "extra planning time per boundary sweep waypoint, s"),
    ("timing", "travel_speed_mps", "end-effector speed for approach, retract and transfers"),
    ("timing", "center_thin_s", "center thinning actuation time, s"),
    ("timing", "sweep_speed_mps", "boundary sweep speed"),
    ("outcome", "mode", "categorical | geometric"),
    ("outcome", "boundary", "[completely removed, petal+anther removed, petal removed, saved]"),
    ("outcome", "center", "same order; each vector sums to 1"),
    ("outcome", "core_radius", "geometric mode distance bands, m"),
];

/// The default configuration with every documented key commented.
pub fn default_config_commented() -> String {
    let body = to_toml(&ScenarioConfig::default());
    let mut out = String::from("# blossom scenario configuration. Unknown keys are rejected.\n\n");
    let mut section = String::new();
    for line in body.lines() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = name.to_string();
        } else if let Some((key, _)) = t.split_once(" = ") {
            if let Some((_, _, doc)) = DOCS.iter().find(|(s, k, _)| *s == section && *k == key) {
                out.push_str("# ");
                out.push_str(doc);
                out.push('\n');
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}
