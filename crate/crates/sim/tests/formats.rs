use std::path::Path;

use blossom_core::geometry::CameraModel;
use blossom_core::perception::FilterStatus;
use blossom_core::pipeline::{run_scenario, ScenarioConfig, StrategyChoice};
use blossom_core::route::{Neighborhood, Strategy};
use blossom_core::scene::{generate_scene, render_observations, ObservationSource, SceneConfig};
use blossom_sim::annotation::{parse_annotations, write_annotations, AnnotationError, AnnotationSet};
use blossom_sim::config::{default_config_commented, load_config, parse_config, to_toml, LoadError};
use blossom_sim::decision_log::{load_log, parse_log, write_log, LogError};
use proptest::prelude::*;

const TWO: &str = "\
# two clusters
image 1280 720
cluster 3
v 600 300 0.7
v 640 290 0.71
v 650 330 nan
end

cluster 9
v 100 100 0.9
v 120 100 0.9
v 110 120 0
end
";

#[test]
fn two_polygons_two_observations() {
    let set = parse_annotations(TWO).unwrap();
    assert_eq!((set.width, set.height), (1280, 720));
    assert_eq!(set.observations.len(), 2);
    assert_eq!(set.observations[0].id.0, 3);
    assert_eq!(set.observations[1].mask.len(), 3);
    assert!(set.observations[0].vertex_depth[2].is_nan());
    assert!(set.observations.iter().all(|o| o.source == ObservationSource::Annotated));
}

#[test]
fn empty_file_has_no_observations() {
    assert!(parse_annotations("").unwrap().observations.is_empty());
    assert!(parse_annotations("image 640 480\n").unwrap().observations.is_empty());
}

#[test]
fn malformed_vertex_names_its_record() {
    let text = TWO.replace("v 120 100 0.9", "v 120 oops 0.9");
    match parse_annotations(&text) {
        Err(AnnotationError::Parse { line, record, .. }) => assert_eq!((line, record), (11, 1)),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let text = TWO.replace("v 640 290 0.71", "v 640 290");
    assert!(matches!(parse_annotations(&text), Err(AnnotationError::Parse { record: 0, .. })));
}

#[test]
fn vertex_outside_image_is_a_bounds_error() {
    let text = TWO.replace("v 120 100 0.9", "v 1300 100 0.9");
    assert!(matches!(parse_annotations(&text), Err(AnnotationError::Bounds { record: 1, id: 9, .. })));
}

#[test]
fn structural_errors() {
    for bad in [
        "cluster 1\nv 1 1 1\nend\n",
        "image 10 10\nv 1 1 1\n",
        "image 10 10\ncluster 1\nv 1 1 1\nv 2 1 1\nv 1 2 1\n",
        "image 10 10\nend\n",
        "image 10 10\ncluster 1\nv 1 1 1\nv 2 1 1\nv 1 2 1\nend\ncluster 1\nv 1 1 1\nv 2 1 1\nv 1 2 1\nend\n",
        "image 0 10\n",
        "frame 1\n",
    ] {
        assert!(parse_annotations(bad).is_err(), "{bad}");
    }
}

fn same_observations(a: &AnnotationSet, b: &AnnotationSet) -> bool {
    (a.width, a.height) == (b.width, b.height)
        && a.observations.len() == b.observations.len()
        && a.observations.iter().zip(&b.observations).all(|(x, y)| {
            x.id == y.id
                && x.mask == y.mask
                && x.vertex_depth.len() == y.vertex_depth.len()
                && x.vertex_depth.iter().zip(&y.vertex_depth).all(|(p, q)| p.to_bits() == q.to_bits() || (p.is_nan() && q.is_nan()))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rendered_masks_round_trip(seed in any::<u64>(), invalid in 0.0..0.5f64) {
        let cfg = SceneConfig { invalid_depth_fraction: invalid, ..SceneConfig::default() };
        let cam = CameraModel::default();
        let scene = generate_scene(&cfg, &cam, seed).unwrap();
        let cam = cam.with_viewpoint(scene.stops[0]);
        let set = AnnotationSet { width: cam.width, height: cam.height, observations: render_observations(&scene, &cam, &cfg) };
        let back = parse_annotations(&write_annotations(&set)).unwrap();
        prop_assert!(same_observations(&set, &back));
    }
}

#[test]
fn bundled_log_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/field_trial.log");
    let records = load_log(&path).unwrap();
    assert_eq!(records.len(), 415);
    assert_eq!(records.iter().filter(|r| r.strategy == Strategy::Boundary).count(), 239);
    assert_eq!(records.iter().filter(|r| r.completely_removed).count(), 27);
    assert_eq!(parse_log(&write_log(&records)).unwrap(), records);
}

#[test]
fn log_errors_name_the_line() {
    let text = "# header\nboundary 1 accepted - success 0\ncenter 2 accepted - maybe 0\n";
    match parse_log(text) {
        Err(LogError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    for bad in [
        "boundary 1 accepted - success",
        "boundary 1 rejected_policy - - 0",
        "boundary 1 accepted beyond_depth_limit success 0",
        "boundary 1 rejected_automatic beyond_depth_limit - 1",
        "sideways 1 accepted - success 0",
        "center x accepted - success 0",
        "center 1 accepted - success 2",
    ] {
        assert!(parse_log(bad).is_err(), "{bad}");
    }
}

#[test]
fn simulated_decisions_round_trip_through_the_log() {
    let run = run_scenario(&ScenarioConfig::default(), 5).unwrap();
    let records: Vec<_> = run.runs.iter().flat_map(|r| r.decisions.iter().copied()).collect();
    assert!(records.iter().any(|r| r.status == FilterStatus::RejectedPolicy));
    assert_eq!(parse_log(&write_log(&records)).unwrap(), records);
}

#[test]
fn config_round_trip() {
    let mut cfg = ScenarioConfig::default();
    cfg.seed = 7;
    cfg.strategy = StrategyChoice::Center;
    cfg.route.neighborhood = Neighborhood::TwoOpt;
    cfg.scene.post_offsets = vec![-0.5, 0.5];
    cfg.timing.sweep_speed_mps = 0.1;
    let text = to_toml(&cfg);
    let back = parse_config(&text, "mem").unwrap();
    assert_eq!(back, cfg);
    assert_eq!(to_toml(&back), text);
}

#[test]
fn shipped_default_config_matches_the_dump() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), default_config_commented());
    assert_eq!(load_config(&path).unwrap(), ScenarioConfig::default());
}

#[test]
fn partial_config_fills_defaults() {
    let cfg = parse_config("seed = 9\n[scene]\ncluster_count = 3\n", "mem").unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.scene.cluster_count, 3);
    assert_eq!(cfg.timing, ScenarioConfig::default().timing);
}

#[test]
fn config_errors_carry_line_numbers() {
    let err = parse_config("seed = 1\n\n[scene]\nclusters = 3\n", "a.toml").unwrap_err();
    assert!(matches!(err, LoadError::Invalid { .. }));
    assert_eq!(err.line(), Some(4), "{err}");
    assert!(err.to_string().starts_with("a.toml:4:"));

    let err = parse_config("seed = 1\n\n[timing]\nsweep_speed_mps = -1.0\n", "b.toml").unwrap_err();
    assert_eq!(err.line(), Some(3), "{err}");
    assert!(err.to_string().contains("[timing]"));

    let err = parse_config("replicates = 0\n", "c.toml").unwrap_err();
    assert_eq!(err.line(), None);
}
