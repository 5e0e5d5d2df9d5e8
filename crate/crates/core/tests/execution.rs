mod common;

use blossom_core::exec::{execute, is_legal_sequence, summarize_traces, OutcomeMode, OutcomeModel, State, TimingModel};
use blossom_core::geometry::{CameraModel, Point3};
use blossom_core::route::{plan_route, IkVerdict, RouteOptions, Strategy};
use blossom_core::scene::{generate_scene, SceneConfig};
use common::plans_from_scene;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn traces_follow_grammar_and_conserve_time(
        seed in any::<u64>(),
        clusters in 0u32..12,
        boundary in any::<bool>(),
        geometric in any::<bool>(),
        speed in 0.05..1.0f64,
        abort_prob in 0.0..1.0f64,
    ) {
        let scene_cfg = SceneConfig { cluster_count: clusters, ..SceneConfig::default() };
        let scene = generate_scene(&scene_cfg, &CameraModel::default(), seed).unwrap();
        let strategy = if boundary { Strategy::Boundary } else { Strategy::Center };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let verdicts: Vec<IkVerdict> = (0..scene.clusters.len())
            .map(|_| if rng.random::<f64>() < abort_prob { IkVerdict::NoIk } else { IkVerdict::Success })
            .collect();
        let plans = plans_from_scene(&scene, strategy, |i| verdicts[i]);
        let targets: Vec<_> = plans.iter().map(|p| (p.pose.id, p.pose.position)).collect();
        let home = Point3::ORIGIN;
        let tour = plan_route(&targets, &home, &mut rng, &RouteOptions::default());
        let timing = TimingModel { travel_speed_mps: speed, ..TimingModel::default() };
        let outcome = OutcomeModel { mode: if geometric { OutcomeMode::Geometric } else { OutcomeMode::Categorical }, ..OutcomeModel::default() };
        let run = execute(&tour, &plans, home, strategy, &timing, &outcome, &scene, &mut rng).unwrap();

        let states: Vec<State> = run.timeline.iter().map(|s| s.0).collect();
        prop_assert!(is_legal_sequence(&states));
        prop_assert!(run.timeline.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert_eq!(run.traces.len(), tour.order.len());
        let mut clock = 0.0;
        for t in &run.traces {
            prop_assert!((t.phases.total() - t.duration()).abs() <= 1e-9);
            prop_assert!((t.enter_time - clock).abs() <= 1e-9);
            clock = t.exit_time;
            if t.aborted {
                prop_assert!(t.states.is_empty() && t.flower_outcomes.is_empty());
            } else {
                let s: Vec<State> = t.states.iter().map(|s| s.0).collect();
                prop_assert_eq!(s, vec![State::Approach, State::Thin, State::Retract]);
                let cluster = scene.cluster(t.cluster_id).unwrap();
                prop_assert_eq!(t.flower_outcomes.len(), cluster.flowers.len());
                if strategy == Strategy::Center {
                    prop_assert_eq!(t.phases.thin, timing.center_thin_s);
                }
            }
        }
        let summary = summarize_traces(strategy, &run.traces);
        prop_assert!(summary.check_consistency().is_ok());
        let thinned = run.traces.iter().filter(|t| !t.aborted).count() as u64;
        prop_assert_eq!(summary.clusters_thinned, thinned);
        if thinned > 0 {
            let mean = summary.mean_cycle_s().unwrap();
            let phase_sum = summary.mean_phases().unwrap().total();
            prop_assert!((mean - phase_sum).abs() < 1e-9);
        }
    }
}

#[test]
fn geometric_boundary_removes_at_least_as_much_as_center() {
    let mut more = 0;
    for seed in 0..30 {
        let scene = generate_scene(&SceneConfig::default(), &CameraModel::default(), seed).unwrap();
        let outcome = OutcomeModel { mode: OutcomeMode::Geometric, ..OutcomeModel::default() };
        let mut thinned = [0usize; 2];
        for (k, strategy) in Strategy::ALL.iter().enumerate() {
            let plans = plans_from_scene(&scene, *strategy, |_| IkVerdict::Success);
            let targets: Vec<_> = plans.iter().map(|p| (p.pose.id, p.pose.position)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tour = plan_route(&targets, &Point3::ORIGIN, &mut rng, &RouteOptions::default());
            let run = execute(&tour, &plans, Point3::ORIGIN, *strategy, &TimingModel::default(), &outcome, &scene, &mut rng).unwrap();
            let s = summarize_traces(*strategy, &run.traces);
            thinned[k] = (s.flower_total() - s.flowers[3]) as usize;
        }
        assert!(thinned[0] >= thinned[1], "seed {seed}: {thinned:?}");
        more += (thinned[0] > thinned[1]) as usize;
    }
    assert!(more > 0);
}
