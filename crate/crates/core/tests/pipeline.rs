use std::collections::BTreeSet;

use blossom_core::perception::FilterStatus;
use blossom_core::pipeline::{run_scenario, ScenarioConfig};
use blossom_core::replay::summarize_log;
use blossom_core::route::Strategy;
use blossom_core::scene::ClusterId;

fn policy_rejected(run: &blossom_core::pipeline::StrategyRun) -> BTreeSet<ClusterId> {
    run.decisions.iter().filter(|d| d.status == FilterStatus::RejectedPolicy).map(|d| d.id).collect()
}

#[test]
fn boundary_policy_rejections_contain_center_on_shared_scenes() {
    let cfg = ScenarioConfig::default();
    for seed in 0..10 {
        let run = run_scenario(&cfg, seed).unwrap();
        let [b, c] = [&run.runs[0], &run.runs[1]];
        assert_eq!((b.strategy, c.strategy), (Strategy::Boundary, Strategy::Center));
        assert!(policy_rejected(b).is_superset(&policy_rejected(c)), "seed {seed}");
    }
}

#[test]
fn decision_records_replay_to_the_same_funnel() {
    let cfg = ScenarioConfig::default();
    for seed in 0..5 {
        let run = run_scenario(&cfg, seed).unwrap();
        let records: Vec<_> = run.runs.iter().flat_map(|r| r.decisions.iter().copied()).collect();
        let replayed = summarize_log(&records).unwrap();
        for (live, again) in run.runs.iter().map(|r| &r.summary).zip(replayed.iter()) {
            assert_eq!(live.detected, again.detected);
            assert_eq!(live.accepted, again.accepted);
            assert_eq!(live.rejected_automatic, again.rejected_automatic);
            assert_eq!(live.rejected_policy, again.rejected_policy);
            assert_eq!((live.ik_success, live.no_ik, live.non_optimal_ik), (again.ik_success, again.no_ik, again.non_optimal_ik));
            assert_eq!(live.clusters_thinned, again.clusters_thinned);
            assert_eq!(live.clusters_completely_removed, again.clusters_completely_removed);
        }
    }
}

#[test]
fn every_foreground_cluster_is_decided_once() {
    let cfg = ScenarioConfig::default();
    let run = run_scenario(&cfg, 42).unwrap();
    for r in &run.runs {
        let ids: BTreeSet<ClusterId> = r.decisions.iter().map(|d| d.id).collect();
        assert_eq!(ids.len(), r.decisions.len());
        let seen: BTreeSet<ClusterId> = run.perceived.iter().map(|p| p.id).collect();
        assert_eq!(ids, seen);
    }
}

#[test]
fn strategy_runs_share_perception() {
    let cfg = ScenarioConfig::default();
    let run = run_scenario(&cfg, 9).unwrap();
    let auto = |r: &blossom_core::pipeline::StrategyRun| -> BTreeSet<ClusterId> {
        r.decisions.iter().filter(|d| d.status == FilterStatus::RejectedAutomatic).map(|d| d.id).collect()
    };
    assert_eq!(auto(&run.runs[0]), auto(&run.runs[1]));
}
