mod common;

use blossom_core::geometry::{Point3, UnitVec3};
use blossom_core::perception::FilterStatus;
use blossom_core::pose::ClusterPose;
use blossom_core::route::{
    check_ik, compute_waypoints, plan_route, safety_filter, IkVerdict, KinematicModel, Neighborhood, RouteOptions,
    SafetyPolicy, Strategy, Waypoint, WaypointSet,
};
use blossom_core::scene::{ClusterId, Obstacle, ObstacleKind};
use common::{closed_cost, is_swap_local_optimal, optimal_closed_cost};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_targets(rng: &mut ChaCha8Rng, n: usize) -> Vec<(ClusterId, Point3)> {
    (0..n)
        .map(|i| (ClusterId(i as u32), Point3::new(rng.random_range(-0.4..0.4), rng.random_range(-0.3..0.5), rng.random_range(0.5..0.8))))
        .collect()
}

fn ordered(targets: &[(ClusterId, Point3)], order: &[ClusterId]) -> Vec<Point3> {
    order.iter().map(|id| targets.iter().find(|t| t.0 == *id).unwrap().1).collect()
}

#[test]
fn seven_clusters_reach_swap_local_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let start = Point3::ORIGIN;
    for _ in 0..20 {
        let targets = random_targets(&mut rng, 7);
        let tour = plan_route(&targets, &start, &mut rng, &RouteOptions::default());
        let pts = ordered(&targets, &tour.order);
        assert!(tour.converged);
        assert!((closed_cost(&start, &pts) - tour.cost).abs() < 1e-12);
        assert!(tour.cost <= tour.initial_cost);
        assert!(is_swap_local_optimal(&start, &pts, 1e-12));
        assert!(tour.cost >= optimal_closed_cost(&start, &pts) - 1e-12);
    }
}

#[test]
fn every_neighborhood_and_move_rule_improves_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let start = Point3::new(0.0, 0.1, 0.0);
    for neighborhood in [Neighborhood::Swap, Neighborhood::TwoOpt] {
        for first_improvement in [false, true] {
            let options = RouteOptions { neighborhood, first_improvement, max_iters: 10_000 };
            for _ in 0..30 {
                let n = rng.random_range(0..9);
                let targets = random_targets(&mut rng, n);
                let tour = plan_route(&targets, &start, &mut rng, &options);
                let mut ids = tour.order.clone();
                ids.sort();
                assert_eq!(ids, targets.iter().map(|t| t.0).collect::<Vec<_>>());
                assert!(tour.cost <= tour.initial_cost + 1e-12);
                assert!(tour.converged);
                if neighborhood == Neighborhood::Swap {
                    assert!(is_swap_local_optimal(&start, &ordered(&targets, &tour.order), 1e-12));
                }
            }
        }
    }
}

fn unit(v: Point3) -> UnitVec3 {
    UnitVec3::new_normalize(v).unwrap()
}

fn waypoints_through(p: Point3, n: UnitVec3) -> WaypointSet {
    let w = |position| Waypoint { position, orientation: n };
    WaypointSet { approach: w(p + n.as_vec() * 0.1), thin_start: w(p), thin_path: Vec::new(), retract: w(p + n.as_vec() * 0.1) }
}

proptest! {
    #[test]
    fn beyond_reach_is_never_solvable(
        dx in -1.0..1.0f64, dy in -1.0..1.0f64, dz in -1.0..1.0f64,
        extra in 0.0001..1.0f64,
        which in 0usize..3,
        nonoptimal in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let kin = KinematicModel { nonoptimal_ik_prob: nonoptimal, ..KinematicModel::default() };
        let Some(dir) = UnitVec3::new_normalize(Point3::new(dx, dy, dz)) else { return Ok(()) };
        let far = kin.base + dir.as_vec() * (kin.reach + extra);
        let near = kin.base + Point3::new(0.0, 0.0, 0.5);
        let n = unit(kin.base - near);
        let mut wps = waypoints_through(near, n);
        match which {
            0 => wps.approach.position = far,
            1 => wps.thin_start.position = far,
            _ => wps.thin_path.push(far),
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(check_ik(&wps, &kin, &mut rng), IkVerdict::NoIk);
    }

    #[test]
    fn boundary_rejections_contain_center_rejections(
        cx in -0.3..0.3f64, cy in -0.3..0.3f64,
        radius in 0.02..0.09f64,
        wire_y in -0.3..0.3f64,
        trunk_x in -0.3..0.3f64,
    ) {
        let pose = ClusterPose { id: ClusterId(1), position: Point3::new(cx, cy, 0.7), normal: unit(Point3::new(0.0, 0.0, -1.0)), sub_normal_count: 1, fallback: false };
        let hull: Vec<Point3> = (0..8)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 8.0;
                Point3::new(cx + radius * t.cos(), cy + radius * t.sin(), 0.7)
            })
            .collect();
        let obstacles = [
            Obstacle { kind: ObstacleKind::TrellisWire, start: Point3::new(-2.0, wire_y, 0.7), end: Point3::new(2.0, wire_y, 0.7), radius: 0.002 },
            Obstacle { kind: ObstacleKind::Trunk, start: Point3::new(trunk_x, -2.0, 0.75), end: Point3::new(trunk_x, 2.0, 0.75), radius: 0.03 },
        ];
        let policy = SafetyPolicy::default();
        let center = safety_filter(&pose, &hull, &obstacles, &policy, Strategy::Center);
        let boundary = safety_filter(&pose, &hull, &obstacles, &policy, Strategy::Boundary);
        if center.status == FilterStatus::RejectedPolicy {
            prop_assert_eq!(boundary.status, FilterStatus::RejectedPolicy);
        }
    }

    #[test]
    fn boundary_sweep_is_closed_hull_perimeter(radius in 0.02..0.09f64, k in 3usize..16, tilt in -0.5..0.5f64) {
        let n = unit(Point3::new(tilt, 0.0, -1.0));
        let (e1, e2) = common::plane_basis([n.x(), n.y(), n.z()]);
        let c = Point3::new(0.0, 0.1, 0.6);
        let hull: Vec<Point3> = (0..k)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / k as f64;
                c + Point3::from(e1) * (radius * t.cos()) + Point3::from(e2) * (radius * t.sin())
            })
            .collect();
        let pose = ClusterPose { id: ClusterId(0), position: c, normal: n, sub_normal_count: 1, fallback: false };
        let wps = compute_waypoints(&pose, &hull, Strategy::Boundary, 0.1).unwrap();
        let perimeter = 2.0 * k as f64 * radius * (std::f64::consts::PI / k as f64).sin();
        prop_assert!((wps.sweep_length() - perimeter).abs() < 1e-12);
        prop_assert_eq!(wps.thin_path.len(), k - 1);
        prop_assert!(wps.approach.position.distance(&(c + n.as_vec() * 0.1)) < 1e-12);
    }
}
