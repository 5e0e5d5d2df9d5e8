//! Slow reference implementations used as test oracles.
#![allow(dead_code)]

use blossom_core::geometry::{Pixel, Point3};

fn cross(o: &Pixel, a: &Pixel, b: &Pixel) -> f64 {
    (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u)
}

fn between(a: &Pixel, b: &Pixel, p: &Pixel) -> bool {
    p.u >= a.u.min(b.u) && p.u <= a.u.max(b.u) && p.v >= a.v.min(b.v) && p.v <= a.v.max(b.v)
}

/// Strict hull vertices by the all-pairs half-plane test: `(a, b)` is a hull edge
/// when no point lies strictly to its right and every point on its line lies
/// between `a` and `b`. Returned sorted by `(u, v)`, without duplicates.
pub fn brute_hull(points: &[Pixel]) -> Vec<Pixel> {
    let mut out: Vec<Pixel> = Vec::new();
    for a in points {
        for b in points {
            if a == b {
                continue;
            }
            let mut edge = true;
            for p in points {
                let c = cross(a, b, p);
                if c < 0.0 || (c == 0.0 && !between(a, b, p)) {
                    edge = false;
                    break;
                }
            }
            if edge {
                out.push(*a);
                out.push(*b);
            }
        }
    }
    sort_pixels(&mut out);
    out
}

pub fn sort_pixels(v: &mut Vec<Pixel>) {
    v.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    v.dedup();
}

pub fn closed_cost(start: &Point3, pts: &[Point3]) -> f64 {
    let mut total = 0.0;
    let mut prev = *start;
    for p in pts {
        total += ((p.x - prev.x).powi(2) + (p.y - prev.y).powi(2) + (p.z - prev.z).powi(2)).sqrt();
        prev = *p;
    }
    total + ((start.x - prev.x).powi(2) + (start.y - prev.y).powi(2) + (start.z - prev.z).powi(2)).sqrt()
}

fn permute(k: usize, idx: &mut Vec<usize>, start: &Point3, pts: &[Point3], best: &mut f64) {
    if k == idx.len() {
        let ordered: Vec<Point3> = idx.iter().map(|&i| pts[i]).collect();
        *best = best.min(closed_cost(start, &ordered));
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(k + 1, idx, start, pts, best);
        idx.swap(k, i);
    }
}

/// Exhaustive optimum of the closed tour through `start`.
pub fn optimal_closed_cost(start: &Point3, pts: &[Point3]) -> f64 {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut best = f64::INFINITY;
    permute(0, &mut idx, start, pts, &mut best);
    if pts.is_empty() {
        0.0
    } else {
        best
    }
}

/// True when no exchange of two tour positions lowers the cost by more than `eps`.
pub fn is_swap_local_optimal(start: &Point3, ordered: &[Point3], eps: f64) -> bool {
    let base = closed_cost(start, ordered);
    let mut work = ordered.to_vec();
    for i in 0..work.len() {
        for j in i + 1..work.len() {
            work.swap(i, j);
            let c = closed_cost(start, &work);
            work.swap(i, j);
            if c < base - eps {
                return false;
            }
        }
    }
    true
}

pub fn covariance_two_pass(points: &[Point3]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut m = [0.0; 3];
    for p in points {
        m[0] += p.x;
        m[1] += p.y;
        m[2] += p.z;
    }
    let m = m.map(|s| s / n);
    let mut c = [[0.0; 3]; 3];
    for p in points {
        let d = [p.x - m[0], p.y - m[1], p.z - m[2]];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    c.map(|r| r.map(|x| x / n))
}

/// Whole-cloud plane normal by power iteration on `tr(C) I - C`, oriented toward `viewpoint`.
pub fn pca_normal(points: &[Point3], viewpoint: &Point3) -> [f64; 3] {
    let c = covariance_two_pass(points);
    let tr = c[0][0] + c[1][1] + c[2][2];
    let mut v = [0.577, 0.571, 0.583];
    for _ in 0..5000 {
        let mut w = [0.0; 3];
        for i in 0..3 {
            w[i] = tr * v[i] - (c[i][0] * v[0] + c[i][1] * v[1] + c[i][2] * v[2]);
        }
        let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        v = w.map(|x| x / n);
    }
    let m = points.iter().fold([0.0; 3], |a, p| [a[0] + p.x, a[1] + p.y, a[2] + p.z]).map(|s| s / points.len() as f64);
    let to_view = [viewpoint.x - m[0], viewpoint.y - m[1], viewpoint.z - m[2]];
    if v[0] * to_view[0] + v[1] * to_view[1] + v[2] * to_view[2] < 0.0 {
        v = v.map(|x| -x);
    }
    v
}

pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cr = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt().atan2(dot)
}

/// Orthonormal basis `(e1, e2)` of the plane with unit normal `n`.
pub fn plane_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let cr = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let e1 = cr(n, helper);
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = e1.map(|x| x / l);
    (e1, cr(n, e1))
}

/// `count` points uniform on a square of half-width `half` in the plane through
/// `center` with normal `n`, plus isotropic Gaussian noise of std `sigma`.
pub fn plane_cloud<R: rand::Rng>(rng: &mut R, center: Point3, n: [f64; 3], half: f64, count: usize, sigma: f64) -> Vec<Point3> {
    use rand_distr::{Distribution, Normal};
    let (e1, e2) = plane_basis(n);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    (0..count)
        .map(|_| {
            let a = rng.random_range(-half..half);
            let b = rng.random_range(-half..half);
            let mut jitter = || if sigma > 0.0 { noise.sample(rng) } else { 0.0 };
            let (dx, dy, dz) = (jitter(), jitter(), jitter());
            Point3::new(
                center.x + a * e1[0] + b * e2[0] + dx,
                center.y + a * e1[1] + b * e2[1] + dy,
                center.z + a * e1[2] + b * e2[2] + dz,
            )
        })
        .collect()
}

pub fn random_unit<R: rand::Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if l > 0.1 && l <= 1.0 {
            return v.map(|x| x / l);
        }
    }
}

/// Plans for every foreground cluster of `scene`, posed at its true centroid and
/// normal with an octagonal hull of the cluster radius.
pub fn plans_from_scene(
    scene: &blossom_core::scene::Scene,
    strategy: blossom_core::route::Strategy,
    ik: impl Fn(usize) -> blossom_core::route::IkVerdict,
) -> Vec<blossom_core::exec::ClusterPlan> {
    use blossom_core::exec::ClusterPlan;
    use blossom_core::pose::ClusterPose;
    use blossom_core::route::compute_waypoints;
    scene
        .clusters
        .iter()
        .filter(|c| !c.background)
        .enumerate()
        .map(|(i, c)| {
            let n = c.true_normal;
            let (e1, e2) = plane_basis([n.x(), n.y(), n.z()]);
            let hull: Vec<Point3> = (0..8)
                .map(|k| {
                    let t = k as f64 * std::f64::consts::TAU / 8.0;
                    c.centroid + Point3::from(e1) * (c.radius * t.cos()) + Point3::from(e2) * (c.radius * t.sin())
                })
                .collect();
            let pose = ClusterPose { id: c.id, position: c.centroid, normal: n, sub_normal_count: 1, fallback: false };
            let waypoints = compute_waypoints(&pose, &hull, strategy, 0.1).unwrap();
            ClusterPlan { pose, waypoints, ik: ik(i) }
        })
        .collect()
}
