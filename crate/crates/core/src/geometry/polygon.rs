use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Image-plane point in pixels (`u` right, `v` down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// z-component of `(a - o) x (b - o)`; positive for a counterclockwise turn in (u, v).
pub fn cross(o: &Pixel, a: &Pixel, b: &Pixel) -> f64 {
    (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u)
}

/// Closed polygon in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Pixel>", into = "Vec<Pixel>")]
pub struct Polygon2 {
    vertices: Vec<Pixel>,
}

impl Polygon2 {
    /// At least three vertices, none repeated back to back (including the closing edge).
    pub fn new(vertices: Vec<Pixel>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateInput("polygon needs at least 3 vertices"));
        }
        if vertices.iter().any(|p| !p.u.is_finite() || !p.v.is_finite()) {
            return Err(GeometryError::DegenerateInput("non-finite polygon vertex"));
        }
        let n = vertices.len();
        if (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(GeometryError::DegenerateInput("repeated consecutive vertex"));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Pixel] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Twice the signed area; positive when counterclockwise in (u, v).
    pub fn signed_area2(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a.u * b.v - b.u * a.v
            })
            .sum()
    }

    pub fn centroid(&self) -> Pixel {
        let n = self.vertices.len() as f64;
        let (su, sv) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(su, sv), p| (su + p.u, sv + p.v));
        Pixel::new(su / n, sv / n)
    }

    /// Even-odd point-in-polygon test; works for non-convex outlines.
    pub fn contains(&self, p: &Pixel) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.v > p.v) != (b.v > p.v) {
                let t = (p.v - a.v) / (b.v - a.v);
                if p.u < a.u + t * (b.u - a.u) {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Axis-aligned bounds `(min_u, min_v, max_u, max_v)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.u), b.min(p.v), c.max(p.u), d.max(p.v)),
        )
    }
}

impl TryFrom<Vec<Pixel>> for Polygon2 {
    type Error = GeometryError;
    fn try_from(v: Vec<Pixel>) -> Result<Self, Self::Error> {
        Polygon2::new(v)
    }
}

impl From<Polygon2> for Vec<Pixel> {
    fn from(p: Polygon2) -> Vec<Pixel> {
        p.vertices
    }
}

/// Convex hull by Andrew's monotone chain, O(N log N).
///
/// Vertices come back counterclockwise in (u, v) starting from the lowest `(u, v)`
/// point. Points lying on a hull edge are dropped, so the result is strictly convex.
/// Because `v` points down, counterclockwise in (u, v) reads clockwise on screen.
pub fn convex_hull(points: &[Pixel]) -> Result<Polygon2, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput("hull needs at least 3 points"));
    }
    if points.iter().any(|p| !p.u.is_finite() || !p.v.is_finite()) {
        return Err(GeometryError::DegenerateInput("non-finite hull input"));
    }
    let mut pts: Vec<Pixel> = points.to_vec();
    pts.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput("fewer than 3 distinct points"));
    }

    let mut hull: Vec<Pixel> = Vec::with_capacity(pts.len() + 1);
    // lower chain
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    // upper chain
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(GeometryError::DegenerateInput("all points collinear"));
    }
    Polygon2::new(hull)
}
