use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or free vector) in meters.
///
/// Camera frame convention: `+z` along the optical axis, `+x` right, `+y` down.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }

    pub fn distance_squared(&self, other: &Point3) -> f64 {
        (*self - *other).norm_squared()
    }

    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, rhs: Point3) {
        self.x += rhs.x;
        self.y += rhs.y;
        self.z += rhs.z;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Unit-length direction. Construction normalizes, so the norm is 1 up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Point3", into = "Point3")]
pub struct UnitVec3(Point3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Point3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVec3 = UnitVec3(Point3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVec3 = UnitVec3(Point3::new(0.0, 0.0, 1.0));

    /// Normalizes `v`; `None` when `v` is not finite or (nearly) zero.
    pub fn new_normalize(v: Point3) -> Option<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-12 {
            return None;
        }
        Some(UnitVec3(v / n))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vec(&self) -> Point3 {
        self.0
    }

    pub fn dot(&self, v: &Point3) -> f64 {
        self.0.dot(v)
    }

    /// Angle to `other` in radians, in `[0, pi]`.
    pub fn angle_to(&self, other: &UnitVec3) -> f64 {
        // atan2 of |cross| and dot stays accurate near 0 and pi
        let c = self.0.cross(&other.0).norm();
        libm::atan2(c, self.0.dot(&other.0))
    }

    /// Any unit vector perpendicular to `self`.
    pub fn any_orthogonal(&self) -> UnitVec3 {
        let v = self.0;
        let helper = if libm::fabs(v.x) < 0.9 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            Point3::new(0.0, 1.0, 0.0)
        };
        UnitVec3::new_normalize(v.cross(&helper)).expect("helper axis is never parallel")
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl From<UnitVec3> for Point3 {
    fn from(u: UnitVec3) -> Point3 {
        u.0
    }
}

impl TryFrom<Point3> for UnitVec3 {
    type Error = &'static str;
    fn try_from(v: Point3) -> Result<Self, Self::Error> {
        UnitVec3::new_normalize(v).ok_or("zero or non-finite direction")
    }
}

/// Rotation of `v` about unit `axis` by `angle` radians (Rodrigues).
pub fn rotate_about(v: Point3, axis: &UnitVec3, angle: f64) -> Point3 {
    let k = axis.as_vec();
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    v * c + k.cross(&v) * s + k * (k.dot(&v) * (1.0 - c))
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: &Point3, a: &Point3, b: &Point3) -> f64 {
    let ab = *b - *a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((*p - *a).dot(&ab) / len2).clamp(0.0, 1.0);
    p.distance(&(*a + ab * t))
}
