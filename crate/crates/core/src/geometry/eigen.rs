use serde::{Deserialize, Serialize};

use super::Point3;

/// Symmetric 3x3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl SymMat3 {
    pub const ZERO: SymMat3 = SymMat3 { xx: 0.0, xy: 0.0, xz: 0.0, yy: 0.0, yz: 0.0, zz: 0.0 };

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3 { xx: a, xy: 0.0, xz: 0.0, yy: b, yz: 0.0, zz: c }
    }

    pub const fn identity() -> Self {
        Self::diag(1.0, 1.0, 1.0)
    }

    /// `v * v^T`
    pub fn outer(v: &Point3) -> Self {
        SymMat3 {
            xx: v.x * v.x,
            xy: v.x * v.y,
            xz: v.x * v.z,
            yy: v.y * v.y,
            yz: v.y * v.z,
            zz: v.z * v.z,
        }
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn mul_vec(&self, v: &Point3) -> Point3 {
        Point3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    pub fn add(&self, o: &SymMat3) -> SymMat3 {
        SymMat3 {
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yy: self.yy + o.yy,
            yz: self.yz + o.yz,
            zz: self.zz + o.zz,
        }
    }

    pub fn scale(&self, s: f64) -> SymMat3 {
        SymMat3 {
            xx: self.xx * s,
            xy: self.xy * s,
            xz: self.xz * s,
            yy: self.yy * s,
            yz: self.yz * s,
            zz: self.zz * s,
        }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn det(&self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz) - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    pub fn is_finite(&self) -> bool {
        self.to_rows().iter().flatten().all(|v| v.is_finite())
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [Point3; 3],
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix.
///
/// Each eigenvector is sign-normalized so that its first component with magnitude
/// above 1e-12 is positive. Repeated eigenvalues yield some orthonormal basis of the
/// eigenspace.
pub fn eigen_sym3(c: &SymMat3) -> SymEigen {
    let mut a = c.to_rows();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    let scale = a.iter().flatten().fold(0.0_f64, |m, x| m.max(libm::fabs(*x)));
    if scale > 0.0 && scale.is_finite() {
        for _sweep in 0..64 {
            let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
            if off <= (f64::EPSILON * scale) * (f64::EPSILON * scale) * 1e-6 {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let cs = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * cs;
                // A <- J^T A J
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut values = [0.0; 3];
    let mut vectors = [Point3::ORIGIN; 3];
    for (slot, &col) in order.iter().enumerate() {
        values[slot] = a[col][col];
        let mut e = Point3::new(v[0][col], v[1][col], v[2][col]);
        e = e / e.norm();
        let lead = e.to_array().into_iter().find(|c| libm::fabs(*c) > 1e-12).unwrap_or(1.0);
        if lead < 0.0 {
            e = -e;
        }
        vectors[slot] = e;
    }
    SymEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(c: &SymMat3) {
        let e = eigen_sym3(c);
        let tol = 1e-8 * e.values[2].abs().max(1.0);
        assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
        for j in 0..3 {
            let lhs = c.mul_vec(&e.vectors[j]);
            let rhs = e.vectors[j] * e.values[j];
            assert!((lhs - rhs).norm() < tol, "residual {}", (lhs - rhs).norm());
            for k in 0..3 {
                let d = e.vectors[j].dot(&e.vectors[k]);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let e = eigen_sym3(&SymMat3::diag(3.0, 1.0, 2.0));
        assert_eq!(e.values, [1.0, 2.0, 3.0]);
        assert_eq!(e.vectors[0], Point3::new(0.0, 1.0, 0.0));
        assert_eq!(e.vectors[2], Point3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn identity_any_basis() {
        let e = eigen_sym3(&SymMat3::identity());
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
        check_decomposition(&SymMat3::identity());
    }

    #[test]
    fn zero_matrix() {
        let e = eigen_sym3(&SymMat3::ZERO);
        assert_eq!(e.values, [0.0; 3]);
        check_decomposition(&SymMat3::ZERO);
    }

    #[test]
    fn dense_matrices() {
        check_decomposition(&SymMat3 { xx: 4.0, xy: 1.0, xz: -2.0, yy: 2.0, yz: 0.5, zz: 3.0 });
        check_decomposition(&SymMat3 { xx: 1e-6, xy: 2e-7, xz: 0.0, yy: 1e-6, yz: 3e-7, zz: 1e-12 });
        check_decomposition(&SymMat3 { xx: 2.0, xy: 1.0, xz: 1.0, yy: 2.0, yz: 1.0, zz: 2.0 });
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let c = SymMat3 { xx: 4.0, xy: 1.0, xz: -2.0, yy: 2.0, yz: 0.5, zz: 3.0 };
        let e = eigen_sym3(&c);
        for v in e.vectors {
            let lead = v.to_array().into_iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(lead > 0.0);
        }
    }
}
