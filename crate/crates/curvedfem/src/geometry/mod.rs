//! Factorized element maps `F = Psi ∘ Phi` for exact curved triangles.
//!
//! `Phi` is the affine map from the reference triangle onto the straight
//! affine core, `Psi` is the curved correction deforming the core onto the
//! physical element. The affine part carries all size and anisotropy
//! information, the correction carries the curvature.

mod correction;
mod element_map;

pub use correction::{Blend, CurvedCorrection};
pub use element_map::{in_reference_triangle, inverse_map_hessian, ElementMap};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, i.e. the signed parallelogram area.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        self.scale(s)
    }
}

/// A 2x2 matrix with entries `a_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Matrix with the given column vectors.
    pub fn from_columns(c1: Point2, c2: Point2) -> Self {
        Mat2::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(self) -> Mat2 {
        let d = self.det();
        Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn mul_vec(self, v: Point2) -> Point2 {
        Point2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    pub fn mul_mat(self, other: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )
    }

    pub fn add_mat(self, other: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )
    }

    /// Outer product `u v^T`.
    pub fn outer(u: Point2, v: Point2) -> Mat2 {
        Mat2::new(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y)
    }

    /// Spectral norm (largest singular value), closed form for 2x2.
    pub fn spectral_norm(self) -> f64 {
        let g = self.transpose().mul_mat(self);
        let tr = g.a11 + g.a22;
        let d = g.det();
        let disc = (tr * tr / 4.0 - d).max(0.0).sqrt();
        (tr / 2.0 + disc).max(0.0).sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }
}

/// Second derivative of a plane map: `m[i][j][k]` is component `i` of the
/// derivative in directions `j`, `k`. Symmetric in `(j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor222(pub [[[f64; 2]; 2]; 2]);

impl Tensor222 {
    pub const fn zero() -> Self {
        Tensor222([[[0.0; 2]; 2]; 2])
    }

    /// Contraction `T[u, v]`, a vector with components sum_{j,k} m[i][j][k] u_j v_k.
    pub fn contract(&self, u: Point2, v: Point2) -> Point2 {
        let uu = [u.x, u.y];
        let vv = [v.x, v.y];
        let mut out = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i] += self.0[i][j][k] * uu[j] * vv[k];
                }
            }
        }
        Point2::new(out[0], out[1])
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    m = m.max(self.0[i][j][k].abs());
                }
            }
        }
        m
    }
}

/// The affine map `Phi(x̂) = A x̂ + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Mat2,
    pub b: Point2,
}

impl AffineMap {
    pub fn apply(&self, xhat: Point2) -> Point2 {
        self.a.mul_vec(xhat) + self.b
    }

    pub fn apply_inverse(&self, y: Point2) -> Point2 {
        self.a.inverse().mul_vec(y - self.b)
    }
}

/// Factorization `A = A_T · Ã · Â` of the composed affine matrix:
/// `Â = diag(h1, h2)`, `Ã = [[1, s], [0, t]]`, `A_T` a rotation by `theta`
/// composed with a reflection when `mirror` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFactorization {
    pub h1: f64,
    pub h2: f64,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    pub mirror: bool,
    pub b_t: Point2,
}

/// Relabels the three vertices so that the edge opposite the first vertex is
/// the longest and `|p1 - p3| <= |p1 - p2|`. Returns the permutation into the
/// input slice. Near-ties are broken by the original index so the labeling is
/// stable under rigid motions of the triangle.
pub fn relabel_condition1(p: [Point2; 3]) -> [usize; 3] {
    let edge_len = |i: usize, j: usize| (p[i] - p[j]).norm();
    // Opposite edge lengths: edge i is the edge not containing vertex i.
    let opp = [edge_len(1, 2), edge_len(0, 2), edge_len(0, 1)];
    let tie = 1e-12 * opp.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut apex = 0;
    for i in 1..3 {
        if opp[i] > opp[apex] + tie {
            apex = i;
        }
    }
    let (q, r) = match apex {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let (lq, lr) = (edge_len(apex, q), edge_len(apex, r));
    // h1 >= h2; break ties toward the lower original index for p2.
    if lq > lr + tie || (lq >= lr - tie && q < r) {
        [apex, q, r]
    } else {
        [apex, r, q]
    }
}

/// Builds the two-step affine factorization and the composed affine map for
/// the triangle with the given vertices. The vertices are relabeled so that
/// the edge `p2–p3` is the longest and `h2 <= h1`; the returned map sends
/// `(0,0) -> p1`, `(1,0) -> p2`, `(0,1) -> p3` in the relabeled order.
pub fn build_affine_factorization(
    p1: Point2,
    p2: Point2,
    p3: Point2,
) -> Result<(AffineFactorization, AffineMap)> {
    let pts = [p1, p2, p3];
    let max_edge = (p1 - p2).norm().max((p2 - p3).norm()).max((p3 - p1).norm());
    let area = 0.5 * (p2 - p1).cross(p3 - p1).abs();
    if area <= 1e-14 * max_edge * max_edge {
        return Err(Error::DegenerateTriangle { area });
    }
    let perm = relabel_condition1(pts);
    let (q1, q2, q3) = (pts[perm[0]], pts[perm[1]], pts[perm[2]]);
    let d2 = q2 - q1;
    let d3 = q3 - q1;
    let h1 = d2.norm();
    let h2 = d3.norm();
    let cross = d2.cross(d3);
    let fact = AffineFactorization {
        h1,
        h2,
        s: d2.dot(d3) / (h1 * h2),
        t: cross.abs() / (h1 * h2),
        theta: d2.y.atan2(d2.x),
        mirror: cross < 0.0,
        b_t: q1,
    };
    let map = AffineMap {
        a: Mat2::from_columns(d2, d3),
        b: q1,
    };
    Ok((fact, map))
}

/// Transported core direction `tau_i(x) = DPsi(Psi^{-1}(x)) r_i`.
pub fn transported_direction(corr: &CurvedCorrection, r: Point2, x: Point2) -> Result<Point2> {
    let y = corr.inverse(x)?;
    Ok(corr.jacobian(y).mul_vec(r))
}

/// Curvature vector field `b_ij(x) = D^2 Psi(Psi^{-1}(x))[r_i, r_j]`.
pub fn curvature_field(
    corr: &CurvedCorrection,
    ri: Point2,
    rj: Point2,
    x: Point2,
) -> Result<Point2> {
    let y = corr.inverse(x)?;
    Ok(corr.hessian(y).contract(ri, rj))
}
