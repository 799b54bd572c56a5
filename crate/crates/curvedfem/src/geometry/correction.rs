//! Curved corrections `Psi` deforming a straight affine core onto a physical
//! curved element.
//!
//! The one-curved-edge blend: with barycentric coordinates
//! `(la, lb, lc)` of `y` in the core triangle `(a, b, c)` and
//! `s = lb / (la + lb)`,
//!
//! ```text
//! Psi(y) = y + (la + lb) * (gamma(s) - ell(s)),    ell(s) = (1-s) a + s b,
//! ```
//!
//! where `gamma` is either the exact circular arc through `a`, `b` or its
//! degree-q Lagrange interpolant in the angle parameter. The blend is exact
//! on the curved edge, the identity on the two straight edges, and fixes the
//! apex `c`.

use super::{Mat2, Point2, Tensor222};
use crate::error::{Error, Result};

const NEWTON_MAX_ITERS: usize = 50;

/// Shared data of the edge blends: the core triangle `(a, b, c)` with curved
/// edge `(a, b)` and the arc angles of the edge endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Blend {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
    pub theta_a: f64,
    pub theta_b: f64,
    /// Constant barycentric gradients of `la`, `lb` and the largest edge
    /// length of the core (the tolerance/step scale).
    grad_la: Point2,
    grad_lb: Point2,
    scale: f64,
}

impl Blend {
    pub fn new(a: Point2, b: Point2, c: Point2, theta_a: f64, theta_b: f64) -> Self {
        let m = Mat2::from_columns(a - c, b - c).inverse();
        let scale = (a - b).norm().max((b - c).norm()).max((c - a).norm());
        Blend {
            a,
            b,
            c,
            theta_a,
            theta_b,
            grad_la: Point2::new(m.a11, m.a12),
            grad_lb: Point2::new(m.a21, m.a22),
            scale,
        }
    }

    fn barycentric_ab(&self, y: Point2) -> (f64, f64) {
        let d = y - self.c;
        (self.grad_la.dot(d), self.grad_lb.dot(d))
    }

    fn chord(&self, s: f64) -> Point2 {
        self.a + (self.b - self.a) * s
    }
}

/// The curved correction `Psi` of an element.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvedCorrection {
    /// `Psi = id`; used for all interior (straight) elements.
    Identity,
    /// Blend onto the exact circular arc of the unit circle.
    ArcBlend(Blend),
    /// Blend onto the degree-`q` Lagrange interpolant of the arc, `q` in {2, 3}.
    PolyEdgeBlend(Blend, u8),
}

impl CurvedCorrection {
    pub fn is_identity(&self) -> bool {
        matches!(self, CurvedCorrection::Identity)
    }

    fn blend(&self) -> Option<(&Blend, Option<u8>)> {
        match self {
            CurvedCorrection::Identity => None,
            CurvedCorrection::ArcBlend(b) => Some((b, None)),
            CurvedCorrection::PolyEdgeBlend(b, q) => Some((b, Some(*q))),
        }
    }

    /// Edge curve value and derivative at parameter `s`.
    fn curve(&self, s: f64) -> (Point2, Point2) {
        let (blend, order) = self.blend().expect("identity has no edge curve");
        match order {
            None => {
                let dphi = blend.theta_b - blend.theta_a;
                let phi = blend.theta_a + s * dphi;
                (
                    Point2::new(phi.cos(), phi.sin()),
                    Point2::new(-phi.sin() * dphi, phi.cos() * dphi),
                )
            }
            Some(q) => {
                let q = q as usize;
                let mut val = Point2::default();
                let mut der = Point2::default();
                for i in 0..=q {
                    let ti = i as f64 / q as f64;
                    let phi = blend.theta_a + ti * (blend.theta_b - blend.theta_a);
                    let node = Point2::new(phi.cos(), phi.sin());
                    let (li, dli) = lagrange_basis_1d(q, i, s);
                    val = val + node * li;
                    der = der + node * dli;
                }
                (val, der)
            }
        }
    }

    /// `Psi(y)`.
    pub fn eval(&self, y: Point2) -> Point2 {
        let Some((blend, _)) = self.blend() else {
            return y;
        };
        let (la, lb) = blend.barycentric_ab(y);
        let mu = la + lb;
        if mu.abs() <= 1e-14 {
            // Continuity limit at the apex; the blend factor vanishes there.
            return y;
        }
        let s = lb / mu;
        let (gamma, _) = self.curve(s);
        y + (gamma - blend.chord(s)) * mu
    }

    /// Analytic Jacobian `DPsi(y)`.
    pub fn jacobian(&self, y: Point2) -> Mat2 {
        let Some((blend, _)) = self.blend() else {
            return Mat2::identity();
        };
        let (la, lb) = blend.barycentric_ab(y);
        let mu = la + lb;
        if mu.abs() <= 1e-14 {
            return Mat2::identity();
        }
        let s = lb / mu;
        let (gamma, dgamma) = self.curve(s);
        let d = gamma - blend.chord(s);
        let dd = dgamma - (blend.b - blend.a);
        let grad_mu = blend.grad_la + blend.grad_lb;
        // mu * grad(s) = grad(lb) - s * grad(mu)
        let mu_grad_s = blend.grad_lb - grad_mu * s;
        Mat2::identity()
            .add_mat(Mat2::outer(d, grad_mu))
            .add_mat(Mat2::outer(dd, mu_grad_s))
    }

    /// Second derivative `D^2 Psi(y)`, by central differences of the analytic
    /// Jacobian with step `1e-5 * h`; symmetric in the last two indices by
    /// construction.
    pub fn hessian(&self, y: Point2) -> Tensor222 {
        let Some((blend, _)) = self.blend() else {
            return Tensor222::zero();
        };
        let step = 1e-5 * blend.scale;
        let mut raw = [[[0.0; 2]; 2]; 2];
        for j in 0..2 {
            let e = if j == 0 {
                Point2::new(step, 0.0)
            } else {
                Point2::new(0.0, step)
            };
            let jp = self.jacobian(y + e);
            let jm = self.jacobian(y - e);
            let diff = [
                [
                    (jp.a11 - jm.a11) / (2.0 * step),
                    (jp.a12 - jm.a12) / (2.0 * step),
                ],
                [
                    (jp.a21 - jm.a21) / (2.0 * step),
                    (jp.a22 - jm.a22) / (2.0 * step),
                ],
            ];
            for i in 0..2 {
                for k in 0..2 {
                    raw[i][j][k] = diff[i][k];
                }
            }
        }
        let mut t = Tensor222::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    t.0[i][j][k] = 0.5 * (raw[i][j][k] + raw[i][k][j]);
                }
            }
        }
        t
    }

    /// `Psi^{-1}(x)` by damped Newton iteration seeded at `y = x`.
    pub fn inverse(&self, x: Point2) -> Result<Point2> {
        let Some((blend, _)) = self.blend() else {
            return Ok(x);
        };
        let tol = 1e-12 * blend.scale;
        let mut y = x;
        let mut res = self.eval(y) - x;
        let mut res_norm = res.norm();
        for _ in 0..NEWTON_MAX_ITERS {
            if res_norm <= tol {
                return Ok(y);
            }
            let step = self.jacobian(y).inverse().mul_vec(res);
            let mut alpha = 1.0;
            loop {
                let y_new = y - step * alpha;
                let res_new = self.eval(y_new) - x;
                let n = res_new.norm();
                if n < res_norm || alpha < 1.0 / 1024.0 {
                    y = y_new;
                    res = res_new;
                    res_norm = n;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if res_norm <= tol {
            Ok(y)
        } else {
            Err(Error::NewtonDivergence { residual: res_norm })
        }
    }

    /// Step/tolerance scale of the correction (largest core edge), 0 for identity.
    pub fn scale(&self) -> f64 {
        self.blend().map_or(0.0, |(b, _)| b.scale)
    }
}

/// Value and derivative of the 1D Lagrange basis `L_i` on the equally spaced
/// nodes `0, 1/q, ..., 1`.
fn lagrange_basis_1d(q: usize, i: usize, s: f64) -> (f64, f64) {
    let node = |j: usize| j as f64 / q as f64;
    let ti = node(i);
    let mut denom = 1.0;
    for j in 0..=q {
        if j != i {
            denom *= ti - node(j);
        }
    }
    let mut val = 1.0;
    for j in 0..=q {
        if j != i {
            val *= s - node(j);
        }
    }
    let mut der = 0.0;
    for k in 0..=q {
        if k == i {
            continue;
        }
        let mut prod = 1.0;
        for j in 0..=q {
            if j != i && j != k {
                prod *= s - node(j);
            }
        }
        der += prod;
    }
    (val / denom, der / denom)
}
