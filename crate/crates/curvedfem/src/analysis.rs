//! Error measures and convergence experiments for the Poisson problem
//! `-Δu = 4` on the unit disk with `u = 1 - |x|^2`.

use crate::error::{Error, Result};
use crate::fem::{solve_poisson, FeSpace, ReferenceBasisP1};
use crate::geometry::{Mat2, Point2};
use crate::mesh::{disk_mesh, GeoVariant, Triangulation};
use crate::quadrature::triangle_rule;

/// Manufactured solution of the disk experiment.
pub fn exact_u(p: Point2) -> f64 {
    1.0 - p.dot(p)
}

pub fn exact_grad_u(p: Point2) -> Point2 {
    p * -2.0
}

/// Geometric approximation errors of a disk mesh.
#[derive(Debug, Clone, Copy)]
pub struct GeometricErrors {
    /// `|pi - area(mesh)|`.
    pub e_area: f64,
    /// Largest radial deviation of the discrete boundary from the circle.
    pub e_bdry: f64,
}

/// Measures area and boundary errors; each boundary edge is sampled at
/// `bdry_samples + 1` uniform parameter values (endpoints included).
///
/// The area of the discrete domain is a boundary quantity: Green's theorem
/// turns it into `1/2 ∮ (x dy - y dx)` over the counterclockwise chain of
/// curved boundary edge images, integrated edge by edge with Gauss rules.
pub fn geometric_errors(tri: &Triangulation, bdry_samples: usize) -> Result<GeometricErrors> {
    if tri.elements.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let (gl_nodes, gl_weights) = crate::quadrature::gauss_legendre_16();
    let mut area2 = 0.0;
    for be in &tri.boundary_edges {
        let el = &tri.elements[be.elem];
        let a = tri.vertices[be.a];
        let b = tri.vertices[be.b];
        for (&s, &w) in gl_nodes.iter().zip(&gl_weights) {
            let y = a + (b - a) * s;
            let c = el.correction.eval(y);
            let cp = el.correction.jacobian(y).mul_vec(b - a);
            area2 += w * c.cross(cp);
        }
    }
    let area = 0.5 * area2;
    let mut e_bdry: f64 = 0.0;
    for be in &tri.boundary_edges {
        let el = &tri.elements[be.elem];
        let a = tri.vertices[be.a];
        let b = tri.vertices[be.b];
        for k in 0..=bdry_samples {
            let s = k as f64 / bdry_samples as f64;
            let x = el.correction.eval(a + (b - a) * s);
            e_bdry = e_bdry.max((x.norm() - 1.0).abs());
        }
    }
    Ok(GeometricErrors {
        e_area: (std::f64::consts::PI - area).abs(),
        e_bdry,
    })
}

/// Relative errors of a discrete solution against the manufactured solution.
#[derive(Debug, Clone, Copy)]
pub struct FemErrors {
    /// `|u - u_h|_{H1} / |u|_{H1}` with `|u|_{H1} = sqrt(2 pi)`.
    pub e_h1: f64,
    /// `‖u - u_h‖_{L2} / ‖u‖_{L2}` with `‖u‖_{L2} = sqrt(pi / 3)`.
    pub e_l2: f64,
}

pub fn fem_errors(tri: &Triangulation, uh: &[f64], quad_degree: u32) -> Result<FemErrors> {
    if uh.len() != tri.vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: tri.vertices.len(),
            got: uh.len(),
        });
    }
    let rule = triangle_rule(quad_degree)?;
    let grads = ReferenceBasisP1::gradients();
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for (e, el) in tri.elements.iter().enumerate() {
        let map = el.map();
        let vals = [uh[el.core.ids[0]], uh[el.core.ids[1]], uh[el.core.ids[2]]];
        for (&xhat, &w) in rule.points.iter().zip(&rule.weights) {
            let jac = map.jacobian_f(xhat).map_err(|err| match err {
                Error::NonpositiveJacobian { det, .. } => Error::NonpositiveJacobian {
                    det,
                    element: Some(e),
                },
                other => other,
            })?;
            let omega = w * jac.det().abs();
            let jinv_t = jac.inverse().transpose();
            let x = map.eval_f(xhat);
            let phi = ReferenceBasisP1::values(xhat);
            let mut uh_val = 0.0;
            let mut uh_grad = Point2::default();
            for i in 0..3 {
                uh_val += vals[i] * phi[i];
                uh_grad = uh_grad + jinv_t.mul_vec(grads[i]) * vals[i];
            }
            let de = exact_u(x) - uh_val;
            let dg = exact_grad_u(x) - uh_grad;
            l2_sq += omega * de * de;
            h1_sq += omega * dg.dot(dg);
        }
    }
    let pi = std::f64::consts::PI;
    Ok(FemErrors {
        e_h1: h1_sq.sqrt() / (2.0 * pi).sqrt(),
        e_l2: l2_sq.sqrt() / (pi / 3.0).sqrt(),
    })
}

/// Observed convergence rate between a coarse and a fine result.
pub fn rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && h_coarse > 0.0 && h_fine > 0.0 && h_coarse > h_fine) {
        return Err(Error::InvalidRateInput);
    }
    Ok((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
}

/// Per-element sides of the interpolation estimates.
#[derive(Debug, Clone, Copy)]
pub struct ElementBound {
    pub lhs_l2: f64,
    pub rhs_l2: f64,
    pub lhs_h1: f64,
    pub rhs_h1: f64,
}

#[derive(Debug, Clone)]
pub struct BoundCheckReport {
    pub elements: Vec<ElementBound>,
    pub max_ratio_l2: f64,
    pub max_ratio_h1: f64,
}

fn ratio_of(lhs: f64, rhs: f64, element: usize) -> Result<f64> {
    if rhs == 0.0 {
        if lhs > 1e-12 {
            return Err(Error::DegenerateRhs { element });
        }
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Checks the anisotropic interpolation estimates element by element:
///
/// * L2: `‖v - Iv‖ <= C Σ_{ij} h_i h_j (‖D²v[τ_i, τ_j]‖ + ‖∇v · b_ij‖)`,
/// * H1: `|v - Iv|_{H1} <= C Σ_i h_i |τ_i · ∇v|_{H1}`,
///
/// with the transported directions `τ_i = DPsi r_i` and curvature fields
/// `b_ij = D²Psi[r_i, r_j]`. The gradient of the scalar field `τ_i · ∇v`
/// is taken by central differences with step `1e-5 h_T`.
pub fn interpolation_bound_check(
    tri: &Triangulation,
    v: &(dyn Fn(Point2) -> f64 + Sync),
    grad_v: &(dyn Fn(Point2) -> Point2 + Sync),
    hess_v: &(dyn Fn(Point2) -> Mat2 + Sync),
    quad_degree: u32,
) -> Result<BoundCheckReport> {
    if tri.elements.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let rule = triangle_rule(quad_degree)?;
    let grads = ReferenceBasisP1::gradients();
    let mut elements = Vec::with_capacity(tri.elements.len());
    let mut max_ratio_l2: f64 = 0.0;
    let mut max_ratio_h1: f64 = 0.0;

    for (e, el) in tri.elements.iter().enumerate() {
        let map = el.map();
        let r = [el.core.r1(), el.core.r2()];
        let h = [el.core.fact.h1, el.core.fact.h2];
        let step = 1e-5 * el.core.h_t;
        let vals = [
            v(tri.vertices[el.core.ids[0]]),
            v(tri.vertices[el.core.ids[1]]),
            v(tri.vertices[el.core.ids[2]]),
        ];

        // transported field tau_i at an arbitrary physical point
        let tau_at = |ri: Point2, x: Point2| -> Result<Point2> {
            let y = el.correction.inverse(x)?;
            Ok(el.correction.jacobian(y).mul_vec(ri))
        };

        let mut lhs_l2_sq = 0.0;
        let mut lhs_h1_sq = 0.0;
        let mut term_d2 = [[0.0f64; 2]; 2];
        let mut term_curv = [[0.0f64; 2]; 2];
        let mut grad_g_sq = [0.0f64; 2];

        for (&xhat, &w) in rule.points.iter().zip(&rule.weights) {
            let jac = map.jacobian_f(xhat).map_err(|err| match err {
                Error::NonpositiveJacobian { det, .. } => Error::NonpositiveJacobian {
                    det,
                    element: Some(e),
                },
                other => other,
            })?;
            let omega = w * jac.det().abs();
            let jinv_t = jac.inverse().transpose();
            let y = el.core.map.apply(xhat);
            let x = el.correction.eval(y);
            let jpsi = el.correction.jacobian(y);
            let hpsi = el.correction.hessian(y);

            let phi = ReferenceBasisP1::values(xhat);
            let mut iv = 0.0;
            let mut iv_grad = Point2::default();
            for i in 0..3 {
                iv += vals[i] * phi[i];
                iv_grad = iv_grad + jinv_t.mul_vec(grads[i]) * vals[i];
            }
            let de = v(x) - iv;
            let dg = grad_v(x) - iv_grad;
            lhs_l2_sq += omega * de * de;
            lhs_h1_sq += omega * dg.dot(dg);

            let gv = grad_v(x);
            let hv = hess_v(x);
            let tau = [jpsi.mul_vec(r[0]), jpsi.mul_vec(r[1])];
            for i in 0..2 {
                for j in 0..2 {
                    let d2 = tau[i].dot(hv.mul_vec(tau[j]));
                    let curv = gv.dot(hpsi.contract(r[i], r[j]));
                    term_d2[i][j] += omega * d2 * d2;
                    term_curv[i][j] += omega * curv * curv;
                }
            }

            // central differences of g_i(x) = tau_i(x) · grad v(x)
            for i in 0..2 {
                let mut grad_g = Point2::default();
                for m in 0..2 {
                    let dm = if m == 0 {
                        Point2::new(step, 0.0)
                    } else {
                        Point2::new(0.0, step)
                    };
                    let gp = tau_at(r[i], x + dm)?.dot(grad_v(x + dm));
                    let gm = tau_at(r[i], x - dm)?.dot(grad_v(x - dm));
                    let d = (gp - gm) / (2.0 * step);
                    if m == 0 {
                        grad_g.x = d;
                    } else {
                        grad_g.y = d;
                    }
                }
                grad_g_sq[i] += omega * grad_g.dot(grad_g);
            }
        }

        let mut rhs_l2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                rhs_l2 += h[i] * h[j] * (term_d2[i][j].sqrt() + term_curv[i][j].sqrt());
            }
        }
        let rhs_h1 = h[0] * grad_g_sq[0].sqrt() + h[1] * grad_g_sq[1].sqrt();
        let eb = ElementBound {
            lhs_l2: lhs_l2_sq.sqrt(),
            rhs_l2,
            lhs_h1: lhs_h1_sq.sqrt(),
            rhs_h1,
        };
        max_ratio_l2 = max_ratio_l2.max(ratio_of(eb.lhs_l2, eb.rhs_l2, e)?);
        max_ratio_h1 = max_ratio_h1.max(ratio_of(eb.lhs_h1, eb.rhs_h1, e)?);
        elements.push(eb);
    }

    Ok(BoundCheckReport {
        elements,
        max_ratio_l2,
        max_ratio_h1,
    })
}

/// Straight-triangle H1 estimate with the regularity factor `H_T / h_T`:
/// returns `(|v - Iv|_{H1}, (H_T / h_T) Σ_i h_i |r_i · ∇v|_{H1})` on the
/// triangle `p`, with the field seminorm from the analytic Hessian.
pub fn affine_core_h1_check(
    p: [Point2; 3],
    v: &dyn Fn(Point2) -> f64,
    grad_v: &dyn Fn(Point2) -> Point2,
    hess_v: &dyn Fn(Point2) -> Mat2,
    quad_degree: u32,
) -> Result<(f64, f64)> {
    use crate::mesh::AffineCore;
    let core = AffineCore::from_points([0, 1, 2], p)?;
    let rule = triangle_rule(quad_degree)?;
    let grads = ReferenceBasisP1::gradients();
    let r = [core.r1(), core.r2()];
    let h = [core.fact.h1, core.fact.h2];
    let perm_pts = [
        core.map.apply(Point2::new(0.0, 0.0)),
        core.map.apply(Point2::new(1.0, 0.0)),
        core.map.apply(Point2::new(0.0, 1.0)),
    ];
    let vals = [v(perm_pts[0]), v(perm_pts[1]), v(perm_pts[2])];
    let jinv_t = core.map.a.inverse().transpose();
    let det = core.map.a.det().abs();

    let mut lhs_sq = 0.0;
    let mut g_sq = [0.0f64; 2];
    for (&xhat, &w) in rule.points.iter().zip(&rule.weights) {
        let omega = w * det;
        let x = core.map.apply(xhat);
        let mut iv_grad = Point2::default();
        for i in 0..3 {
            iv_grad = iv_grad + jinv_t.mul_vec(grads[i]) * vals[i];
        }
        let dg = grad_v(x) - iv_grad;
        lhs_sq += omega * dg.dot(dg);
        let hv = hess_v(x);
        for i in 0..2 {
            let grad_g = hv.mul_vec(r[i]);
            g_sq[i] += omega * grad_g.dot(grad_g);
        }
    }
    let factor = core.big_h_t() / core.h_t;
    let rhs = factor * (h[0] * g_sq[0].sqrt() + h[1] * g_sq[1].sqrt());
    Ok((lhs_sq.sqrt(), rhs))
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub level: u32,
    pub h: f64,
    pub e_area: f64,
    pub e_bdry: f64,
    pub e_h1: f64,
    pub rate_h1: Option<f64>,
    pub e_l2: f64,
    pub rate_l2: Option<f64>,
}

/// Runs the disk experiment over levels `0..=max_level`: mesh, solve, and
/// error measurement per level, with rates against the previous level.
pub fn convergence_study(
    geo: GeoVariant,
    max_level: u32,
    quad_degree: u32,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for level in 0..=max_level {
        let tri = disk_mesh(level, geo)?;
        let space = FeSpace::new(&tri, 1)?;
        let (uh, _) = solve_poisson(&space, |_| 4.0, quad_degree, 1e-12)?;
        let ge = geometric_errors(&tri, 64)?;
        let fe = fem_errors(&tri, &uh, quad_degree)?;
        let (rate_h1, rate_l2) = match rows.last() {
            Some(prev) => (
                rate(prev.e_h1, fe.e_h1, prev.h, tri.h).ok(),
                rate(prev.e_l2, fe.e_l2, prev.h, tri.h).ok(),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            level,
            h: tri.h,
            e_area: ge.e_area,
            e_bdry: ge.e_bdry,
            e_h1: fe.e_h1,
            rate_h1,
            e_l2: fe.e_l2,
            rate_l2,
        });
    }
    Ok(rows)
}
