//! P1 finite elements on curved triangulations: reference basis, spaces,
//! assembly of the Poisson system, and Dirichlet elimination.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::linalg::{cg_solve, SolveStats, SparseSym};
use crate::mesh::Triangulation;
use crate::quadrature::triangle_rule;
use rayon::prelude::*;

/// Linear basis on the reference triangle with vertices (0,0), (1,0), (0,1).
pub struct ReferenceBasisP1;

impl ReferenceBasisP1 {
    pub fn values(xhat: Point2) -> [f64; 3] {
        [1.0 - xhat.x - xhat.y, xhat.x, xhat.y]
    }

    pub const fn gradients() -> [Point2; 3] {
        [
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]
    }
}

/// Reference Lagrange nodes of degree `k`, `1 <= k <= 10`: the lattice
/// `(i/k, j/k)` with `i + j <= k`, vertices first is not guaranteed; the
/// order is row-major in `j`.
pub fn lagrange_nodes(k: u32) -> Result<Vec<Point2>> {
    if !(1..=10).contains(&k) {
        return Err(Error::UnsupportedDegree { degree: k });
    }
    let mut nodes = Vec::with_capacity(((k + 1) * (k + 2) / 2) as usize);
    for j in 0..=k {
        for i in 0..=(k - j) {
            nodes.push(Point2::new(i as f64 / k as f64, j as f64 / k as f64));
        }
    }
    Ok(nodes)
}

/// A P1 Lagrange space on a curved triangulation. The degrees of freedom are
/// the mesh vertices; boundary DOFs are the vertices on the unit circle.
pub struct FeSpace<'a> {
    pub mesh: &'a Triangulation,
    pub degree: u32,
    pub boundary_dofs: Vec<usize>,
}

impl<'a> FeSpace<'a> {
    pub fn new(mesh: &'a Triangulation, degree: u32) -> Result<Self> {
        if degree != 1 {
            return Err(Error::UnsupportedDegree { degree });
        }
        if mesh.elements.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let boundary_dofs: Vec<usize> = (0..mesh.vertices.len())
            .filter(|&v| (mesh.vertices[v].norm() - 1.0).abs() <= 1e-12)
            .collect();
        Ok(FeSpace {
            mesh,
            degree,
            boundary_dofs,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.mesh.vertices.len()
    }

    /// Nodal interpolation: the vertex values of `f`.
    pub fn interpolate(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        self.mesh.vertices.iter().map(|&p| f(p)).collect()
    }
}

/// The assembled linear system.
#[derive(Debug, Clone)]
pub struct FeSystem {
    pub matrix: SparseSym,
    pub rhs: Vec<f64>,
}

struct LocalSystem {
    ids: [usize; 3],
    a: [[f64; 3]; 3],
    b: [f64; 3],
}

/// Assembles stiffness matrix and load vector for `-Δu = f` with the given
/// quadrature degree. Element contributions are computed in parallel and
/// merged in element order, so the result is deterministic.
pub fn assemble<F>(space: &FeSpace, f: F, quad_degree: u32) -> Result<FeSystem>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let rule = triangle_rule(quad_degree)?;
    let grads = ReferenceBasisP1::gradients();

    let locals: Vec<LocalSystem> = space
        .mesh
        .elements
        .par_iter()
        .enumerate()
        .map(|(e, el)| {
            let map = el.map();
            let mut a = [[0.0; 3]; 3];
            let mut b = [0.0; 3];
            for (&xhat, &w) in rule.points.iter().zip(&rule.weights) {
                let jac = map.jacobian_f(xhat).map_err(|err| match err {
                    Error::NonpositiveJacobian { det, .. } => Error::NonpositiveJacobian {
                        det,
                        element: Some(e),
                    },
                    other => other,
                })?;
                let det = jac.det();
                let omega = w * det.abs();
                let jinv_t = jac.inverse().transpose();
                let g = [
                    jinv_t.mul_vec(grads[0]),
                    jinv_t.mul_vec(grads[1]),
                    jinv_t.mul_vec(grads[2]),
                ];
                let phi = ReferenceBasisP1::values(xhat);
                let fx = f(map.eval_f(xhat));
                for i in 0..3 {
                    b[i] += omega * fx * phi[i];
                    for j in 0..3 {
                        a[i][j] += omega * g[i].dot(g[j]);
                    }
                }
            }
            Ok(LocalSystem {
                ids: el.core.ids,
                a,
                b,
            })
        })
        .collect::<Result<_>>()?;

    let n = space.ndofs();
    let mut triplets = Vec::with_capacity(9 * locals.len());
    let mut rhs = vec![0.0; n];
    for loc in &locals {
        for i in 0..3 {
            rhs[loc.ids[i]] += loc.b[i];
            for j in 0..3 {
                triplets.push((loc.ids[i], loc.ids[j], loc.a[i][j]));
            }
        }
    }
    Ok(FeSystem {
        matrix: SparseSym::from_triplets(n, &triplets),
        rhs,
    })
}

/// Imposes homogeneous Dirichlet values at `dofs` by symmetric elimination:
/// rows and columns zeroed, unit diagonal, zero load.
pub fn apply_dirichlet(system: &mut FeSystem, dofs: &[usize]) {
    let n = system.matrix.n;
    let mut fixed = vec![false; n];
    for &d in dofs {
        fixed[d] = true;
    }
    let m = &mut system.matrix;
    for i in 0..n {
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            let j = m.col_idx[k];
            if fixed[i] || fixed[j] {
                m.values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
        if fixed[i] {
            system.rhs[i] = 0.0;
        }
    }
}

/// Assembles and solves the homogeneous Dirichlet Poisson problem.
pub fn solve_poisson<F>(
    space: &FeSpace,
    f: F,
    quad_degree: u32,
    tol: f64,
) -> Result<(Vec<f64>, SolveStats)>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let mut system = assemble(space, f, quad_degree)?;
    apply_dirichlet(&mut system, &space.boundary_dofs);
    cg_solve(&system.matrix, &system.rhs, tol, 10 * space.ndofs())
}
