//! Property-based invariants and cross-checks against dense linear algebra.

use curvedfem::fem::{apply_dirichlet, assemble, FeSpace};
use curvedfem::geometry::{
    build_affine_factorization, AffineMap, Blend, CurvedCorrection, ElementMap, Mat2, Point2,
};
use curvedfem::linalg::{cg_solve, SparseSym};
use curvedfem::mesh::{disk_mesh, GeoVariant};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

proptest! {
    #[test]
    fn affine_factorization_invariants(
        x1 in coord(), y1 in coord(),
        x2 in coord(), y2 in coord(),
        x3 in coord(), y3 in coord(),
    ) {
        let p = [Point2::new(x1, y1), Point2::new(x2, y2), Point2::new(x3, y3)];
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
        let max_edge = (p[0] - p[1]).norm().max((p[1] - p[2]).norm()).max((p[2] - p[0]).norm());
        prop_assume!(area > 1e-3 * max_edge * max_edge);

        let (f, m) = build_affine_factorization(p[0], p[1], p[2]).unwrap();
        // Factor shape: s^2 + t^2 = 1, t > 0, ordered side lengths.
        prop_assert!((f.s * f.s + f.t * f.t - 1.0).abs() < 1e-12);
        prop_assert!(f.t > 0.0);
        prop_assert!(f.h2 <= f.h1 + 1e-12 * max_edge);
        // Longest-edge condition: h_T/2 <= h1 <= h_T.
        let p2 = m.apply(Point2::new(1.0, 0.0));
        let p3 = m.apply(Point2::new(0.0, 1.0));
        let ht = (p2 - p3).norm();
        prop_assert!(f.h1 <= ht + 1e-12 * max_edge);
        prop_assert!(f.h1 >= 0.5 * ht - 1e-12 * max_edge);
        // Recomposition A = A_T * Atilde * Ahat.
        let ahat = Mat2::new(f.h1, 0.0, 0.0, f.h2);
        let atilde = Mat2::new(1.0, f.s, 0.0, f.t);
        let rot = Mat2::new(f.theta.cos(), -f.theta.sin(), f.theta.sin(), f.theta.cos());
        let at = if f.mirror { rot.mul_mat(Mat2::new(1.0, 0.0, 0.0, -1.0)) } else { rot };
        let rec = at.mul_mat(atilde).mul_mat(ahat);
        let diff = rec.add_mat(Mat2::new(-m.a.a11, -m.a.a12, -m.a.a21, -m.a.a22)).max_abs();
        prop_assert!(diff < 1e-9 * max_edge.max(1.0));
        // The map hits the (relabeled) vertices.
        let images = [m.apply(Point2::new(0.0, 0.0)), p2, p3];
        for img in images {
            prop_assert!(p.iter().any(|&q| (q - img).norm() < 1e-9 * max_edge.max(1.0)));
        }
    }

    #[test]
    fn curved_map_round_trip(u in 0.02..0.9f64, v in 0.02..0.9f64) {
        prop_assume!(u + v < 0.95);
        let blend = Blend::new(
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0),
            0.0,
            std::f64::consts::FRAC_PI_2,
        );
        let corr = CurvedCorrection::ArcBlend(blend);
        let map = ElementMap::new(
            AffineMap { a: Mat2::identity(), b: Point2::new(0.0, 0.0) },
            &corr,
        );
        let xhat = Point2::new(u, v);
        let back = map.eval_g(map.eval_f(xhat)).unwrap();
        prop_assert!((back - xhat).norm() < 1e-9);
    }

    #[test]
    fn matvec_is_symmetric(seed in 0u64..1000) {
        // Random symmetric 6x6 matrix from the seed.
        let n = 6;
        let mut triplets = Vec::new();
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for i in 0..n {
            for j in i..n {
                let v = next();
                triplets.push((i, j, v));
                if i != j {
                    triplets.push((j, i, v));
                }
            }
        }
        let a = SparseSym::from_triplets(n, &triplets);
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let ax = a.matvec(&x).unwrap();
        let ay = a.matvec(&y).unwrap();
        let xtay: f64 = x.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let ytax: f64 = y.iter().zip(&ax).map(|(a, b)| a * b).sum();
        prop_assert!((xtay - ytax).abs() < 1e-10 * (1.0 + xtay.abs()));
    }
}

/// Dense Gaussian elimination with partial pivoting, for cross-checking.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

#[test]
fn cg_matches_dense_solve_on_assembled_system() {
    let tri = disk_mesh(0, GeoVariant::ExactArc).unwrap();
    let space = FeSpace::new(&tri, 1).unwrap();
    let mut sys = assemble(&space, |_| 4.0, 8).unwrap();
    apply_dirichlet(&mut sys, &space.boundary_dofs);
    let n = space.ndofs();
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in sys.matrix.row_ptr[i]..sys.matrix.row_ptr[i + 1] {
            dense[i][sys.matrix.col_idx[k]] = sys.matrix.values[k];
        }
    }
    let reference = dense_solve(dense, sys.rhs.clone());
    let (x, _) = cg_solve(&sys.matrix, &sys.rhs, 1e-13, 10 * n).unwrap();
    for i in 0..n {
        assert!(
            (x[i] - reference[i]).abs() < 1e-9,
            "dof {i}: cg {} vs dense {}",
            x[i],
            reference[i]
        );
    }
}

#[test]
fn solution_is_rotation_invariant() {
    // Solving on a rigidly rotated mesh gives the rotated solution.
    use curvedfem::fem::solve_poisson;
    let tri = disk_mesh(1, GeoVariant::ExactArc).unwrap();
    let rot = tri.rotate(0.37).unwrap();
    let s1 = FeSpace::new(&tri, 1).unwrap();
    let s2 = FeSpace::new(&rot, 1).unwrap();
    let (u1, _) = solve_poisson(&s1, |_| 4.0, 8, 1e-13).unwrap();
    let (u2, _) = solve_poisson(&s2, |_| 4.0, 8, 1e-13).unwrap();
    // Vertex ids are preserved by rotation, so values correspond directly.
    for (a, b) in u1.iter().zip(&u2) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn galerkin_residual_vanishes() {
    use curvedfem::fem::solve_poisson;
    let tri = disk_mesh(1, GeoVariant::ExactArc).unwrap();
    let space = FeSpace::new(&tri, 1).unwrap();
    let mut sys = assemble(&space, |_| 4.0, 8).unwrap();
    apply_dirichlet(&mut sys, &space.boundary_dofs);
    let (u, stats) = solve_poisson(&space, |_| 4.0, 8, 1e-13).unwrap();
    assert!(stats.final_residual <= 1e-13);
    let au = sys.matrix.matvec(&u).unwrap();
    let b_norm: f64 = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let res: f64 = au
        .iter()
        .zip(&sys.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(res <= 1e-12 * b_norm);
}
