//! Sparse symmetric matrices in CSR form and a Jacobi-preconditioned
//! conjugate gradient solver.

use crate::error::{Error, Result};

/// Symmetric sparse matrix; both triangles are stored so `matvec` is a plain
/// CSR product.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSym {
    /// Builds the matrix from (row, col, value) triplets; duplicates are
    /// summed, columns are sorted within each row.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSym {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        Ok(y)
    }
}

/// Iteration summary of a linear solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual `|r| / |b|`.
    pub final_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients with Jacobi preconditioning. Converges when
/// `|r| <= tol * |b|`; fails with `NotConverged` after `max_iters`
/// iterations or on an indefiniteness breakdown.
pub fn cg_solve(
    a: &SparseSym,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    if b.len() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            got: b.len(),
        });
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; a.n],
            SolveStats {
                iterations: 0,
                final_residual: 0.0,
            },
        ));
    }
    let minv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; a.n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = b_norm;
    for iter in 0..max_iters {
        if res <= tol * b_norm {
            return Ok((
                x,
                SolveStats {
                    iterations: iter,
                    final_residual: res / b_norm,
                },
            ));
        }
        let ap = a.matvec(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotConverged {
                stats: SolveStats {
                    iterations: iter,
                    final_residual: res / b_norm,
                },
            });
        }
        let alpha = rz / pap;
        for i in 0..a.n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        for i in 0..a.n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..a.n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol * b_norm {
        Ok((
            x,
            SolveStats {
                iterations: max_iters,
                final_residual: res / b_norm,
            },
        ))
    } else {
        Err(Error::NotConverged {
            stats: SolveStats {
                iterations: max_iters,
                final_residual: res / b_norm,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseSym {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSym::from_triplets(n, &t)
    }

    #[test]
    fn triplets_dedup_and_sort() {
        let a = SparseSym::from_triplets(
            2,
            &[
                (0, 1, 0.5),
                (0, 0, 1.0),
                (0, 1, 0.5),
                (1, 0, 1.0),
                (1, 1, 2.0),
            ],
        );
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.row_ptr, vec![0, 2, 4]);
        assert_eq!(a.col_idx, vec![0, 1, 0, 1]);
        assert_eq!(a.values, vec![1.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn matvec_dimension_check() {
        let a = tridiag(3);
        assert!(matches!(
            a.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn tridiagonal_solve() {
        // 4x4 second-difference matrix with unit right-hand side:
        // the solution of -u'' = 1 on a 5-interval grid is (2, 3, 3, 2).
        let a = tridiag(4);
        let (x, stats) = cg_solve(&a, &[1.0, 1.0, 1.0, 1.0], 1e-12, 100).unwrap();
        let expected = [2.0, 3.0, 3.0, 2.0];
        for (xi, ei) in x.iter().zip(&expected) {
            assert!((xi - ei).abs() < 1e-10);
        }
        assert!(stats.final_residual <= 1e-12);
        assert!(stats.iterations <= 4 + 1);
    }

    #[test]
    fn residual_verified_against_matvec() {
        let a = tridiag(25);
        let b: Vec<f64> = (0..25).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let (x, _) = cg_solve(&a, &b, 1e-12, 500).unwrap();
        let ax = a.matvec(&x).unwrap();
        let res: f64 = ax
            .iter()
            .zip(&b)
            .map(|(axi, bi)| (axi - bi) * (axi - bi))
            .sum::<f64>()
            .sqrt();
        let b_norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-11 * b_norm);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = SparseSym::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            cg_solve(&a, &[0.0, 1.0], 1e-12, 100),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = tridiag(3);
        let (x, stats) = cg_solve(&a, &[0.0; 3], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn max_iters_exceeded() {
        let a = tridiag(30);
        let b = vec![1.0; 30];
        assert!(matches!(
            cg_solve(&a, &b, 1e-14, 2),
            Err(Error::NotConverged { .. })
        ));
    }
}
