use super::{AffineMap, CurvedCorrection, Mat2, Point2, Tensor222};
use crate::error::{Error, Result};

/// The element map `F = Psi ∘ Phi` from the reference triangle to a physical
/// curved element, together with its inverse `G = Phi^{-1} ∘ Psi^{-1}`.
#[derive(Debug, Clone)]
pub struct ElementMap<'a> {
    pub affine: AffineMap,
    pub correction: &'a CurvedCorrection,
}

impl<'a> ElementMap<'a> {
    pub fn new(affine: AffineMap, correction: &'a CurvedCorrection) -> Self {
        ElementMap { affine, correction }
    }

    /// Size scale of the element (largest affine column norm, ~ h_T).
    pub fn scale(&self) -> f64 {
        let a = &self.affine.a;
        let c1 = Point2::new(a.a11, a.a21).norm();
        let c2 = Point2::new(a.a12, a.a22).norm();
        c1.max(c2)
    }

    /// `F(x̂) = Psi(Phi(x̂))`.
    pub fn eval_f(&self, xhat: Point2) -> Point2 {
        self.correction.eval(self.affine.apply(xhat))
    }

    /// `DF(x̂) = DPsi(Phi(x̂)) · A`. Fails if the correction Jacobian is not
    /// orientation preserving (`det DPsi <= 0`); the affine determinant may
    /// be negative through the mirror factor of `A_T`.
    pub fn jacobian_f(&self, xhat: Point2) -> Result<Mat2> {
        let jpsi = self.correction.jacobian(self.affine.apply(xhat));
        let det = jpsi.det();
        if det <= 0.0 {
            return Err(Error::NonpositiveJacobian { det, element: None });
        }
        Ok(jpsi.mul_mat(self.affine.a))
    }

    /// `D^2 F(x̂)`: the `A`-congruent transform of `D^2 Psi`,
    /// `D^2F_m[j][k] = sum_{r,s} D^2Psi_m[r][s] A_rj A_sk`.
    pub fn hessian_f(&self, xhat: Point2) -> Tensor222 {
        let h = self.correction.hessian(self.affine.apply(xhat));
        let a = [
            [self.affine.a.a11, self.affine.a.a12],
            [self.affine.a.a21, self.affine.a.a22],
        ];
        let mut out = Tensor222::zero();
        for m in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut v = 0.0;
                    for r in 0..2 {
                        for s in 0..2 {
                            v += h.0[m][r][s] * a[r][j] * a[s][k];
                        }
                    }
                    out.0[m][j][k] = v;
                }
            }
        }
        out
    }

    /// `G(x) = Phi^{-1}(Psi^{-1}(x))`.
    pub fn eval_g(&self, x: Point2) -> Result<Point2> {
        let y = self.correction.inverse(x)?;
        Ok(self.affine.apply_inverse(y))
    }

    /// `DG(x) = A^{-1} · DPsi^{-1}(x)`.
    pub fn jacobian_g(&self, x: Point2) -> Result<Mat2> {
        let y = self.correction.inverse(x)?;
        Ok(self
            .affine
            .a
            .inverse()
            .mul_mat(self.correction.jacobian(y).inverse()))
    }

    /// `D^2 G(x) = A^{-1} · D^2(Psi^{-1})(x)`, with the inverse-map Hessian
    /// obtained from `D^2(Psi^{-1})[u, v] = -DPsi^{-1} D^2Psi[DPsi^{-1} u, DPsi^{-1} v]`.
    pub fn hessian_g(&self, x: Point2) -> Result<Tensor222> {
        let y = self.correction.inverse(x)?;
        let hinv = inverse_map_hessian(self.correction.jacobian(y), self.correction.hessian(y));
        let ainv = self.affine.a.inverse();
        let ai = [[ainv.a11, ainv.a12], [ainv.a21, ainv.a22]];
        let mut out = Tensor222::zero();
        for m in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut v = 0.0;
                    for r in 0..2 {
                        v += ai[m][r] * hinv.0[r][j][k];
                    }
                    out.0[m][j][k] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Hessian of `Psi^{-1}` from the Jacobian and Hessian of `Psi` at the same
/// core point.
pub fn inverse_map_hessian(jpsi: Mat2, hpsi: Tensor222) -> Tensor222 {
    let jinv = jpsi.inverse();
    // columns of J^{-1} are DPsi^{-1} e_j
    let ej = [
        Point2::new(jinv.a11, jinv.a21),
        Point2::new(jinv.a12, jinv.a22),
    ];
    let mut out = Tensor222::zero();
    for j in 0..2 {
        for k in 0..2 {
            let v = jinv.mul_vec(hpsi.contract(ej[j], ej[k]));
            out.0[0][j][k] = -v.x;
            out.0[1][j][k] = -v.y;
        }
    }
    out
}

/// True when `xhat` lies in the closed reference triangle up to `tol` in
/// barycentric coordinates.
pub fn in_reference_triangle(xhat: Point2, tol: f64) -> bool {
    xhat.x >= -tol && xhat.y >= -tol && xhat.x + xhat.y <= 1.0 + tol
}
