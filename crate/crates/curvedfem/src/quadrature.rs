//! Symmetric quadrature rules on the reference triangle
//! `{(x, y) : x, y >= 0, x + y <= 1}`.
//!
//! All rules have positive weights and points strictly inside the triangle.
//! Weights are absolute (they sum to the reference area 1/2).

use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Polynomial degree integrated exactly.
    pub degree: u32,
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the rule to `f` on the reference triangle.
    pub fn integrate(&self, mut f: impl FnMut(Point2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Rule builder working in barycentric coordinates `(l1, l2, l3)` with the
/// reference vertices `(0,0)`, `(1,0)`, `(0,1)`; a point is `(l2, l3)` and
/// the stored weight is the barycentric weight divided by 2.
struct Orbits {
    points: Vec<Point2>,
    weights: Vec<f64>,
}

impl Orbits {
    fn new() -> Self {
        Orbits {
            points: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn push_bary(&mut self, l: [f64; 3], w: f64) {
        self.points.push(Point2::new(l[1], l[2]));
        self.weights.push(w / 2.0);
    }

    fn centroid(&mut self, w: f64) {
        self.push_bary([1.0 / 3.0; 3], w);
    }

    /// The 3-point orbit of `(1 - 2a, a, a)`.
    fn perm3(&mut self, a: f64, w: f64) {
        let c = 1.0 - 2.0 * a;
        self.push_bary([c, a, a], w);
        self.push_bary([a, c, a], w);
        self.push_bary([a, a, c], w);
    }

    /// The 6-point orbit of `(a, b, 1 - a - b)`.
    fn perm6(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for l in [
            [a, b, c],
            [a, c, b],
            [b, a, c],
            [b, c, a],
            [c, a, b],
            [c, b, a],
        ] {
            self.push_bary(l, w);
        }
    }
}

/// Returns a positive-weight rule exact for polynomials of total degree
/// `degree`, `1 <= degree <= 8`. Requested degrees without a positive
/// symmetric rule of the matching size are served by the next stronger rule.
pub fn triangle_rule(degree: u32) -> Result<QuadRule> {
    let mut o = Orbits::new();
    match degree {
        1 => o.centroid(1.0),
        2 => o.perm3(1.0 / 6.0, 1.0 / 3.0),
        3 | 4 => {
            o.perm3(0.445948490915965, 0.223381589678011);
            o.perm3(0.091576213509771, 0.109951743655322);
        }
        5 => {
            o.centroid(0.225);
            o.perm3(0.470142064105115, 0.132394152788506);
            o.perm3(0.101286507323456, 0.125939180544827);
        }
        6 => {
            o.perm3(0.249286745170910, 0.116786275726379);
            o.perm3(0.063089014491502, 0.050844906370207);
            o.perm6(0.310352451033785, 0.636502499121399, 0.082851075618374);
        }
        7 | 8 => {
            o.centroid(0.1443156076779063);
            o.perm3(0.4592925882928019, 0.0950916342672074);
            o.perm3(0.1705693077518506, 0.1032173705346949);
            o.perm3(0.0505472283170266, 0.0324584976231860);
            o.perm6(0.2631128296343637, 0.7284923929555503, 0.0272303141744714);
        }
        _ => return Err(Error::UnsupportedDegree { degree }),
    }
    Ok(QuadRule {
        degree,
        points: o.points,
        weights: o.weights,
    })
}

/// 16-point Gauss–Legendre rule on `[0, 1]`: `(nodes, weights)`.
pub fn gauss_legendre_16() -> (Vec<f64>, Vec<f64>) {
    let half: [(f64, f64); 8] = [
        (0.095012509837637440185, 0.189450610455068496285),
        (0.281603550779258913230, 0.182603415044923588867),
        (0.458016777657227386342, 0.169156519395002538189),
        (0.617876244402643748447, 0.149595988816576732081),
        (0.755404408355003033895, 0.124628971255533872052),
        (0.865631202387831743880, 0.095158511682492784810),
        (0.944575023073232576078, 0.062253523938647892863),
        (0.989400934991649932596, 0.027152459411754094852),
    ];
    let mut nodes = Vec::with_capacity(16);
    let mut weights = Vec::with_capacity(16);
    for &(x, w) in &half {
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
        nodes.push(0.5 * (1.0 + x));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

/// Exact value of `∫ x^a y^b` over the reference triangle.
pub fn monomial_integral(a: u32, b: u32) -> f64 {
    // a! b! / (a + b + 2)!
    let mut v = 1.0;
    for k in 1..=a {
        v *= k as f64;
    }
    for k in 1..=b {
        v *= k as f64;
    }
    for k in 1..=(a + b + 2) {
        v /= k as f64;
    }
    v
}

/// Largest error of the rule over all monomials of total degree `<= degree`.
pub fn max_monomial_error(rule: &QuadRule, degree: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            let approx = rule.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
            worst = worst.max((approx - monomial_integral(a, b)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_exact_to_declared_degree() {
        for degree in 1..=8 {
            let rule = triangle_rule(degree).unwrap();
            let err = max_monomial_error(&rule, degree);
            assert!(err <= 1e-13, "degree {degree}: monomial error {err:.3e}");
        }
    }

    #[test]
    fn weights_positive_points_inside() {
        for degree in 1..=8 {
            let rule = triangle_rule(degree).unwrap();
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                assert!(w > 0.0);
                assert!(p.x > 0.0 && p.y > 0.0 && p.x + p.y < 1.0);
            }
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn rule_sizes() {
        let sizes = [1usize, 3, 6, 6, 7, 12, 16, 16];
        for (d, &n) in (1u32..=8).zip(&sizes) {
            assert_eq!(triangle_rule(d).unwrap().len(), n, "degree {d}");
        }
    }

    #[test]
    fn out_of_range_degrees_rejected() {
        assert!(matches!(
            triangle_rule(0),
            Err(Error::UnsupportedDegree { degree: 0 })
        ));
        assert!(matches!(
            triangle_rule(9),
            Err(Error::UnsupportedDegree { degree: 9 })
        ));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_31() {
        let (nodes, weights) = gauss_legendre_16();
        for k in 0..=31u32 {
            let approx: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x.powi(k as i32))
                .sum();
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-14, "x^{k}: {approx} vs {exact}");
        }
    }

    #[test]
    fn integrate_constant_gives_area() {
        let rule = triangle_rule(5).unwrap();
        assert!((rule.integrate(|_| 2.0) - 1.0).abs() < 1e-14);
    }
}
