//! Curved triangulations of the unit disk.
//!
//! The generator places `m = 4 * 2^level` concentric rings; ring `j` sits at
//! radius `j/m` and carries `4j` equally spaced vertices, so element size and
//! shape stay uniform all the way to the center. Each annulus is triangulated
//! quadrant by quadrant with a ladder walk between the two rings. Only the
//! outermost elements touch the circle and receive a non-trivial curved
//! correction.

use crate::error::{Error, Result};
use crate::geometry::{
    build_affine_factorization, inverse_map_hessian, relabel_condition1, AffineFactorization,
    AffineMap, Blend, CurvedCorrection, ElementMap, Point2,
};
use crate::quadrature::triangle_rule;
use std::collections::HashMap;

/// Geometry representation of the curved boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeoVariant {
    /// Straight elements everywhere (polygonal approximation).
    Order1,
    /// Quadratic interpolation of the boundary arc.
    Order2,
    /// Cubic interpolation of the boundary arc.
    Order3,
    /// Exact circular arcs.
    ExactArc,
}

/// The straight core of an element: relabeled vertex ids, the affine map and
/// its factorization, and derived size quantities.
#[derive(Debug, Clone)]
pub struct AffineCore {
    /// Vertex ids after relabeling: apex first, then the endpoint of the
    /// longer leg, then the shorter.
    pub ids: [usize; 3],
    pub map: AffineMap,
    pub fact: AffineFactorization,
    /// Length of the longest edge (the edge opposite the apex).
    pub h_t: f64,
    pub area: f64,
}

impl AffineCore {
    pub fn from_points(ids: [usize; 3], pts: [Point2; 3]) -> Result<Self> {
        let perm = relabel_condition1(pts);
        let q = [pts[perm[0]], pts[perm[1]], pts[perm[2]]];
        let (fact, map) = build_affine_factorization(q[0], q[1], q[2])?;
        Ok(AffineCore {
            ids: [ids[perm[0]], ids[perm[1]], ids[perm[2]]],
            map,
            fact,
            h_t: (q[1] - q[2]).norm(),
            area: 0.5 * (q[1] - q[0]).cross(q[2] - q[0]).abs(),
        })
    }

    /// The regularity measure `H_T = h1 h2 h_T / |T|`.
    pub fn big_h_t(&self) -> f64 {
        self.fact.h1 * self.fact.h2 * self.h_t / self.area
    }

    /// Unit direction of the longer leg (first affine column, normalized).
    pub fn r1(&self) -> Point2 {
        Point2::new(self.map.a.a11, self.map.a.a21).scale(1.0 / self.fact.h1)
    }

    /// Unit direction of the shorter leg.
    pub fn r2(&self) -> Point2 {
        Point2::new(self.map.a.a12, self.map.a.a22).scale(1.0 / self.fact.h2)
    }

    /// Vertex ids as a counterclockwise cycle.
    pub fn ccw_ids(&self) -> [usize; 3] {
        if self.map.a.det() > 0.0 {
            self.ids
        } else {
            [self.ids[0], self.ids[2], self.ids[1]]
        }
    }
}

/// A triangle with its affine core and curved correction.
#[derive(Debug, Clone)]
pub struct CurvedTriangle {
    pub core: AffineCore,
    pub correction: CurvedCorrection,
}

impl CurvedTriangle {
    /// The full element map `F = Psi ∘ Phi`.
    pub fn map(&self) -> ElementMap<'_> {
        ElementMap::new(self.core.map, &self.correction)
    }
}

/// A boundary edge: the owning element, the two endpoint vertex ids in
/// counterclockwise order, and the arc angles of the endpoints.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub elem: usize,
    pub a: usize,
    pub b: usize,
    pub theta_a: f64,
    pub theta_b: f64,
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    pub elements: Vec<CurvedTriangle>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Largest core edge length over all elements.
    pub h: f64,
    pub geo: GeoVariant,
}

/// Regularity measures of a validated mesh.
#[derive(Debug, Clone, Copy)]
pub struct RegularityReport {
    /// max over elements of `H_T / h_T`.
    pub gamma: f64,
    /// max over sample points of the spectral norms of `DPsi`, `DPsi^{-1}`.
    pub cpsi1: f64,
    /// max over sample points of `h_T` times the largest entry of `D^2 Psi`
    /// and `D^2 Psi^{-1}`.
    pub cpsi2: f64,
}

fn correction_for(geo: GeoVariant, blend: Blend) -> CurvedCorrection {
    match geo {
        GeoVariant::Order1 => CurvedCorrection::Identity,
        GeoVariant::Order2 => CurvedCorrection::PolyEdgeBlend(blend, 2),
        GeoVariant::Order3 => CurvedCorrection::PolyEdgeBlend(blend, 3),
        GeoVariant::ExactArc => CurvedCorrection::ArcBlend(blend),
    }
}

/// Builds a triangulation from raw connectivity: cores are relabeled here and
/// the boundary edges decide which elements get a curved correction.
fn assemble_triangulation(
    vertices: Vec<Point2>,
    element_ids: &[[usize; 3]],
    boundary_edges: Vec<BoundaryEdge>,
    geo: GeoVariant,
) -> Result<Triangulation> {
    if element_ids.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut edge_of_elem: HashMap<usize, usize> = HashMap::new();
    for (k, be) in boundary_edges.iter().enumerate() {
        edge_of_elem.insert(be.elem, k);
    }
    let mut elements = Vec::with_capacity(element_ids.len());
    let mut h: f64 = 0.0;
    for (e, ids) in element_ids.iter().enumerate() {
        let pts = [vertices[ids[0]], vertices[ids[1]], vertices[ids[2]]];
        let core = AffineCore::from_points(*ids, pts)?;
        h = h.max(core.h_t);
        let correction = match edge_of_elem.get(&e) {
            Some(&k) => {
                let be = &boundary_edges[k];
                let apex = *ids
                    .iter()
                    .find(|&&v| v != be.a && v != be.b)
                    .expect("boundary edge endpoints are element vertices");
                correction_for(
                    geo,
                    Blend::new(
                        vertices[be.a],
                        vertices[be.b],
                        vertices[apex],
                        be.theta_a,
                        be.theta_b,
                    ),
                )
            }
            None => CurvedCorrection::Identity,
        };
        elements.push(CurvedTriangle { core, correction });
    }
    Ok(Triangulation {
        vertices,
        elements,
        boundary_edges,
        h,
        geo,
    })
}

/// Triangulates the unit disk at the given refinement level.
pub fn disk_mesh(level: u32, geo: GeoVariant) -> Result<Triangulation> {
    let m = 4usize << level;
    let ring_start = |j: usize| 1 + 2 * j * (j - 1);

    let mut vertices = vec![Point2::new(0.0, 0.0)];
    for j in 1..=m {
        let r = j as f64 / m as f64;
        let n = 4 * j;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vertices.push(Point2::new(r * th.cos(), r * th.sin()));
        }
    }

    let mut element_ids: Vec<[usize; 3]> = Vec::with_capacity(4 * m * m);
    let mut boundary_edges = Vec::with_capacity(4 * m);

    // Center fan onto ring 1.
    for i in 0..4 {
        element_ids.push([0, 1 + i, 1 + (i + 1) % 4]);
    }

    // Ladder walk per annulus and quadrant.
    for j in 1..m {
        for q in 0..4 {
            let inner = |i: usize| ring_start(j) + (q * j + i) % (4 * j);
            let outer = |o: usize| ring_start(j + 1) + (q * (j + 1) + o) % (4 * (j + 1));
            let (mut i, mut o) = (0usize, 0usize);
            while i < j || o < j + 1 {
                let advance_inner = if o == j + 1 {
                    true
                } else if i == j {
                    false
                } else {
                    // Next inner angle vs next outer angle; j and j+1 are
                    // coprime, so no mid-quadrant ties.
                    (i + 1) * (j + 1) <= (o + 1) * j
                };
                if advance_inner {
                    element_ids.push([inner(i), outer(o), inner(i + 1)]);
                    i += 1;
                } else {
                    element_ids.push([inner(i), outer(o), outer(o + 1)]);
                    if j + 1 == m {
                        let t = (q * m + o) as f64;
                        let step = 2.0 * std::f64::consts::PI / (4 * m) as f64;
                        boundary_edges.push(BoundaryEdge {
                            elem: element_ids.len() - 1,
                            a: outer(o),
                            b: outer(o + 1),
                            theta_a: t * step,
                            theta_b: (t + 1.0) * step,
                        });
                    }
                    o += 1;
                }
            }
        }
    }

    assemble_triangulation(vertices, &element_ids, boundary_edges, geo)
}

impl Triangulation {
    /// The same mesh with every correction replaced by the identity, i.e. the
    /// straight-sided mesh over the same vertices.
    pub fn from_straight(&self) -> Triangulation {
        let mut out = self.clone();
        for el in &mut out.elements {
            el.correction = CurvedCorrection::Identity;
        }
        out.geo = GeoVariant::Order1;
        out
    }

    /// The mesh rotated rigidly by `angle` about the origin.
    pub fn rotate(&self, angle: f64) -> Result<Triangulation> {
        let (s, c) = angle.sin_cos();
        let rot = |p: Point2| Point2::new(c * p.x - s * p.y, s * p.x + c * p.y);
        let vertices: Vec<Point2> = self.vertices.iter().map(|&p| rot(p)).collect();
        let element_ids: Vec<[usize; 3]> = self.elements.iter().map(|el| el.core.ids).collect();
        let boundary_edges: Vec<BoundaryEdge> = self
            .boundary_edges
            .iter()
            .map(|be| BoundaryEdge {
                theta_a: be.theta_a + angle,
                theta_b: be.theta_b + angle,
                ..*be
            })
            .collect();
        assemble_triangulation(vertices, &element_ids, boundary_edges, self.geo)
    }

    /// Checks conformity and Jacobian positivity, and measures the regularity
    /// constants.
    pub fn validate(&self) -> Result<RegularityReport> {
        if self.elements.is_empty() {
            return Err(Error::EmptyMesh);
        }

        // Sample points in the reference triangle: vertices, edge midpoints,
        // centroid, and a mid-order quadrature rule.
        let mut samples = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.0, 0.5),
            Point2::new(0.5, 0.5),
            Point2::new(1.0 / 3.0, 1.0 / 3.0),
        ];
        samples.extend(triangle_rule(5).expect("degree 5 exists").points);

        let mut gamma: f64 = 0.0;
        let mut cpsi1: f64 = 1.0;
        let mut cpsi2: f64 = 0.0;
        for (e, el) in self.elements.iter().enumerate() {
            gamma = gamma.max(el.core.big_h_t() / el.core.h_t);
            if el.correction.is_identity() {
                continue;
            }
            for &xhat in &samples {
                let y = el.core.map.apply(xhat);
                let j = el.correction.jacobian(y);
                let det = j.det();
                if det <= 0.0 {
                    return Err(Error::NonpositiveJacobian {
                        det,
                        element: Some(e),
                    });
                }
                cpsi1 = cpsi1
                    .max(j.spectral_norm())
                    .max(j.inverse().spectral_norm());
                let h = el.correction.hessian(y);
                let hinv = inverse_map_hessian(j, h);
                cpsi2 = cpsi2.max(el.core.h_t * h.max_abs().max(hinv.max_abs()));
            }
        }
        self.check_conformity()?;
        Ok(RegularityReport {
            gamma,
            cpsi1,
            cpsi2,
        })
    }

    fn check_conformity(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for el in &self.elements {
            let c = el.core.ccw_ids();
            for k in 0..3 {
                let edge = (c[k], c[(k + 1) % 3]);
                if directed.insert(edge, 1).is_some() {
                    return Err(Error::NonConforming {
                        reason: format!("directed edge {edge:?} appears twice"),
                    });
                }
            }
        }
        let boundary: std::collections::HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|be| (be.a.min(be.b), be.a.max(be.b)))
            .collect();
        for (&(a, b), _) in &directed {
            let twin = directed.contains_key(&(b, a));
            let on_boundary = boundary.contains(&(a.min(b), a.max(b)));
            if !twin && !on_boundary {
                return Err(Error::NonConforming {
                    reason: format!("edge ({a}, {b}) has one element and is not on the boundary"),
                });
            }
            if twin && on_boundary {
                return Err(Error::NonConforming {
                    reason: format!("boundary edge ({a}, {b}) is shared by two elements"),
                });
            }
        }
        Ok(())
    }

    /// Serializes the mesh as JSON (`curvedfem-mesh-v1`).
    pub fn to_json(&self) -> String {
        let geo = match self.geo {
            GeoVariant::Order1 => "order1",
            GeoVariant::Order2 => "order2",
            GeoVariant::Order3 => "order3",
            GeoVariant::ExactArc => "exact_arc",
        };
        let elements: Vec<[usize; 3]> = self.elements.iter().map(|el| el.core.ccw_ids()).collect();
        let boundary: Vec<serde_json::Value> = self
            .boundary_edges
            .iter()
            .map(|be| {
                serde_json::json!({
                    "elem": be.elem,
                    "a": be.a,
                    "b": be.b,
                    "theta_a": be.theta_a,
                    "theta_b": be.theta_b,
                })
            })
            .collect();
        serde_json::json!({
            "format": "curvedfem-mesh-v1",
            "geo": geo,
            "h": self.h,
            "vertices": self.vertices,
            "elements": elements,
            "boundary_edges": boundary,
        })
        .to_string()
    }
}
