//! Convex bodies, shells and their linear images.

use serde::{Deserialize, Serialize};

use super::halton::{halton, sphere_dims, cube_to_sphere};
use crate::error::{Error, Result};
use crate::matgroup::{Mat, Vector};

/// Number of directions used to verify shell nesting.
const NESTING_DIRECTIONS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ConvexBody {
    /// `{ξ : |M(ξ − c)| ≤ 1}`.
    Ellipsoid { center: Vector, shape: Mat },
    /// `{c + E u : |u|_∞ ≤ 1}`; columns of E are half-edges.
    Parallelotope { center: Vector, edges: Mat },
}

impl ConvexBody {
    pub fn ball(center: Vector, radius: f64) -> ConvexBody {
        let d = center.dim();
        ConvexBody::Ellipsoid { center, shape: Mat::identity(d).scale(1.0 / radius) }
    }

    pub fn dim(&self) -> usize {
        self.center().dim()
    }

    pub fn center(&self) -> &Vector {
        match self {
            ConvexBody::Ellipsoid { center, .. } | ConvexBody::Parallelotope { center, .. } => {
                center
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (c, m) = match self {
            ConvexBody::Ellipsoid { center, shape } => (center, shape),
            ConvexBody::Parallelotope { center, edges } => (center, edges),
        };
        if c.dim() != m.dim() {
            return Err(Error::Dimension { expected: m.dim(), found: c.dim() });
        }
        if !c.is_finite() || !m.is_finite() {
            return Err(Error::NonFinite);
        }
        if m.is_singular() {
            return Err(Error::Singular("convex body"));
        }
        Ok(())
    }

    /// Minkowski gauge relative to the center; the body is `gauge ≤ 1`.
    pub fn gauge(&self, xi: &Vector) -> f64 {
        match self {
            ConvexBody::Ellipsoid { center, shape } => shape.apply(&(*xi - *center)).norm(),
            ConvexBody::Parallelotope { center, edges } => match edges.solve(&(*xi - *center)) {
                Ok(u) => u.norm_inf(),
                Err(_) => f64::INFINITY,
            },
        }
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        self.gauge(xi) <= 1.0
    }

    /// Support function `max_{ξ ∈ body} ⟨n, ξ⟩`.
    pub fn support(&self, n: &Vector) -> f64 {
        match self {
            ConvexBody::Ellipsoid { center, shape } => {
                // max over |M(ξ−c)| ≤ 1 of ⟨n, ξ⟩ = ⟨n, c⟩ + |M^{-T} n|.
                let w = shape.solve_transpose(n).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                n.dot(center) + w
            }
            ConvexBody::Parallelotope { center, edges } => {
                let w: f64 = (0..edges.dim()).map(|j| n.dot(&edges.column(j)).abs()).sum();
                n.dot(center) + w
            }
        }
    }

    /// Boundary point in the direction of the unit vector `u` (body coordinates).
    pub fn boundary_point(&self, u: &Vector) -> Vector {
        match self {
            ConvexBody::Ellipsoid { center, shape } => {
                *center + shape.solve(u).unwrap_or_else(|_| Vector::zeros(u.dim()))
            }
            ConvexBody::Parallelotope { center, edges } => {
                let m = u.norm_inf();
                let v = if m > 0.0 { u.scale(1.0 / m) } else { *u };
                *center + edges.apply(&v)
            }
        }
    }

    /// Image under ξ ↦ Tξ, given T and T⁻¹.
    pub fn linear_image(&self, t: &Mat, t_inv: &Mat) -> ConvexBody {
        match self {
            ConvexBody::Ellipsoid { center, shape } => ConvexBody::Ellipsoid {
                center: t.apply(center),
                shape: *shape * *t_inv,
            },
            ConvexBody::Parallelotope { center, edges } => ConvexBody::Parallelotope {
                center: t.apply(center),
                edges: *t * *edges,
            },
        }
    }

    /// Largest and smallest semi-axis lengths.
    pub fn extent(&self) -> (f64, f64) {
        let (m, inverse) = match self {
            ConvexBody::Ellipsoid { shape, .. } => (shape, true),
            ConvexBody::Parallelotope { edges, .. } => (edges, false),
        };
        let s = m.singular_values();
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if inverse {
            (1.0 / lo, 1.0 / hi)
        } else {
            // Half-edge lengths bound the circumradius by √d·σ_max.
            ((m.dim() as f64).sqrt() * hi, lo)
        }
    }
}

/// `closure(outer) \ interior(inner)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub outer: ConvexBody,
    pub inner: ConvexBody,
}

impl Shell {
    /// Validates nesting `inner ⊆ interior(outer)` by support functions and sampled boundary points.
    pub fn new(outer: ConvexBody, inner: ConvexBody) -> Result<Shell> {
        outer.validate()?;
        inner.validate()?;
        if outer.dim() != inner.dim() {
            return Err(Error::Dimension { expected: outer.dim(), found: inner.dim() });
        }
        let d = outer.dim();
        for k in 0..NESTING_DIRECTIONS {
            let n = cube_to_sphere(&halton(k, sphere_dims(d)), d);
            if inner.support(&n) >= outer.support(&n) {
                return Err(Error::CoverConstruction {
                    message: "inner body not inside outer body".into(),
                    witness: n.to_vec(),
                });
            }
            let p = inner.boundary_point(&n);
            if outer.gauge(&p) >= 1.0 {
                return Err(Error::CoverConstruction {
                    message: "inner boundary point outside outer body".into(),
                    witness: p.to_vec(),
                });
            }
        }
        Ok(Shell { outer, inner })
    }

    /// `{r0 ≤ |Sξ| ≤ r1}`.
    pub fn ellipsoidal(shape: Mat, r0: f64, r1: f64) -> Result<Shell> {
        if !(0.0 < r0 && r0 < r1 && r1.is_finite()) {
            return Err(Error::Config(format!("shell radii must satisfy 0 < r0 < r1, got {r0}, {r1}")));
        }
        let c = Vector::zeros(shape.dim());
        Shell::new(
            ConvexBody::Ellipsoid { center: c, shape: shape.scale(1.0 / r1) },
            ConvexBody::Ellipsoid { center: c, shape: shape.scale(1.0 / r0) },
        )
    }

    pub fn annulus(dim: usize, r0: f64, r1: f64) -> Result<Shell> {
        Shell::ellipsoidal(Mat::identity(dim), r0, r1)
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        self.outer.gauge(xi) <= 1.0 && self.inner.gauge(xi) >= 1.0
    }
}

/// A cover element shape: a convex body or a shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Geometry {
    Body(ConvexBody),
    Shell(Shell),
}

/// `{a0 ≤ |Sξ| ≤ a1}`; a centered ellipsoid has `a0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentric {
    pub shape: Mat,
    pub r0: f64,
    pub r1: f64,
}

impl Geometry {
    pub fn dim(&self) -> usize {
        self.outer().dim()
    }

    pub fn outer(&self) -> &ConvexBody {
        match self {
            Geometry::Body(b) => b,
            Geometry::Shell(s) => &s.outer,
        }
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        match self {
            Geometry::Body(b) => b.contains(xi),
            Geometry::Shell(s) => s.contains(xi),
        }
    }

    /// Strict membership with a relative gauge margin (open sets) or its
    /// closed counterpart when `closed` is set.
    pub fn contains_with_margin(&self, xi: &Vector, margin: f64, closed: bool) -> bool {
        let (lo, hi) = if closed { (1.0 - margin, 1.0 + margin) } else { (1.0 + margin, 1.0 - margin) };
        match self {
            Geometry::Body(b) => {
                let g = b.gauge(xi);
                if closed { g <= hi } else { g < hi }
            }
            Geometry::Shell(s) => {
                let go = s.outer.gauge(xi);
                let gi = s.inner.gauge(xi);
                if closed {
                    go <= hi && gi >= lo
                } else {
                    go < hi && gi > lo
                }
            }
        }
    }

    /// Log-margin: positive inside, zero on the boundary, negative outside.
    pub fn log_margin(&self, xi: &Vector) -> f64 {
        match self {
            Geometry::Body(b) => -b.gauge(xi).ln(),
            Geometry::Shell(s) => (-s.outer.gauge(xi).ln()).min(s.inner.gauge(xi).ln()),
        }
    }

    /// Image under the dual action ξ ↦ h^{-T}ξ.
    pub fn dual_image(&self, h: &Mat) -> Result<Geometry> {
        let t_inv = h.transpose();
        let t = h.inverse()?.transpose();
        Ok(match self {
            Geometry::Body(b) => Geometry::Body(b.linear_image(&t, &t_inv)),
            Geometry::Shell(s) => Geometry::Shell(Shell {
                outer: s.outer.linear_image(&t, &t_inv),
                inner: s.inner.linear_image(&t, &t_inv),
            }),
        })
    }

    /// Concentric ellipsoidal description, when the geometry has one.
    pub fn concentric(&self) -> Option<Concentric> {
        let centered = |c: &Vector| c.norm_inf() == 0.0;
        match self {
            Geometry::Body(ConvexBody::Ellipsoid { center, shape }) if centered(center) => {
                Some(Concentric { shape: *shape, r0: 0.0, r1: 1.0 })
            }
            Geometry::Shell(Shell {
                outer: ConvexBody::Ellipsoid { center: co, shape: so },
                inner: ConvexBody::Ellipsoid { center: ci, shape: si },
            }) if centered(co) && centered(ci) => {
                let k = si.frobenius_norm() / so.frobenius_norm();
                if si.max_abs_diff(&so.scale(k)) <= 1e-12 * si.frobenius_norm() {
                    Some(Concentric { shape: *so, r0: 1.0 / k, r1: 1.0 })
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Deterministic sample points of the set: a quarter on the inner
    /// boundary, a quarter on the outer boundary, the rest in between.
    pub fn sample_points(&self, count: usize) -> Vec<Vector> {
        let d = self.dim();
        let sd = sphere_dims(d);
        let mut out = Vec::with_capacity(count);
        let mut n = 0u64;
        while out.len() < count && n < 4 * count as u64 + 16 {
            let h = halton(n, sd + 1);
            let u = cube_to_sphere(&h[..sd], d);
            let t = h[sd];
            let p = match self {
                Geometry::Body(b) => {
                    let bp = b.boundary_point(&u);
                    let c = *b.center();
                    match n % 4 {
                        0 | 1 => bp,
                        _ => c.lerp(&bp, t.powf(1.0 / d as f64)),
                    }
                }
                Geometry::Shell(s) => {
                    let ip = s.inner.boundary_point(&u);
                    let op = s.outer.boundary_point(&u);
                    match n % 4 {
                        0 => ip,
                        1 => op,
                        _ => ip.lerp(&op, t),
                    }
                }
            };
            n += 1;
            if self.contains_with_margin(&p, 1e-12, true) {
                out.push(p);
            }
        }
        out
    }
}

/// Base set with a reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSet {
    pub geometry: Geometry,
    pub reference: Vector,
}

impl BaseSet {
    pub fn new(geometry: Geometry, reference: Vector) -> Result<BaseSet> {
        if !geometry.contains(&reference) {
            return Err(Error::CoverConstruction {
                message: "reference point outside the base set".into(),
                witness: reference.to_vec(),
            });
        }
        Ok(BaseSet { geometry, reference })
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        self.geometry.contains(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let ball = Geometry::Body(ConvexBody::ball(Vector::zeros(2), 1.0));
        assert!(ball.contains(&Vector::zeros(2)));
        let shell = Geometry::Shell(Shell::annulus(2, 1.0, 2.0).unwrap());
        assert!(shell.contains(&Vector::from_slice(&[1.5, 0.0])));
        assert!(!shell.contains(&Vector::from_slice(&[0.5, 0.0])));
        let img = ball.dual_image(&Mat::diag(&[2.0, 2.0])).unwrap();
        assert!(img.contains(&Vector::from_slice(&[0.4, 0.0])));
        assert!(!img.contains(&Vector::from_slice(&[0.6, 0.0])));
    }

    #[test]
    fn parallelotope_membership() {
        let box2 = ConvexBody::Parallelotope { center: Vector::zeros(2), edges: Mat::diag(&[1.0, 2.0]) };
        assert!(box2.contains(&Vector::from_slice(&[0.9, -1.9])));
        assert!(!box2.contains(&Vector::from_slice(&[1.1, 0.0])));
        assert!((box2.support(&Vector::from_slice(&[1.0, 1.0])) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn nesting_is_enforced() {
        assert!(Shell::annulus(2, 2.0, 1.0).is_err());
        let outer = ConvexBody::ball(Vector::zeros(2), 1.0);
        let inner = ConvexBody::ball(Vector::from_slice(&[0.6, 0.0]), 0.5);
        assert!(Shell::new(outer, inner).is_err());
    }

    #[test]
    fn concentric_detection() {
        let s = Geometry::Shell(Shell::ellipsoidal(Mat::diag(&[1.0, 3.0]), 0.5, 2.0).unwrap());
        let c = s.concentric().unwrap();
        assert!((c.r0 - 0.25).abs() < 1e-15 && c.r1 == 1.0);
        let moved = s.dual_image(&Mat::diag(&[2.0, 5.0])).unwrap();
        assert!(moved.concentric().is_some());
    }

    #[test]
    fn samples_stay_in_the_set() {
        let s = Geometry::Shell(Shell::ellipsoidal(Mat::diag(&[1.0, 3.0]), 0.5, 2.0).unwrap());
        let pts = s.sample_points(200);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| s.contains_with_margin(p, 1e-12, true)));
    }
}
