//! Intersection tests between cover elements.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::geometry::{Concentric, ConvexBody, Geometry};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matgroup::{Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntersectStatus {
    Disjoint,
    Intersecting,
    IntersectingSampled,
    DisjointSampled,
}

impl IntersectStatus {
    pub fn intersects(self) -> bool {
        matches!(self, IntersectStatus::Intersecting | IntersectStatus::IntersectingSampled)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, IntersectStatus::Intersecting | IntersectStatus::Disjoint)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntersectStatus::Disjoint => "Disjoint",
            IntersectStatus::Intersecting => "Intersecting",
            IntersectStatus::IntersectingSampled => "IntersectingSampled",
            IntersectStatus::DisjointSampled => "DisjointSampled",
        }
    }
}

/// Whether touching sets count as intersecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Contact {
    /// Interiors must meet (cover elements are open).
    Open,
    /// Closures may touch (compact generating sets).
    Closed,
}

fn exact(b: bool) -> IntersectStatus {
    if b {
        IntersectStatus::Intersecting
    } else {
        IntersectStatus::Disjoint
    }
}

/// Compares a minimal gauge value against the unit level.
fn below_one(v: f64, contact: Contact, tol: f64) -> bool {
    match contact {
        Contact::Open => v < 1.0 - tol,
        Contact::Closed => v <= 1.0 + tol,
    }
}

/// min over |u| ≤ 1 of |G u + g|.
fn min_ball_affine(g_mat: &Mat, g: &Vector) -> f64 {
    let d = g_mat.dim();
    if let Ok(u) = g_mat.solve(&g.scale(-1.0)) {
        if u.norm() <= 1.0 {
            return 0.0;
        }
    }
    let gtg = g_mat.transpose() * *g_mat;
    let rhs = g_mat.apply_transpose(g).scale(-1.0);
    let u_of = |lam: f64| -> Vector {
        let m = gtg + Mat::identity(d).scale(lam);
        m.solve(&rhs).unwrap_or_else(|_| Vector::zeros(d))
    };
    let mut lo = 0.0;
    let mut hi = (g_mat.op_norm() * g.norm()).max(1e-300) * 2.0;
    while u_of(hi).norm() > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if u_of(mid).norm() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = u_of(hi);
    let n = u.norm();
    if n > 0.0 {
        u = u.scale(1.0 / n);
    }
    (g_mat.apply(&u) + *g).norm()
}

/// min over |u|_∞ ≤ 1 of |G u + g|, by enumerating the faces of the cube.
fn min_box_affine(g_mat: &Mat, g: &Vector) -> f64 {
    let d = g_mat.dim();
    let mut best = f64::INFINITY;
    let combos = 3usize.pow(d as u32);
    for code in 0..combos {
        let mut c = code;
        let mut state = [0i8; 4];
        for s in state.iter_mut().take(d) {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        // state 0 = free, ±1 = fixed at ±1.
        let free: Vec<usize> = (0..d).filter(|&j| state[j] == 0).collect();
        let mut r = *g;
        for j in 0..d {
            if state[j] != 0 {
                r = r + g_mat.column(j).scale(state[j] as f64);
            }
        }
        let mut u = [0.0f64; 4];
        for j in 0..d {
            u[j] = state[j] as f64;
        }
        if !free.is_empty() {
            let a = DMatrix::from_fn(d, free.len(), |i, k| g_mat[(i, free[k])]);
            let b = DVector::from_fn(d, |i, _| -r[i]);
            let svd = a.svd(true, true);
            let Ok(sol) = svd.solve(&b, 1e-14) else { continue };
            if sol.iter().any(|x| x.abs() > 1.0 + 1e-12) {
                continue;
            }
            for (k, &j) in free.iter().enumerate() {
                u[j] = sol[k].clamp(-1.0, 1.0);
            }
        }
        let uv = Vector::from_slice(&u[..d]);
        best = best.min((g_mat.apply(&uv) + *g).norm());
    }
    best
}

/// Generalized cross product of `d − 1` vectors in ℝ^d.
fn cross(vs: &[Vector], d: usize) -> Vector {
    if d == 1 {
        return Vector::from_slice(&[1.0]);
    }
    let mut n = Vector::zeros(d);
    for i in 0..d {
        let minor = Mat::from_fn(d - 1, |r, c| {
            let col = if c < i { c } else { c + 1 };
            vs[r][col]
        });
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        n[i] = sign * minor.det();
    }
    n
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn sat(ca: &Vector, ea: &Mat, cb: &Vector, eb: &Mat, contact: Contact, tol: f64) -> bool {
    let d = ca.dim();
    let cols: Vec<Vector> = (0..d).map(|j| ea.column(j)).chain((0..d).map(|j| eb.column(j))).collect();
    let scale = ea.frobenius_norm().max(eb.frobenius_norm());
    let delta = *cb - *ca;
    for combo in combinations(2 * d, d.saturating_sub(1)) {
        let vs: Vec<Vector> = combo.iter().map(|&i| cols[i].scale(1.0 / scale)).collect();
        let n = cross(&vs, d);
        let nn = n.norm();
        if nn < 1e-12 {
            continue;
        }
        let n = n.scale(1.0 / nn);
        let ra: f64 = (0..d).map(|j| n.dot(&ea.column(j)).abs()).sum();
        let rb: f64 = (0..d).map(|j| n.dot(&eb.column(j)).abs()).sum();
        let gap = n.dot(&delta).abs();
        let overlap = match contact {
            Contact::Open => gap < (ra + rb) * (1.0 - tol),
            Contact::Closed => gap <= (ra + rb) * (1.0 + tol),
        };
        if !overlap {
            return false;
        }
    }
    true
}

/// Exact test between two convex bodies.
pub fn bodies_intersect(a: &ConvexBody, b: &ConvexBody, contact: Contact, tol: f64) -> bool {
    use ConvexBody::*;
    match (a, b) {
        (Ellipsoid { center: ca, shape: ma }, Ellipsoid { center: cb, shape: mb }) => {
            let Ok(ma_inv) = ma.inverse() else { return false };
            let g_mat = *mb * ma_inv;
            let g = mb.apply(&(*ca - *cb));
            below_one(min_ball_affine(&g_mat, &g), contact, tol)
        }
        (Parallelotope { center: ca, edges: ea }, Parallelotope { center: cb, edges: eb }) => {
            sat(ca, ea, cb, eb, contact, tol)
        }
        (Parallelotope { center: cp, edges: e }, Ellipsoid { center: ce, shape: m })
        | (Ellipsoid { center: ce, shape: m }, Parallelotope { center: cp, edges: e }) => {
            let g_mat = *m * *e;
            let g = m.apply(&(*cp - *ce));
            below_one(min_box_affine(&g_mat, &g), contact, tol)
        }
    }
}

/// Exact test for two concentric ellipsoidal sets.
fn concentric_intersect(a: &Concentric, b: &Concentric, contact: Contact, tol: f64) -> bool {
    let one_way = |a: &Concentric, b: &Concentric| -> bool {
        // Image of a under |S_b ·| is [a.r0 σ_min(T), a.r1 σ_max(T)], T = S_b S_a⁻¹.
        let Ok(sa_inv) = a.shape.inverse() else { return false };
        let s = (b.shape * sa_inv).singular_values();
        let lo = a.r0 * s[s.len() - 1];
        let hi = a.r1 * s[0];
        match contact {
            Contact::Open => lo < b.r1 * (1.0 - tol) && hi > b.r0 * (1.0 + tol),
            Contact::Closed => lo <= b.r1 * (1.0 + tol) && hi >= b.r0 * (1.0 - tol),
        }
    };
    one_way(a, b) && one_way(b, a)
}

/// Intersection test with open contact and default tolerances.
pub fn intersects(a: &Geometry, b: &Geometry, budget: usize) -> Result<IntersectStatus> {
    intersects_with(a, b, budget, Contact::Open, &Tolerances::default())
}

/// Exact where the geometry allows it, sampled otherwise.
pub fn intersects_with(
    a: &Geometry,
    b: &Geometry,
    budget: usize,
    contact: Contact,
    tol: &Tolerances,
) -> Result<IntersectStatus> {
    check_pair(a, b, budget, tol)?;
    if a == b {
        return Ok(IntersectStatus::Intersecting);
    }
    if let (Some(ca), Some(cb)) = (a.concentric(), b.concentric()) {
        return Ok(exact(concentric_intersect(&ca, &cb, contact, tol.intersect)));
    }
    if let (Geometry::Body(x), Geometry::Body(y)) = (a, b) {
        return Ok(exact(bodies_intersect(x, y, contact, tol.intersect)));
    }
    if !bodies_intersect(a.outer(), b.outer(), contact, tol.intersect) {
        return Ok(IntersectStatus::Disjoint);
    }
    Ok(sampled(a, b, budget, contact, tol))
}

/// The sampling protocol alone: exact outer-body precheck, then low-discrepancy
/// samples of each set tested against the other.
pub fn intersects_sampled(
    a: &Geometry,
    b: &Geometry,
    budget: usize,
    contact: Contact,
    tol: &Tolerances,
) -> Result<IntersectStatus> {
    check_pair(a, b, budget, tol)?;
    if !bodies_intersect(a.outer(), b.outer(), contact, tol.intersect) {
        return Ok(IntersectStatus::Disjoint);
    }
    Ok(sampled(a, b, budget, contact, tol))
}

fn check_pair(a: &Geometry, b: &Geometry, budget: usize, tol: &Tolerances) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    if budget < tol.min_budget {
        return Err(Error::Config(format!(
            "intersection budget {budget} below the minimum {}",
            tol.min_budget
        )));
    }
    Ok(())
}

fn sampled(a: &Geometry, b: &Geometry, budget: usize, contact: Contact, tol: &Tolerances) -> IntersectStatus {
    let closed = contact == Contact::Closed;
    for (x, y) in [(a, b), (b, a)] {
        for p in x.sample_points(budget) {
            if y.contains_with_margin(&p, tol.sample_margin, closed) {
                return IntersectStatus::IntersectingSampled;
            }
        }
    }
    IntersectStatus::DisjointSampled
}
