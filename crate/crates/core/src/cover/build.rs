//! Induced covers `(h_i^{-T} Q)` and neighbor counting.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::geometry::{BaseSet, ConvexBody, Geometry, Shell};
use super::intersect::{intersects_with, Contact, IntersectStatus};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matgroup::{
    enumerate_family, enumerate_word_ball, mat_exp, Admissibility, GroupElement, GroupKind,
    GroupSpec, Mat, Vector, WellSpreadFamily,
};
use crate::par;

/// Default cap on enumerated words for finitely generated groups.
pub const DEFAULT_WORD_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverParams {
    /// Shell ratio r1/r0; derived from the group when absent.
    pub ratio: Option<f64>,
    /// Family step; the group default when absent.
    pub step: Option<f64>,
    pub coverage_samples: usize,
    pub seed: u64,
    pub budget: usize,
    pub word_cap: usize,
    pub tolerances: Tolerances,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            ratio: None,
            step: None,
            coverage_samples: 4096,
            seed: 0,
            budget: 256,
            word_cap: DEFAULT_WORD_CAP,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowMeta {
    pub window: u32,
    pub step: f64,
    pub ratio: f64,
    /// Euclidean annulus guaranteed to be covered; absent for word-ball families.
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    /// Whether the base shell uses a group-adapted quadratic form.
    pub adapted: bool,
    pub coverage_samples: usize,
    pub adjacent_pairs_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverElement {
    pub id: usize,
    pub index: Vec<i64>,
    pub transform: GroupElement,
    pub geometry: Geometry,
}

impl CoverElement {
    pub fn contains(&self, xi: &Vector) -> bool {
        self.geometry.contains(xi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InducedCover {
    pub spec: GroupSpec,
    pub base: BaseSet,
    #[serde(skip)]
    pub family: WellSpreadFamily,
    pub elements: Vec<CoverElement>,
    pub meta: WindowMeta,
    /// S with |ξ|_G = |Sξ|; the identity when no adapted form exists.
    pub form: Mat,
}

impl InducedCover {
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Max-norm of the window axes of an element index.
    pub fn radius_of(&self, id: usize) -> u64 {
        self.family.radius_of(&self.elements[id].index)
    }

    /// Interior elements satisfy ‖i‖_∞ ≤ K/2 on the window axes.
    pub fn is_interior(&self, id: usize) -> bool {
        2 * self.radius_of(id) <= self.meta.window as u64
    }

    pub fn is_edge(&self, id: usize) -> bool {
        self.radius_of(id) >= self.meta.window as u64
    }

    /// Elements containing ξ, in ascending id order.
    pub fn containing(&self, xi: &Vector) -> Vec<usize> {
        self.elements.iter().filter(|e| e.contains(xi)).map(|e| e.id).collect()
    }

    /// Elements containing ξ strictly inside, matching the open-contact adjacency.
    pub fn containing_open(&self, xi: &Vector) -> Vec<usize> {
        let margin = Tolerances::default().intersect;
        self.elements
            .iter()
            .filter(|e| e.geometry.contains_with_margin(xi, margin, false))
            .map(|e| e.id)
            .collect()
    }

    pub fn first_containing(&self, xi: &Vector) -> Option<usize> {
        self.elements.iter().find(|e| e.contains(xi)).map(|e| e.id)
    }

    /// Whether ξ lies in the annulus guaranteed by the window metadata.
    pub fn in_window_region(&self, xi: &Vector) -> bool {
        match (self.meta.r_min, self.meta.r_max) {
            (Some(lo), Some(hi)) => {
                let r = xi.norm();
                lo <= r && r <= hi
            }
            _ => true,
        }
    }
}

/// Quadratic form invariant (up to scale) under the dual action, if positive definite.
///
/// Returns S with det S = 1 such that |S h^{-T} ξ| = c(h)|Sξ| for all group elements.
pub fn adapted_form(spec: &GroupSpec) -> Option<Mat> {
    let d = spec.dim;
    let traceless = |x: &Mat| *x - Mat::identity(d).scale(x.trace() / d as f64);
    let normalized = |a: &Mat| -> Option<Mat> {
        let det = a.det().abs();
        (det > 0.0).then(|| a.scale(det.powf(-1.0 / d as f64)))
    };
    let mut flows: Vec<Mat> = Vec::new();
    let mut steps: Vec<Mat> = Vec::new();
    match &spec.kind {
        GroupKind::OneParameter { generator } => flows.push(traceless(generator)),
        GroupKind::AbelianFlow { generators } => flows.extend(generators.iter().map(traceless)),
        GroupKind::ScalarSimilitude => {}
        GroupKind::Similitude { frame } => {
            let f = frame.unwrap_or_else(|| Mat::identity(d));
            let fi = f.inverse().ok()?;
            let basis: Vec<Mat> = if d == 2 {
                vec![Mat::from_fn(2, |i, j| match (i, j) {
                    (0, 1) => -1.0,
                    (1, 0) => 1.0,
                    _ => 0.0,
                })]
            } else {
                (0..3).map(|k| Mat::skew3(&Vector::basis(3, k))).collect()
            };
            flows.extend(basis.iter().map(|j| fi * *j * f));
        }
        GroupKind::Cyclic { matrix } => steps.push(normalized(matrix)?),
        GroupKind::DiscreteFG { generators } => {
            for g in generators {
                steps.push(normalized(g)?);
            }
        }
    }
    if flows.is_empty() && steps.is_empty() {
        return Some(Mat::identity(d));
    }
    // Orthonormal basis of symmetric matrices.
    let mut basis = Vec::new();
    for i in 0..d {
        for j in i..d {
            let v = if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
            basis.push(Mat::from_fn(d, |r, c| if (r, c) == (i, j) || (r, c) == (j, i) { v } else { 0.0 }));
        }
    }
    let n = basis.len();
    let rows = d * d * (flows.len() + steps.len());
    let mut lin = DMatrix::<f64>::zeros(rows, n);
    for (k, b) in basis.iter().enumerate() {
        let mut r = 0;
        for y in &flows {
            // exp(-tYᵀ) preserves G iff Y G + G Yᵀ = 0.
            let img = *y * *b + *b * y.transpose();
            for i in 0..d {
                for j in 0..d {
                    lin[(r, k)] = img[(i, j)];
                    r += 1;
                }
            }
        }
        for a in &steps {
            // A^{-T} preserves G iff A G Aᵀ = G.
            let img = *a * *b * a.transpose() - *b;
            for i in 0..d {
                for j in 0..d {
                    lin[(r, k)] = img[(i, j)];
                    r += 1;
                }
            }
        }
    }
    let gram = lin.transpose() * &lin;
    let eig = gram.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let mut g = Mat::zeros(d);
    for k in 0..n {
        if eig.eigenvalues[k].abs() > 1e-10 * scale {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let mut m = Mat::zeros(d);
        for (c, b) in basis.iter().enumerate() {
            m = m + b.scale(v[c]);
        }
        // Coefficient of I in this null vector.
        let coef = (0..d).map(|i| m[(i, i)]).sum::<f64>();
        g = g + m.scale(coef);
    }
    let l = g.cholesky()?;
    let s = l.transpose();
    let det = s.det().abs();
    if !(det > 0.0) || s.condition_number() > 1e8 {
        return None;
    }
    Some(s.scale(det.powf(-1.0 / d as f64)))
}

/// Matrices of one chart step; their dual actions bound the shell ratio.
fn step_matrices(spec: &GroupSpec, step: f64) -> Result<Vec<Mat>> {
    let d = spec.dim;
    Ok(match &spec.kind {
        GroupKind::OneParameter { generator } => vec![mat_exp(&generator.scale(step))],
        GroupKind::AbelianFlow { generators } => {
            let mut v: Vec<Mat> = generators.iter().map(|g| mat_exp(&g.scale(step))).collect();
            let sum = generators.iter().fold(Mat::zeros(d), |a, g| a + *g);
            v.push(mat_exp(&sum.scale(step)));
            v
        }
        GroupKind::ScalarSimilitude | GroupKind::Similitude { .. } => {
            vec![Mat::identity(d).scale(step.exp())]
        }
        GroupKind::Cyclic { matrix } => vec![matrix.pow(step.round().max(1.0) as i64)?],
        GroupKind::DiscreteFG { generators } => generators.clone(),
    })
}

/// Diagonal step whose powers run through the family (for the window annulus).
fn diagonal_step(spec: &GroupSpec, step: f64) -> Result<Option<Mat>> {
    let d = spec.dim;
    Ok(match &spec.kind {
        GroupKind::OneParameter { generator } => Some(mat_exp(&generator.scale(step))),
        GroupKind::AbelianFlow { generators } => {
            let sum = generators.iter().fold(Mat::zeros(d), |a, g| a + *g);
            Some(mat_exp(&sum.scale(step)))
        }
        GroupKind::ScalarSimilitude | GroupKind::Similitude { .. } => {
            Some(Mat::identity(d).scale(step.exp()))
        }
        GroupKind::Cyclic { matrix } => Some(matrix.pow(step.round().max(1.0) as i64)?),
        GroupKind::DiscreteFG { .. } => None,
    })
}

/// ‖S T S⁻¹‖ for the dual action T = h^{-T}.
fn adapted_norm(s: &Mat, s_inv: &Mat, t: &Mat) -> f64 {
    (*s * *t * *s_inv).op_norm()
}

/// Default shell ratio: twice the largest adapted norm of a step or its inverse.
pub fn default_ratio(spec: &GroupSpec, form: &Mat, step: f64) -> Result<f64> {
    let s_inv = form.inverse()?;
    let mut m: f64 = 1.0;
    for a in step_matrices(spec, step)? {
        let t = a.inverse()?.transpose();
        let t_inv = a.transpose();
        m = m.max(adapted_norm(form, &s_inv, &t)).max(adapted_norm(form, &s_inv, &t_inv));
    }
    Ok(2.0 * m)
}

/// Builds the cover `(h_i^{-T} Q)_{|i| ≤ window}` with a centered shell base set.
pub fn build_induced_cover(spec: &GroupSpec, window: u32, params: &CoverParams) -> Result<InducedCover> {
    if window < 1 {
        return Err(Error::Config("cover window must be at least 1".into()));
    }
    if let Admissibility::NotAdmissible { witness_re, witness_im } = spec.admissibility() {
        return Err(Error::CoverConstruction {
            message: format!("{} fails its admissibility precheck", spec.kind_name()),
            witness: vec![witness_re, witness_im],
        });
    }
    let d = spec.dim;
    let step = params.step.unwrap_or_else(|| spec.default_step());
    let family = match spec.kind {
        GroupKind::DiscreteFG { .. } => enumerate_word_ball(spec, window, params.word_cap)?,
        _ => enumerate_family(spec, window, step)?,
    };
    let adapted = adapted_form(spec);
    let form = adapted.unwrap_or_else(|| Mat::identity(d));
    let ratio = match params.ratio {
        Some(r) if r > 1.0 => r,
        Some(r) => return Err(Error::Config(format!("shell ratio must exceed 1, got {r}"))),
        None => default_ratio(spec, &form, step)?,
    };
    let (r0, r1) = (ratio.sqrt().recip(), ratio.sqrt());
    let form_inv = form.inverse()?;
    let reference = form_inv.apply(&Vector::basis(d, 0));
    let (base, signs): (BaseSet, Vec<f64>) = if d == 1 {
        // Shells are disconnected on the line: use the positive interval and its mirror.
        let s = form[(0, 0)];
        let c = 0.5 * (r0 + r1) / s;
        let body = ConvexBody::Ellipsoid {
            center: Vector::from_slice(&[c]),
            shape: Mat::diag(&[2.0 * s / (r1 - r0)]),
        };
        (BaseSet::new(Geometry::Body(body), reference)?, vec![1.0, -1.0])
    } else {
        let shell = Shell::ellipsoidal(form, r0, r1)?;
        (BaseSet::new(Geometry::Shell(shell), reference)?, vec![1.0])
    };

    let mut elements = Vec::with_capacity(family.len() * signs.len());
    for m in &family.members {
        for (si, &sign) in signs.iter().enumerate() {
            let h = m.element.matrix.scale(sign);
            let geometry = base.geometry.dual_image(&h)?;
            let mut index = m.index.clone();
            if signs.len() > 1 {
                index.push(si as i64);
            }
            elements.push(CoverElement { id: elements.len(), index, transform: m.element.clone(), geometry });
        }
    }

    let (r_min, r_max) = window_annulus(spec, &form, step, window)?;
    let mut cover = InducedCover {
        spec: spec.clone(),
        base,
        family,
        elements,
        meta: WindowMeta {
            window,
            step,
            ratio,
            r_min,
            r_max,
            adapted: adapted.is_some(),
            coverage_samples: 0,
            adjacent_pairs_checked: 0,
        },
        form,
    };
    verify_origin_excluded(&cover)?;
    cover.meta.adjacent_pairs_checked = verify_adjacent(&cover, params)?;
    cover.meta.coverage_samples = verify_coverage(&cover, params)?;
    Ok(cover)
}

/// Euclidean annulus every point of which some window element covers.
fn window_annulus(spec: &GroupSpec, form: &Mat, step: f64, window: u32) -> Result<(Option<f64>, Option<f64>)> {
    let Some(mut a) = diagonal_step(spec, step)? else { return Ok((None, None)) };
    if a.det().abs() < 1.0 {
        a = a.inverse()?;
    }
    let s_inv = form.inverse()?;
    let ak = a.pow(window as i64)?;
    let ak_inv = ak.inverse()?;
    // Dual actions of A^K and A^{-K} in the adapted norm.
    let contract = *form * ak_inv.transpose() * s_inv;
    let expand = *form * ak.transpose() * s_inv;
    let sv_c = contract.singular_values();
    let sv_e = expand.singular_values();
    // |A^{KT}ξ| ≥ 1 and |A^{-KT}ξ| ≤ 1 force some element to contain ξ.
    let lo = 1.0 / sv_e[sv_e.len() - 1];
    let hi = 1.0 / sv_c[0];
    let sf = form.singular_values();
    let (e0, e1) = (lo / sf[sf.len() - 1], hi / sf[0]);
    if e0 < e1 {
        Ok((Some(e0), Some(e1)))
    } else {
        Ok((None, None))
    }
}

fn verify_origin_excluded(cover: &InducedCover) -> Result<()> {
    let origin = Vector::zeros(cover.dim());
    for e in &cover.elements {
        if e.contains(&origin) {
            return Err(Error::CoverConstruction {
                message: format!("element {:?} contains the origin", e.index),
                witness: origin.to_vec(),
            });
        }
    }
    Ok(())
}

/// Elements adjacent along a window axis must intersect.
fn verify_adjacent(cover: &InducedCover, params: &CoverParams) -> Result<usize> {
    if matches!(cover.spec.kind, GroupKind::DiscreteFG { .. }) {
        return Ok(0);
    }
    let axes = cover.family.window_axes;
    let pos: std::collections::HashMap<&[i64], usize> =
        cover.elements.iter().map(|e| (e.index.as_slice(), e.id)).collect();
    let mut pairs = Vec::new();
    for e in &cover.elements {
        for ax in 0..axes {
            let mut next = e.index.clone();
            next[ax] += 1;
            if let Some(&j) = pos.get(next.as_slice()) {
                pairs.push((e.id, j));
            }
        }
    }
    let results = par::map(&pairs, |&(i, j)| {
        intersects_with(
            &cover.elements[i].geometry,
            &cover.elements[j].geometry,
            params.budget,
            Contact::Open,
            &params.tolerances,
        )
    });
    for (&(i, j), r) in pairs.iter().zip(results) {
        if !r?.intersects() {
            return Err(Error::CoverConstruction {
                message: format!(
                    "adjacent elements {:?} and {:?} do not overlap",
                    cover.elements[i].index, cover.elements[j].index
                ),
                witness: cover.elements[j].transform.matrix.rows().concat(),
            });
        }
    }
    Ok(pairs.len())
}

/// Stratified log-radial samples of the window annulus, restricted to the support.
pub fn annulus_samples(cover: &InducedCover, count: usize, seed: u64) -> Vec<Vector> {
    let (Some(lo), Some(hi)) = (cover.meta.r_min, cover.meta.r_max) else { return Vec::new() };
    let d = cover.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    let mut attempts = 0usize;
    while out.len() < count && attempts < 20 * count + 100 {
        attempts += 1;
        let u: f64 = rng.gen();
        let r = (l0 + (l1 - l0) * ((i % count) as f64 + u) / count as f64).exp().clamp(lo, hi);
        let dir = random_direction(&mut rng, d);
        let p = dir.scale(r);
        if cover.spec.support.contains(&p) {
            out.push(p);
            i += 1;
        }
    }
    out
}

pub(crate) fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    loop {
        let mut v = Vector::zeros(d);
        for k in 0..d {
            // Box-Muller.
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            v[k] = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        let n = v.norm();
        if n > 1e-12 {
            return v.scale(1.0 / n);
        }
    }
}

fn verify_coverage(cover: &InducedCover, params: &CoverParams) -> Result<usize> {
    let pts = annulus_samples(cover, params.coverage_samples, params.seed);
    let covered = par::map(&pts, |p| cover.first_containing(p).is_some());
    if let Some(k) = covered.iter().position(|c| !c) {
        return Err(Error::CoverConstruction {
            message: "window annulus point not covered".into(),
            witness: pts[k].to_vec(),
        });
    }
    Ok(pts.len())
}

/// Intersection counts of one element against another cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NeighborRow {
    pub id: usize,
    pub index: Vec<i64>,
    pub count: usize,
    pub interior: bool,
    /// Some neighbor lies on the other cover's window edge.
    pub truncated: bool,
    pub sampled: usize,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NeighborTable {
    /// Rows of cover A counted against cover B.
    pub forward: Vec<NeighborRow>,
    /// Rows of cover B counted against cover A.
    pub backward: Vec<NeighborRow>,
    pub exact_pairs: usize,
    pub sampled_pairs: usize,
}

impl NeighborTable {
    /// Max count over interior, untruncated rows of a direction (0 when empty).
    pub fn max_interior(rows: &[NeighborRow]) -> usize {
        rows.iter().filter(|r| r.interior && !r.truncated).map(|r| r.count).max().unwrap_or(0)
    }
}

/// Concentric radial range [ρ_min, ρ_max] of an element, for pruning.
fn radial_range(g: &Geometry) -> Option<(f64, f64)> {
    let c = g.concentric()?;
    let s = c.shape.singular_values();
    Some((c.r0 / s[0], c.r1 / s[s.len() - 1]))
}

/// Which rows of a cover to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rows {
    All,
    Interior,
}

/// Counts rows of `a` against all of `b`.
pub fn directed_counts(
    a: &InducedCover,
    b: &InducedCover,
    rows: Rows,
    budget: usize,
    contact: Contact,
    tol: &Tolerances,
) -> Result<(Vec<NeighborRow>, usize, usize)> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    let ranges_b: Vec<Option<(f64, f64)>> = b.elements.iter().map(|e| radial_range(&e.geometry)).collect();
    let ids: Vec<usize> = (0..a.len()).filter(|&i| rows == Rows::All || a.is_interior(i)).collect();
    let rows_out = par::map(&ids, |&i| -> Result<(NeighborRow, usize, usize)> {
        let ea = &a.elements[i];
        let ra = radial_range(&ea.geometry);
        let mut neighbors = Vec::new();
        let (mut exact, mut sampled) = (0usize, 0usize);
        for (j, eb) in b.elements.iter().enumerate() {
            if let (Some((a0, a1)), Some((b0, b1))) = (ra, ranges_b[j]) {
                // Disjoint radial ranges cannot meet; keep a relative safety margin.
                if a1 < b0 * (1.0 - 1e-9) || b1 < a0 * (1.0 - 1e-9) {
                    exact += 1;
                    continue;
                }
            }
            let st = intersects_with(&ea.geometry, &eb.geometry, budget, contact, tol)?;
            if st.is_exact() {
                exact += 1;
            } else {
                sampled += 1;
            }
            if st.intersects() {
                neighbors.push(j);
            }
        }
        let truncated = neighbors.iter().any(|&j| b.is_edge(j));
        let row = NeighborRow {
            id: i,
            index: ea.index.clone(),
            count: neighbors.len(),
            interior: a.is_interior(i),
            truncated,
            sampled: 0,
            neighbors,
        };
        Ok((row, exact, sampled))
    });
    let mut out = Vec::with_capacity(rows_out.len());
    let (mut ex, mut sa) = (0, 0);
    for r in rows_out {
        let (mut row, e, s) = r?;
        row.sampled = s;
        ex += e;
        sa += s;
        out.push(row);
    }
    Ok((out, ex, sa))
}

/// Both directed neighbor tables between two covers (all rows).
pub fn neighbor_counts(a: &InducedCover, b: &InducedCover, budget: usize) -> Result<NeighborTable> {
    neighbor_counts_with(a, b, budget, Rows::All, &Tolerances::default())
}

pub fn neighbor_counts_with(
    a: &InducedCover,
    b: &InducedCover,
    budget: usize,
    rows: Rows,
    tol: &Tolerances,
) -> Result<NeighborTable> {
    let (forward, e1, s1) = directed_counts(a, b, rows, budget, Contact::Open, tol)?;
    let (backward, e2, s2) = directed_counts(b, a, rows, budget, Contact::Open, tol)?;
    Ok(NeighborTable { forward, backward, exact_pairs: e1 + e2, sampled_pairs: s1 + s2 })
}

/// Window statistics of a cover against itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelfStats {
    pub window: u32,
    /// Max neighbor count over interior elements.
    pub max_count: usize,
    /// Max of ‖h_i^T h_j^{-T}‖ over intersecting pairs with i interior.
    pub max_transition_norm: f64,
    pub interior_elements: usize,
}

pub fn self_stats(cover: &InducedCover, budget: usize, tol: &Tolerances) -> Result<SelfStats> {
    let (rows, _, _) = directed_counts(cover, cover, Rows::Interior, budget, Contact::Open, tol)?;
    let mut max_count = 0;
    let mut max_norm: f64 = 0.0;
    for r in &rows {
        max_count = max_count.max(r.count);
        let hi = cover.elements[r.id].transform.matrix;
        for &j in &r.neighbors {
            let hj = cover.elements[j].transform.matrix;
            let t = hi.transpose() * hj.inverse()?.transpose();
            max_norm = max_norm.max(t.op_norm());
        }
    }
    Ok(SelfStats {
        window: cover.meta.window,
        max_count,
        max_transition_norm: max_norm,
        interior_elements: rows.len(),
    })
}

/// Adjacency rows `(i, j, status)` with `i ≤ j` for intersecting pairs.
pub fn adjacency(cover: &InducedCover, budget: usize) -> Result<Vec<(usize, usize, IntersectStatus)>> {
    let tol = Tolerances::default();
    let rows = par::map_range(cover.len(), |i| -> Result<Vec<(usize, usize, IntersectStatus)>> {
        let mut out = Vec::new();
        for j in i..cover.len() {
            let st = intersects_with(
                &cover.elements[i].geometry,
                &cover.elements[j].geometry,
                budget,
                Contact::Open,
                &tol,
            )?;
            if st.intersects() {
                out.push((i, j, st));
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic() -> GroupSpec {
        GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap()
    }

    #[test]
    fn dyadic_cover_geometry() {
        let c = build_induced_cover(&dyadic(), 4, &CoverParams::default()).unwrap();
        assert_eq!(c.len(), 9);
        assert!((c.meta.ratio - 4.0).abs() < 1e-12);
        assert!((c.meta.r_min.unwrap() - 1.0 / 16.0).abs() < 1e-12);
        assert!((c.meta.r_max.unwrap() - 16.0).abs() < 1e-9);
        assert_eq!(c.meta.coverage_samples, 4096);
    }

    #[test]
    fn scalar_similitude_matches_dyadic() {
        let a = build_induced_cover(&dyadic(), 4, &CoverParams::default()).unwrap();
        let b = build_induced_cover(&GroupSpec::scalar_similitude(2).unwrap(), 4, &CoverParams::default())
            .unwrap();
        for (x, y) in a.elements.iter().zip(&b.elements) {
            assert!(x.transform.matrix.max_abs_diff(&y.transform.matrix) < 1e-12);
        }
    }

    #[test]
    fn example_powers_are_eccentric() {
        let spec = GroupSpec::cyclic(Mat::diag(&[3.0, 2.0, 2.0])).unwrap();
        let c = build_induced_cover(&spec, 3, &CoverParams::default()).unwrap();
        for e in &c.elements {
            let k = e.index[0];
            let Geometry::Shell(s) = &e.geometry else { panic!() };
            let ConvexBody::Ellipsoid { shape, .. } = &s.outer else { panic!() };
            let sv = shape.singular_values();
            let ratio = sv[0] / sv[2];
            assert!((ratio - 1.5f64.powi(k.abs() as i32)).abs() < 1e-9 * ratio, "k = {k}");
        }
    }

    #[test]
    fn self_counts_are_three() {
        let c = build_induced_cover(&dyadic(), 8, &CoverParams::default()).unwrap();
        let t = neighbor_counts(&c, &c, 256).unwrap();
        assert_eq!(t.forward, t.backward);
        assert_eq!(NeighborTable::max_interior(&t.forward), 3);
    }

    #[test]
    fn non_admissible_is_refused() {
        let spec = GroupSpec::one_parameter(Mat::diag(&[1.0, -1.0])).unwrap();
        assert!(matches!(
            build_induced_cover(&spec, 4, &CoverParams::default()),
            Err(Error::CoverConstruction { .. })
        ));
    }

    #[test]
    fn conjugated_rotation_flow_gets_adapted_form() {
        let x = Mat::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let m = Mat::from_rows(&[vec![3.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let spec = crate::matgroup::conjugate_spec(&GroupSpec::one_parameter(x).unwrap(), &m).unwrap();
        let s = adapted_form(&spec).unwrap();
        let GroupKind::OneParameter { generator } = spec.kind else { panic!() };
        let t = mat_exp(&generator.scale(0.7)).inverse().unwrap().transpose();
        let c = (s * t * s.inverse().unwrap()).singular_values();
        assert!((c[0] / c[1] - 1.0).abs() < 1e-9);
    }
}
