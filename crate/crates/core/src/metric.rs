//! Chain metrics on covers, orbit maps and quasi-isometry certificates.

use std::collections::VecDeque;

use serde::Serialize;

use crate::config::Tolerances;
use crate::cover::{adjacency, InducedCover, IntersectStatus};
use crate::error::{Error, Result};
use crate::matgroup::{dual_action, word_distance, Distance, GeneratingSet, GroupElement, Vector};
use crate::par;

/// Intersection graph of a cover. Every node carries a self-loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainGraph {
    pub nodes: usize,
    /// Sorted neighbor lists, self included.
    pub adjacency: Vec<Vec<usize>>,
    /// Parallel to `adjacency`: whether the edge was decided exactly.
    pub exact: Vec<Vec<bool>>,
}

impl ChainGraph {
    pub fn from_cover(cover: &InducedCover, budget: usize) -> Result<ChainGraph> {
        let edges = adjacency(cover, budget)?;
        Ok(ChainGraph::from_edges(cover.len(), &edges))
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize, IntersectStatus)]) -> ChainGraph {
        let mut lists: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nodes];
        for i in 0..nodes {
            lists[i].push((i, true));
        }
        for &(i, j, st) in edges {
            if i == j {
                lists[i][0].1 = st.is_exact();
                continue;
            }
            lists[i].push((j, st.is_exact()));
            lists[j].push((i, st.is_exact()));
        }
        let mut adjacency = Vec::with_capacity(nodes);
        let mut exact = Vec::with_capacity(nodes);
        for mut l in lists {
            l.sort_by_key(|e| e.0);
            l.dedup_by_key(|e| e.0);
            adjacency.push(l.iter().map(|e| e.0).collect());
            exact.push(l.iter().map(|e| e.1).collect());
        }
        ChainGraph { nodes, adjacency, exact }
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().enumerate().map(|(i, l)| l.iter().filter(|&&j| j > i).count()).sum()
    }

    pub fn sampled_edges(&self) -> usize {
        self.adjacency
            .iter()
            .zip(&self.exact)
            .enumerate()
            .map(|(i, (l, e))| l.iter().zip(e).filter(|(&j, &x)| j > i && !x).count())
            .sum()
    }
}

/// BFS distances in sets: source nodes are at distance 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceTable {
    pub sources: Vec<usize>,
    pub distances: Vec<Distance>,
}

impl DistanceTable {
    /// Rows `(index, distance)` for CSV export.
    pub fn rows(&self) -> Vec<(usize, String)> {
        self.distances.iter().enumerate().map(|(i, d)| (i, d.to_string())).collect()
    }
}

pub fn bfs(graph: &ChainGraph, sources: &[usize]) -> DistanceTable {
    let mut dist = vec![Distance::Infinite; graph.nodes];
    let mut queue = VecDeque::new();
    let mut src: Vec<usize> = sources.to_vec();
    src.sort_unstable();
    src.dedup();
    for &s in &src {
        dist[s] = Distance::Finite(1);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let Distance::Finite(du) = dist[u] else { continue };
        for &v in &graph.adjacency[u] {
            if dist[v] == Distance::Infinite {
                dist[v] = Distance::Finite(du + 1);
                queue.push_back(v);
            }
        }
    }
    DistanceTable { sources: src, distances: dist }
}

/// Least number of cover sets in a chain from ξ to η; ∞ beyond `max_len`.
pub fn chain_distance(
    cover: &InducedCover,
    graph: &ChainGraph,
    xi: &Vector,
    eta: &Vector,
    max_len: u64,
) -> Result<Distance> {
    if xi == eta {
        return Ok(Distance::Finite(0));
    }
    let from = cover.containing_open(xi);
    if from.is_empty() {
        return Err(Error::PointNotCovered(xi.to_vec()));
    }
    let to = cover.containing_open(eta);
    if to.is_empty() {
        return Err(Error::PointNotCovered(eta.to_vec()));
    }
    let table = bfs(graph, &from);
    let best = to.iter().map(|&j| table.distances[j]).min().unwrap_or(Distance::Infinite);
    Ok(match best {
        Distance::Finite(m) if m <= max_len => best,
        _ => Distance::Infinite,
    })
}

/// p(h, ξ) = h^{-T} ξ.
pub fn orbit_map(h: &GroupElement, xi: &Vector) -> Result<Vector> {
    dual_action(h, xi)
}

/// Right inverse of the orbit map through the lowest-index containing element.
pub fn quasi_inverse_orbit(cover: &InducedCover, eta: &Vector) -> Result<(usize, GroupElement, Vector)> {
    let id = cover.first_containing(eta).ok_or_else(|| Error::PointNotCovered(eta.to_vec()))?;
    let h = cover.elements[id].transform.clone();
    let xi = h.matrix.apply_transpose(eta);
    Ok((id, h, xi))
}

/// One pair of points with domain and codomain distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairSample {
    pub a: usize,
    pub b: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowPairs {
    pub window: u32,
    pub pairs: Vec<PairSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Residual {
    pub window: u32,
    /// Largest excess over the fitted bounds (0 when all pairs satisfy them).
    pub max_violation: f64,
    /// Smallest R2 that works in this window with the fitted R1.
    pub required_r2: f64,
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QiVerdict {
    Certified,
    ViolatedTrend,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QiCertificate {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub verdict: QiVerdict,
    /// Window the constants were fitted on.
    pub fit_window: u32,
    pub residuals: Vec<Residual>,
}

/// Grid of candidate R1 values: 2^{k/8} on [1, 64].
pub fn r1_grid() -> Vec<f64> {
    (0..=48).map(|k| 2f64.powf(k as f64 / 8.0)).collect()
}

/// Smallest R2 with R1⁻¹dx − R2 ≤ dy ≤ R1 dx + R2 on all pairs, and its witness.
pub fn required_r2(pairs: &[PairSample], r1: f64) -> (f64, Option<(usize, usize)>) {
    let mut best = 0.0;
    let mut witness = None;
    for p in pairs {
        let need = (p.dy - r1 * p.dx).max(p.dx / r1 - p.dy);
        if need > best {
            best = need;
            witness = Some((p.a, p.b));
        }
    }
    (best, witness)
}

/// Fits (R1, R2) on the smallest window and checks them on the larger ones.
///
/// R1 minimizes R1 + R2(R1) over the grid, ties going to the smaller R1.
pub fn fit_quasi_isometry(windows: &[WindowPairs], r3: f64, tol: &Tolerances) -> Result<QiCertificate> {
    if windows.len() < 2 {
        return Err(Error::Config("quasi-isometry fitting needs at least two windows".into()));
    }
    for w in windows {
        if w.pairs.len() < 100 {
            return Err(Error::Config(format!(
                "window {} has {} pairs; at least 100 are required",
                w.window,
                w.pairs.len()
            )));
        }
    }
    let mut ws: Vec<&WindowPairs> = windows.iter().collect();
    ws.sort_by_key(|w| w.window);
    let fit = ws[0];
    let mut r1 = 1.0;
    let mut r2 = f64::INFINITY;
    let mut score = f64::INFINITY;
    for c in r1_grid() {
        let (need, _) = required_r2(&fit.pairs, c);
        if c + need < score - 1e-12 {
            score = c + need;
            r1 = c;
            r2 = need;
        }
    }
    let residuals: Vec<Residual> = ws
        .iter()
        .map(|w| {
            let (need, witness) = required_r2(&w.pairs, r1);
            Residual { window: w.window, max_violation: (need - r2).max(0.0), required_r2: need, witness }
        })
        .collect();
    let clean = residuals.iter().all(|r| r.max_violation <= 1e-9);
    let growing = residuals.windows(2).all(|p| p[1].required_r2 > (1.0 + tol.qi_growth) * p[0].required_r2.max(1e-9));
    let verdict = if clean {
        QiVerdict::Certified
    } else if growing {
        QiVerdict::ViolatedTrend
    } else {
        QiVerdict::Inconclusive
    };
    Ok(QiCertificate { r1, r2, r3, verdict, fit_window: fit.window, residuals })
}

/// Word distances of all member pairs with chart radius ≤ `window`.
fn member_ids(cover: &InducedCover, window: u32) -> Vec<usize> {
    (0..cover.len()).filter(|&i| cover.radius_of(i) <= window as u64).collect()
}

/// Pairs for the orbit map p_ξ : (H, d_W) → (𝒪, d_𝒬) restricted to the members of radius ≤ `window`.
///
/// The cover must extend far enough for p_ξ of those members to be covered.
pub fn orbit_map_pairs(
    cover: &InducedCover,
    graph: &ChainGraph,
    w: &GeneratingSet,
    xi: &Vector,
    window: u32,
) -> Result<WindowPairs> {
    let ids = member_ids(cover, window);
    let images: Vec<Vector> = ids
        .iter()
        .map(|&i| orbit_map(&cover.elements[i].transform, xi))
        .collect::<Result<_>>()?;
    let tables = par::map(&images, |p| -> Result<DistanceTable> {
        let from = cover.containing_open(p);
        if from.is_empty() {
            return Err(Error::PointNotCovered(p.to_vec()));
        }
        Ok(bfs(graph, &from))
    });
    let tables: Vec<DistanceTable> = tables.into_iter().collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (x, &i) in ids.iter().enumerate() {
        for (y, &j) in ids.iter().enumerate().skip(x + 1) {
            let dx = word_distance(&cover.spec, w, &cover.elements[i].transform, &cover.elements[j].transform)?;
            let to = cover.containing_open(&images[y]);
            let dy = if images[x] == images[y] {
                Distance::Finite(0)
            } else {
                to.iter().map(|&t| tables[x].distances[t]).min().unwrap_or(Distance::Infinite)
            };
            let (Some(dx), Some(dy)) = (dx.finite(), dy.finite()) else {
                return Err(Error::Truncation(format!("infinite distance between members {i} and {j}")));
            };
            pairs.push(PairSample { a: i, b: j, dx: dx as f64, dy: dy as f64 });
        }
    }
    Ok(WindowPairs { window, pairs })
}

/// The transition map p^{(2)}_* ∘ p^{(1)}_ξ on one member of the first group.
pub fn transition_map(cover_b: &InducedCover, h: &GroupElement, xi: &Vector) -> Result<usize> {
    let eta = orbit_map(h, xi)?;
    Ok(quasi_inverse_orbit(cover_b, &eta)?.0)
}

/// Pairs for the transition map between two word metrics, using members of
/// `cover_a` with radius ≤ `window`.
pub fn transition_pairs(
    cover_a: &InducedCover,
    w_a: &GeneratingSet,
    cover_b: &InducedCover,
    w_b: &GeneratingSet,
    xi: &Vector,
    window: u32,
) -> Result<WindowPairs> {
    let ids = member_ids(cover_a, window);
    let images: Vec<usize> = ids
        .iter()
        .map(|&i| transition_map(cover_b, &cover_a.elements[i].transform, xi))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for x in 0..ids.len() {
        for y in x + 1..ids.len() {
            let ga = &cover_a.elements[ids[x]].transform;
            let ha = &cover_a.elements[ids[y]].transform;
            let gb = &cover_b.elements[images[x]].transform;
            let hb = &cover_b.elements[images[y]].transform;
            let dx = word_distance(&cover_a.spec, w_a, ga, ha)?;
            let dy = word_distance(&cover_b.spec, w_b, gb, hb)?;
            let (Some(dx), Some(dy)) = (dx.finite(), dy.finite()) else {
                return Err(Error::Truncation("infinite word distance".into()));
            };
            pairs.push(PairSample { a: ids[x], b: ids[y], dx: dx as f64, dy: dy as f64 });
        }
    }
    Ok(WindowPairs { window, pairs })
}

/// Max word distance from a codomain member to the image of the transition map.
pub fn transition_density(
    cover_a: &InducedCover,
    cover_b: &InducedCover,
    w_b: &GeneratingSet,
    xi: &Vector,
    window: u32,
) -> Result<f64> {
    let mut images: Vec<usize> = member_ids(cover_a, window)
        .iter()
        .map(|&i| transition_map(cover_b, &cover_a.elements[i].transform, xi))
        .collect::<Result<_>>()?;
    images.sort_unstable();
    images.dedup();
    let lo = images.iter().map(|&i| cover_b.elements[i].index[0]).min().unwrap_or(0);
    let hi = images.iter().map(|&i| cover_b.elements[i].index[0]).max().unwrap_or(0);
    let mut worst = 0u64;
    for e in &cover_b.elements {
        if e.index[0] < lo || e.index[0] > hi {
            continue;
        }
        let mut best = u64::MAX;
        for &i in &images {
            let d = word_distance(&cover_b.spec, w_b, &e.transform, &cover_b.elements[i].transform)?;
            best = best.min(d.finite().unwrap_or(u64::MAX));
        }
        worst = worst.max(best);
    }
    Ok(worst as f64)
}

/// Minimal constants of the two orbit-map estimates over one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichWindow {
    pub window: u32,
    /// Least R with d_W(g, h) ≤ R·d_𝒬(p_ξ(g), p_η(h)) + R.
    pub upper: f64,
    /// Least R with d_𝒬(p_ξ(g), p_η(h)) ≤ R·d_W(g, h) + R.
    pub lower: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichReport {
    pub windows: Vec<SandwichWindow>,
    pub stable: bool,
    /// Constants are maxima over the sampled (ξ, η); not a uniform bound.
    pub sampled_bound: bool,
}

/// Measures both orbit-map estimates for base points ξ, η over nested windows.
pub fn sandwich_check(
    cover: &InducedCover,
    graph: &ChainGraph,
    w: &GeneratingSet,
    xi: &Vector,
    eta: &Vector,
    windows: &[u32],
    tol: &Tolerances,
) -> Result<SandwichReport> {
    if !cover.base.contains(xi) || !cover.base.contains(eta) {
        return Err(Error::Config("ξ and η must lie in the base set".into()));
    }
    let mut out = Vec::new();
    for &win in windows {
        let ids = member_ids(cover, win);
        let px: Vec<Vector> =
            ids.iter().map(|&i| orbit_map(&cover.elements[i].transform, xi)).collect::<Result<_>>()?;
        let py: Vec<Vector> =
            ids.iter().map(|&i| orbit_map(&cover.elements[i].transform, eta)).collect::<Result<_>>()?;
        let rows = par::map_range(ids.len(), |x| -> Result<(f64, f64, usize)> {
            let mut up: f64 = 0.0;
            let mut lo: f64 = 0.0;
            let mut n = 0;
            for y in 0..ids.len() {
                let dw = word_distance(
                    &cover.spec,
                    w,
                    &cover.elements[ids[x]].transform,
                    &cover.elements[ids[y]].transform,
                )?
                .finite()
                .ok_or_else(|| Error::Truncation("infinite word distance".into()))?;
                let dq = chain_distance(cover, graph, &px[x], &py[y], u64::MAX)?
                    .finite()
                    .ok_or_else(|| Error::Truncation("disconnected chain graph".into()))?;
                up = up.max(dw as f64 / (dq as f64 + 1.0));
                lo = lo.max(dq as f64 / (dw as f64 + 1.0));
                n += 1;
            }
            Ok((up, lo, n))
        });
        let (mut up, mut lo, mut n) = (0.0f64, 0.0f64, 0);
        for r in rows {
            let (u, l, c) = r?;
            up = up.max(u);
            lo = lo.max(l);
            n += c;
        }
        out.push(SandwichWindow { window: win, upper: up, lower: lo, pairs: n });
    }
    let stable = out.windows(2).all(|p| {
        p[1].upper <= (1.0 + tol.qi_growth) * p[0].upper.max(1.0)
            && p[1].lower <= (1.0 + tol.qi_growth) * p[0].lower.max(1.0)
    });
    Ok(SandwichReport { windows: out, stable, sampled_bound: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{build_induced_cover, CoverParams};
    use crate::matgroup::{GroupSpec, Mat};

    fn dyadic(window: u32) -> InducedCover {
        let spec = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap();
        build_induced_cover(&spec, window, &CoverParams::default()).unwrap()
    }

    /// Least number of open radial intervals (2^{j−1}, 2^{j+1}) chaining
    /// radius a to radius b; consecutive intervals overlap, others at most touch.
    fn interval_chain(a: f64, b: f64) -> u64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        // Largest j with 2^{j−1} < lo.
        let mut j = (lo.log2() + 1.0).ceil() as i64 - 1;
        let mut n = 1;
        while 2f64.powi((j + 1) as i32) <= hi {
            j += 1;
            n += 1;
        }
        n
    }

    #[test]
    fn chain_basics() {
        let c = dyadic(8);
        let g = ChainGraph::from_cover(&c, 256).unwrap();
        let x = Vector::from_slice(&[1.0, 0.0]);
        assert_eq!(chain_distance(&c, &g, &x, &x, 100).unwrap(), Distance::Finite(0));
        let y = Vector::from_slice(&[0.0, 1.1]);
        assert_eq!(chain_distance(&c, &g, &x, &y, 100).unwrap(), Distance::Finite(1));
        let far = Vector::from_slice(&[64.0, 0.0]);
        let d = chain_distance(&c, &g, &x, &far, 100).unwrap();
        assert_eq!(d, Distance::Finite(interval_chain(1.0, 64.0)));
        assert_eq!(chain_distance(&c, &g, &x, &far, 2).unwrap(), Distance::Infinite);
        assert!(matches!(
            chain_distance(&c, &g, &x, &Vector::from_slice(&[1e6, 0.0]), 100),
            Err(Error::PointNotCovered(_))
        ));
    }

    #[test]
    fn quasi_inverse_is_right_inverse() {
        let c = dyadic(6);
        let eta = Vector::from_slice(&[0.3, -2.0]);
        let (_, h, xi) = quasi_inverse_orbit(&c, &eta).unwrap();
        assert!(c.base.contains(&xi));
        let back = orbit_map(&h, &xi).unwrap();
        assert!((back - eta).norm() <= 1e-12 * eta.norm());
    }

    #[test]
    fn identity_map_certifies() {
        let mk = |window: u32, n: usize| WindowPairs {
            window,
            pairs: (0..n).map(|k| PairSample { a: k, b: k + 1, dx: k as f64, dy: k as f64 }).collect(),
        };
        let cert = fit_quasi_isometry(&[mk(8, 120), mk(16, 240)], 0.0, &Tolerances::default()).unwrap();
        assert_eq!(cert.r1, 1.0);
        assert_eq!(cert.r2, 0.0);
        assert_eq!(cert.verdict, QiVerdict::Certified);
    }

    #[test]
    fn quadratic_map_violates() {
        let mk = |window: u32| WindowPairs {
            window,
            pairs: (0..(window as usize * 16))
                .map(|k| {
                    let x = k as f64 / 16.0;
                    PairSample { a: k, b: 0, dx: x, dy: x * x }
                })
                .collect(),
        };
        let cert = fit_quasi_isometry(&[mk(8), mk(16), mk(32)], 0.0, &Tolerances::default()).unwrap();
        assert_eq!(cert.verdict, QiVerdict::ViolatedTrend);
    }

    #[test]
    fn too_few_pairs() {
        let w = WindowPairs { window: 4, pairs: vec![] };
        assert!(matches!(
            fit_quasi_isometry(&[w.clone(), w], 0.0, &Tolerances::default()),
            Err(Error::Config(_))
        ));
    }
}
