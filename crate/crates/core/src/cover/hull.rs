//! Compact connected sets through finitely many points of an open region.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matgroup::Vector;

/// An open region given by a margin: positive inside and never larger than
/// the distance to the complement.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn margin(&self, xi: &Vector) -> f64;
}

/// `{r_min < |ξ| < r_max}`.
#[derive(Debug, Clone, Copy)]
pub struct Annulus {
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Region for Annulus {
    fn dim(&self) -> usize {
        self.dim
    }

    fn margin(&self, xi: &Vector) -> f64 {
        let r = xi.norm();
        (r - self.r_min).min(self.r_max - r)
    }
}

/// ℝ^d \ {0}.
#[derive(Debug, Clone, Copy)]
pub struct Punctured {
    pub dim: usize,
}

impl Region for Punctured {
    fn dim(&self) -> usize {
        self.dim
    }

    fn margin(&self, xi: &Vector) -> f64 {
        xi.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

/// Balls around the input points joined by polylines.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HullDescriptor {
    pub balls: Vec<Ball>,
    pub paths: Vec<Vec<Vector>>,
    /// Connected components of the ball/path incidence graph.
    pub components: usize,
    pub samples_checked: usize,
}

const SEGMENT_SAMPLES: usize = 8;

fn segment_ok(region: &dyn Region, a: &Vector, b: &Vector) -> bool {
    let mid = a.lerp(b, 0.5);
    region.margin(&mid) > 0.5 * (*b - *a).norm()
}

/// Builds a compact connected subset of `region` containing all `points`.
///
/// Grid search doubles the resolution until a path is found or the node
/// count exceeds `grid_budget`.
pub fn connected_hull(points: &[Vector], region: &dyn Region, grid_budget: usize) -> Result<HullDescriptor> {
    let d = region.dim();
    if points.is_empty() {
        return Err(Error::Config("connected hull needs at least one point".into()));
    }
    for p in points {
        if p.dim() != d {
            return Err(Error::Dimension { expected: d, found: p.dim() });
        }
        if !(region.margin(p) > 0.0) {
            return Err(Error::Config(format!("point {:?} is not inside the region", p.to_vec())));
        }
    }
    let balls: Vec<Ball> =
        points.iter().map(|p| Ball { center: *p, radius: 0.5 * region.margin(p) }).collect();
    if points.len() == 1 {
        return Ok(HullDescriptor { balls, paths: Vec::new(), components: 1, samples_checked: 0 });
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (0..d).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max).max(1e-3);
    for k in 0..d {
        lo[k] -= span;
        hi[k] += span;
    }
    let mut n = 8usize;
    loop {
        let nodes = (n + 1).pow(d as u32);
        if nodes > grid_budget {
            return Err(Error::RegionDisconnectedOrTooTight(format!(
                "no path within a grid of {grid_budget} nodes"
            )));
        }
        if let Some(paths) = grid_paths(points, region, &lo, &hi, n) {
            let mut checked = 0;
            for path in &paths {
                for w in path.windows(2) {
                    for s in 0..=SEGMENT_SAMPLES {
                        let q = w[0].lerp(&w[1], s as f64 / SEGMENT_SAMPLES as f64);
                        checked += 1;
                        if !(region.margin(&q) > 0.0) {
                            return Err(Error::Numerical("hull path left the region".into()));
                        }
                    }
                }
            }
            return Ok(HullDescriptor { balls, paths, components: 1, samples_checked: checked });
        }
        n *= 2;
    }
}

fn grid_paths(points: &[Vector], region: &dyn Region, lo: &Vector, hi: &Vector, n: usize) -> Option<Vec<Vec<Vector>>> {
    let d = region.dim();
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / n as f64).collect();
    let node_pos = |idx: &[usize]| -> Vector {
        let mut v = Vector::zeros(d);
        for k in 0..d {
            v[k] = lo[k] + idx[k] as f64 * h[k];
        }
        v
    };
    // Attach each input point to the corners of its cell.
    let attach = |p: &Vector| -> Vec<Vec<usize>> {
        let base: Vec<usize> =
            (0..d).map(|k| (((p[k] - lo[k]) / h[k]).floor().max(0.0) as usize).min(n - 1)).collect();
        let mut out = Vec::new();
        for corner in 0..(1usize << d) {
            let idx: Vec<usize> = (0..d).map(|k| base[k] + ((corner >> k) & 1)).collect();
            if segment_ok(region, p, &node_pos(&idx)) {
                out.push(idx);
            }
        }
        out
    };
    let starts = attach(&points[0]);
    let mut parent: HashMap<Vec<usize>, Option<Vec<usize>>> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in starts {
        parent.insert(s.clone(), None);
        queue.push_back(s);
    }
    while let Some(cur) = queue.pop_front() {
        let pc = node_pos(&cur);
        for k in 0..d {
            for delta in [-1i64, 1] {
                let v = cur[k] as i64 + delta;
                if v < 0 || v > n as i64 {
                    continue;
                }
                let mut next = cur.clone();
                next[k] = v as usize;
                if parent.contains_key(&next) {
                    continue;
                }
                if segment_ok(region, &pc, &node_pos(&next)) {
                    parent.insert(next.clone(), Some(cur.clone()));
                    queue.push_back(next);
                }
            }
        }
    }
    let mut paths = Vec::new();
    for p in &points[1..] {
        let end = attach(p).into_iter().find(|e| parent.contains_key(e))?;
        let mut chain = vec![*p];
        let mut cur = Some(end);
        while let Some(c) = cur {
            chain.push(node_pos(&c));
            cur = parent[&c].clone();
        }
        chain.push(points[0]);
        chain.reverse();
        paths.push(chain);
    }
    Some(paths)
}
