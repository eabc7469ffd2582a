//! Word metrics on supported groups.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::family::matrix_key;
use super::mat::{Mat, Vector};
use super::spec::{Coords, GroupElement, GroupKind, GroupSpec};
use super::expm::mat_exp;
use crate::error::{Error, Result};

/// Quantum used to hash matrices in Cayley graph searches.
pub const HASH_QUANTUM: f64 = 1e-8;

/// Values within this distance of an integer count as that integer.
const SNAP: f64 = 1e-9;

/// Default BFS radius cap for finitely generated groups.
pub const DEFAULT_MAX_RADIUS: u32 = 12;

/// Nonnegative integer or ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(n) => Some(n),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn saturating_add(self, other: Distance) -> Distance {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a + b),
            _ => Distance::Infinite,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(n) => write!(f, "{n}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

/// Symmetric unit neighborhood W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum GeneratingSet {
    /// Coordinate box of the given half-width around the identity.
    Box { half_width: f64 },
    /// Finite generator list closed under inversion, with a BFS radius cap.
    Generators { list: Vec<Mat>, max_radius: u32 },
}

impl GeneratingSet {
    /// Box with the family step for coordinate charts, generators otherwise.
    pub fn default_for(spec: &GroupSpec) -> Result<Self> {
        match spec.kind {
            GroupKind::Cyclic { .. } | GroupKind::DiscreteFG { .. } => {
                GeneratingSet::generators(spec.symmetric_generators()?, DEFAULT_MAX_RADIUS)
            }
            _ => Ok(GeneratingSet::Box { half_width: spec.default_step() }),
        }
    }

    /// Builds a generator set, adding any missing inverses.
    pub fn generators(list: Vec<Mat>, max_radius: u32) -> Result<Self> {
        let mut out: Vec<Mat> = Vec::with_capacity(2 * list.len());
        let mut keys = HashSet::new();
        for g in &list {
            for m in [*g, g.inverse()?] {
                if keys.insert(matrix_key(&m)) {
                    out.push(m);
                }
            }
        }
        Ok(GeneratingSet::Generators { list: out, max_radius })
    }
}

fn snapped_ceil(x: f64) -> u64 {
    let r = x.round();
    let v = if (x - r).abs() < SNAP { r } else { x.ceil() };
    v.max(0.0) as u64
}

fn box_count(delta: &[f64], half_width: f64) -> u64 {
    let m = delta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    snapped_ceil(m / half_width)
}

fn rotation_matrix(dim: usize, rot: &[f64]) -> Result<Mat> {
    match (dim, rot.len()) {
        (2, 1) => Ok(Mat::rotation2(rot[0])),
        (3, 3) => Ok(mat_exp(&Mat::skew3(&Vector::from_slice(rot)))),
        _ => Err(Error::Dimension { expected: dim - 1, found: rot.len() }),
    }
}

/// Angle of the rotation R_g⁻¹R_h, in [0, π].
fn relative_angle(dim: usize, a: &[f64], b: &[f64]) -> Result<f64> {
    if dim == 2 {
        let d = (b[0] - a[0]).rem_euclid(2.0 * std::f64::consts::PI);
        return Ok(d.min(2.0 * std::f64::consts::PI - d));
    }
    let r = rotation_matrix(dim, a)?.transpose() * rotation_matrix(dim, b)?;
    let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// d_W(g, h) = min{m : g⁻¹h ∈ W^m}.
pub fn word_distance(
    spec: &GroupSpec,
    w: &GeneratingSet,
    g: &GroupElement,
    h: &GroupElement,
) -> Result<Distance> {
    match (&spec.kind, w) {
        (GroupKind::DiscreteFG { .. }, GeneratingSet::Generators { list, max_radius }) => {
            let target = g.matrix.inverse()? * h.matrix;
            Ok(cayley_bfs(&target, list, *max_radius))
        }
        (GroupKind::DiscreteFG { .. }, GeneratingSet::Box { .. }) => Err(Error::Config(
            "finitely generated groups need an explicit generator list".into(),
        )),
        (GroupKind::Cyclic { .. }, _) => {
            let (Some(Coords::Power(m)), Some(Coords::Power(n))) = (&g.coords, &h.coords) else {
                return Err(Error::MissingCoords);
            };
            let diff = (m - n).unsigned_abs();
            Ok(Distance::Finite(match w {
                GeneratingSet::Box { half_width } => snapped_ceil(diff as f64 / half_width),
                GeneratingSet::Generators { .. } => diff,
            }))
        }
        (_, GeneratingSet::Generators { list, max_radius }) => {
            let target = g.matrix.inverse()? * h.matrix;
            Ok(cayley_bfs(&target, list, *max_radius))
        }
        (_, GeneratingSet::Box { half_width }) => {
            if !(*half_width > 0.0) {
                return Err(Error::Config("box half-width must be positive".into()));
            }
            match (&g.coords, &h.coords) {
                (Some(Coords::Flow(s)), Some(Coords::Flow(t))) if s.len() == t.len() => {
                    let delta: Vec<f64> = s.iter().zip(t).map(|(a, b)| b - a).collect();
                    Ok(Distance::Finite(box_count(&delta, *half_width)))
                }
                (
                    Some(Coords::Similitude { log_scale: s1, rotation: r1 }),
                    Some(Coords::Similitude { log_scale: s2, rotation: r2 }),
                ) => {
                    let scale = box_count(&[s2 - s1], *half_width);
                    let angle = relative_angle(spec.dim, r1, r2)?;
                    let rot = box_count(&[angle], *half_width);
                    Ok(Distance::Finite(scale.max(rot)))
                }
                _ => Err(Error::MissingCoords),
            }
        }
    }
}

/// Word length of `target` over `gens`, or ∞ beyond `max_radius`.
pub fn cayley_bfs(target: &Mat, gens: &[Mat], max_radius: u32) -> Distance {
    let d = target.dim();
    let goal = matrix_key(target);
    let id = Mat::identity(d);
    if matrix_key(&id) == goal {
        return Distance::Finite(0);
    }
    let mut seen = HashSet::new();
    seen.insert(matrix_key(&id));
    let mut queue = VecDeque::new();
    queue.push_back((id, 0u32));
    while let Some((m, r)) = queue.pop_front() {
        if r >= max_radius {
            continue;
        }
        for g in gens {
            let next = m * *g;
            let key = matrix_key(&next);
            if key == goal {
                return Distance::Finite(r as u64 + 1);
            }
            if seen.insert(key) {
                queue.push_back((next, r + 1));
            }
        }
    }
    Distance::Infinite
}
