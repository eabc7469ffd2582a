//! Well-spread families: lattice samples of the group chart.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::mat::Mat;
use super::spec::{Coords, GroupElement, GroupKind, GroupSpec};
use crate::error::{Error, Result};

/// Number of rotation angles in the planar similitude net.
pub const ROTATION_NET_2D: usize = 8;

/// Lattice step of the rotation-vector net for three-dimensional similitudes.
pub const ROTATION_STEP_3D: f64 = PI / 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    /// Lattice index. Leading entries are the non-compact (window) axes; for
    /// similitudes the last entry enumerates the rotation net.
    pub index: Vec<i64>,
    pub element: GroupElement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellSpreadFamily {
    pub spec: GroupSpec,
    pub window: u32,
    pub step: f64,
    /// Number of leading index entries that range over the window.
    pub window_axes: usize,
    /// Every chart point of the window is within this chart distance of a member.
    pub density: f64,
    /// Minimal chart separation between distinct members.
    pub discreteness: f64,
    pub members: Vec<FamilyMember>,
}

impl WellSpreadFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Max-norm of the window part of a member index.
    pub fn radius_of(&self, index: &[i64]) -> u64 {
        index[..self.window_axes].iter().map(|i| i.unsigned_abs()).max().unwrap_or(0)
    }

    /// Position of the given lattice index, if enumerated.
    pub fn position(&self, index: &[i64]) -> Option<usize> {
        self.members.iter().position(|m| m.index == index)
    }

    pub fn matrices(&self) -> Vec<Mat> {
        self.members.iter().map(|m| m.element.matrix).collect()
    }
}

/// Rotation net used for similitude families.
pub fn rotation_net(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        2 => (0..ROTATION_NET_2D)
            .map(|m| vec![2.0 * PI * m as f64 / ROTATION_NET_2D as f64])
            .collect(),
        3 => {
            let mut out = Vec::new();
            for a in -2i32..=2 {
                for b in -2i32..=2 {
                    for c in -2i32..=2 {
                        if a * a + b * b + c * c <= 4 {
                            out.push(vec![
                                a as f64 * ROTATION_STEP_3D,
                                b as f64 * ROTATION_STEP_3D,
                                c as f64 * ROTATION_STEP_3D,
                            ]);
                        }
                    }
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn lattice(axes: usize, window: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..axes {
        let mut next = Vec::with_capacity(out.len() * (2 * window as usize + 1));
        for prefix in &out {
            for i in -window..=window {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Samples the chart on the lattice `step·ℤ^k` restricted to the window.
pub fn enumerate_family(spec: &GroupSpec, window: u32, step: f64) -> Result<WellSpreadFamily> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("family step must be positive, got {step}")));
    }
    if window < 1 {
        return Err(Error::Config("family window must be at least 1".into()));
    }
    let w = window as i64;
    let mut members = Vec::new();
    let (window_axes, density, discreteness) = match &spec.kind {
        GroupKind::OneParameter { .. } | GroupKind::ScalarSimilitude => {
            for idx in lattice(1, w) {
                let t = idx[0] as f64 * step;
                members.push(FamilyMember { element: spec.element(Coords::Flow(vec![t]))?, index: idx });
            }
            (1, step / 2.0, step)
        }
        GroupKind::AbelianFlow { generators } => {
            let k = generators.len();
            for idx in lattice(k, w) {
                let t = idx.iter().map(|&i| i as f64 * step).collect();
                members.push(FamilyMember { element: spec.element(Coords::Flow(t))?, index: idx });
            }
            (k, step / 2.0, step)
        }
        GroupKind::Cyclic { .. } => {
            // The lattice of ℤ is ℤ itself; `step` is a power stride.
            let stride = step.round().max(1.0) as i64;
            for idx in lattice(1, w) {
                members.push(FamilyMember {
                    element: spec.element(Coords::Power(idx[0] * stride))?,
                    index: idx,
                });
            }
            (1, stride as f64 / 2.0, stride as f64)
        }
        GroupKind::Similitude { .. } => {
            let net = rotation_net(spec.dim);
            for idx in lattice(1, w) {
                for (m, rot) in net.iter().enumerate() {
                    let coords = Coords::Similitude {
                        log_scale: idx[0] as f64 * step,
                        rotation: rot.clone(),
                    };
                    members.push(FamilyMember {
                        element: spec.element(coords)?,
                        index: vec![idx[0], m as i64],
                    });
                }
            }
            let rot_density = if spec.dim == 2 {
                PI / ROTATION_NET_2D as f64
            } else {
                ROTATION_STEP_3D * 3f64.sqrt() / 2.0
            };
            (1, (step / 2.0).max(rot_density), step.min(2.0 * PI / ROTATION_NET_2D as f64))
        }
        GroupKind::DiscreteFG { .. } => {
            return Err(Error::Config(
                "finitely generated groups need an explicit word cap; use enumerate_word_ball"
                    .into(),
            ))
        }
    };
    Ok(WellSpreadFamily {
        spec: spec.clone(),
        window,
        step,
        window_axes,
        density,
        discreteness,
        members,
    })
}

/// Quantized hash key of a matrix (entries rounded at 1e-8).
pub fn matrix_key(m: &Mat) -> Vec<i64> {
    let d = m.dim();
    let mut key = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            key.push((m[(i, j)] / super::word::HASH_QUANTUM).round() as i64);
        }
    }
    key
}

/// Distinct elements of word length ≤ `radius`, in BFS order.
///
/// Fails when more than `cap` distinct elements appear.
pub fn enumerate_word_ball(spec: &GroupSpec, radius: u32, cap: usize) -> Result<WellSpreadFamily> {
    let gens = spec.symmetric_generators()?;
    let id = Mat::identity(spec.dim);
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    seen.insert(matrix_key(&id), 0);
    let mut members = vec![FamilyMember {
        index: vec![0],
        element: GroupElement { matrix: id, coords: Some(Coords::Word(Vec::new())) },
    }];
    let mut frontier = vec![0usize];
    for r in 1..=radius {
        let mut next = Vec::new();
        for &p in &frontier {
            let (base, word) = match &members[p].element.coords {
                Some(Coords::Word(w)) => (members[p].element.matrix, w.clone()),
                _ => unreachable!(),
            };
            for (letter, g) in gens.iter().enumerate() {
                let m = base * *g;
                let key = matrix_key(&m);
                if seen.contains_key(&key) {
                    continue;
                }
                if members.len() >= cap {
                    return Err(Error::Truncation(format!(
                        "word ball of radius {radius} exceeds {cap} elements"
                    )));
                }
                let mut w = word.clone();
                w.push(letter as u32);
                seen.insert(key, members.len());
                next.push(members.len());
                members.push(FamilyMember {
                    index: vec![r as i64],
                    element: GroupElement { matrix: m, coords: Some(Coords::Word(w)) },
                });
            }
        }
        frontier = next;
    }
    Ok(WellSpreadFamily {
        spec: spec.clone(),
        window: radius,
        step: 1.0,
        window_axes: 1,
        density: 1.0,
        discreteness: super::word::HASH_QUANTUM,
        members,
    })
}
