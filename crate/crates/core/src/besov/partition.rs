//! Smooth partitions of unity subordinate to an induced cover.

use serde::Serialize;

use super::grid::GridFunction;
use crate::cover::{ConvexBody, Geometry, InducedCover};
use crate::error::{Error, Result};
use crate::matgroup::Vector;
use crate::par;

/// Polynomial C² smoothstep `x³(10 − 15x + 6x²)` clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Euclidean radii outside of which a geometry has no points.
pub(crate) fn radial_bounds(g: &Geometry) -> (f64, f64) {
    let body = |b: &ConvexBody| {
        let c = b.center().norm();
        let (hi, _) = b.extent();
        ((c - hi).max(0.0), c + hi)
    };
    match g {
        Geometry::Body(b) => body(b),
        Geometry::Shell(s) => {
            let (_, hi) = body(&s.outer);
            let lo = if s.inner.center().norm_inf() == 0.0 { s.inner.extent().1 } else { 0.0 };
            (lo, hi)
        }
    }
}

/// Largest log-margin of a base set.
pub(crate) fn max_margin(g: &Geometry) -> f64 {
    match g.concentric() {
        Some(c) if c.r0 > 0.0 => 0.5 * (c.r1 / c.r0).ln(),
        _ => g.sample_points(512).iter().map(|p| g.log_margin(p)).fold(0.0, f64::max),
    }
}

/// Fraction of the guaranteed margin where bumps start to rise, and the ramp length.
const RAMP_START: f64 = 0.45;
const RAMP_LENGTH: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionMember {
    pub id: usize,
    pub index: Vec<i64>,
    /// |det h_i|.
    pub det: f64,
    pub geometry: Geometry,
    #[serde(skip)]
    r_lo: f64,
    #[serde(skip)]
    r_hi: f64,
}

impl PartitionMember {
    /// Unnormalized bump `smoothstep((margin − start) / width)`.
    pub fn raw(&self, xi: &Vector, start: f64, width: f64) -> f64 {
        let r = xi.norm();
        if r < self.r_lo || r > self.r_hi {
            return 0.0;
        }
        smoothstep((self.geometry.log_margin(xi) - start) / width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionOfUnity {
    /// Log-margin below which a bump vanishes.
    pub start: f64,
    /// Length of the smoothstep ramp in log-margin units.
    pub width: f64,
    pub members: Vec<PartitionMember>,
    /// Annulus on which the cover guarantees coverage.
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

/// Partition values of one cover member on a grid: (flat index, φ).
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSamples {
    pub member: usize,
    pub values: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    pub members: Vec<MemberSamples>,
    /// Evaluated grid points where no bump is positive.
    pub uncovered: Vec<usize>,
}

impl PartitionOfUnity {
    pub fn in_region(&self, xi: &Vector) -> bool {
        match (self.r_min, self.r_max) {
            (Some(lo), Some(hi)) => {
                let r = xi.norm();
                lo <= r && r <= hi
            }
            _ => false,
        }
    }

    /// Raw bump values and their sum at ξ.
    fn raw_all(&self, xi: &Vector) -> (Vec<(usize, f64)>, f64) {
        let mut out = Vec::new();
        let mut sum = 0.0;
        for (k, m) in self.members.iter().enumerate() {
            let b = m.raw(xi, self.start, self.width);
            if b > 0.0 {
                out.push((k, b));
                sum += b;
            }
        }
        (out, sum)
    }

    /// Nonzero partition values at ξ as (member position, φ).
    pub fn eval(&self, xi: &Vector) -> Result<Vec<(usize, f64)>> {
        let (mut vals, sum) = self.raw_all(xi);
        if sum == 0.0 {
            return Err(Error::CoverageGap(xi.to_vec()));
        }
        for v in vals.iter_mut() {
            v.1 /= sum;
        }
        Ok(vals)
    }

    /// φ of one member at ξ; zero where nothing covers ξ.
    pub fn value(&self, member: usize, xi: &Vector) -> f64 {
        let b = self.members[member].raw(xi, self.start, self.width);
        if b == 0.0 {
            return 0.0;
        }
        let (_, sum) = self.raw_all(xi);
        b / sum
    }

    pub fn position_of(&self, index: &[i64]) -> Option<usize> {
        self.members.iter().position(|m| m.index == index)
    }

    /// Samples every member on the frequency grid of `grid`, optionally
    /// restricted to the flat indices in `points`.
    pub fn sample(&self, grid: &GridFunction, points: Option<&[usize]>) -> Result<GridPartition> {
        let all: Vec<usize>;
        let points = match points {
            Some(p) => p,
            None => {
                all = (0..grid.len()).collect();
                &all
            }
        };
        let chunks: Vec<&[usize]> = points.chunks(1024).collect();
        let evaluated = par::map(&chunks, |chunk| {
            chunk
                .iter()
                .map(|&flat| {
                    let xi = grid.frequency(flat);
                    let (vals, sum) = self.raw_all(&xi);
                    (flat, xi, vals, sum)
                })
                .collect::<Vec<_>>()
        });
        let mut per_member: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.members.len()];
        let mut uncovered = Vec::new();
        for (flat, xi, vals, sum) in evaluated.into_iter().flatten() {
            if sum == 0.0 {
                if self.in_region(&xi) {
                    return Err(Error::CoverageGap(xi.to_vec()));
                }
                uncovered.push(flat);
                continue;
            }
            for (k, b) in vals {
                per_member[k].push((flat, b / sum));
            }
        }
        let members = per_member
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty())
            .map(|(member, values)| MemberSamples { member, values })
            .collect();
        Ok(GridPartition { members, uncovered })
    }
}

/// Sum-normalized smoothstep bumps on the elements of `cover`.
///
/// Every annulus sample must have some element with margin at least m*;
/// bumps vanish below `0.45 m*` and reach one at `0.9 m*`, so each member
/// has an exact plateau and coverage survives. Coverage is checked at the
/// cover's own annulus samples.
pub fn build_partition(cover: &InducedCover) -> Result<PartitionOfUnity> {
    let members: Vec<PartitionMember> = cover
        .elements
        .iter()
        .map(|e| {
            let (r_lo, r_hi) = radial_bounds(&e.geometry);
            PartitionMember {
                id: e.id,
                index: e.index.clone(),
                det: e.transform.matrix.det().abs(),
                geometry: e.geometry.clone(),
                r_lo,
                r_hi,
            }
        })
        .collect();
    let count = cover.meta.coverage_samples.clamp(256, 4096);
    let samples = crate::cover::annulus_samples(cover, count, 0);
    let best = |xi: &Vector| {
        members
            .iter()
            .filter(|m| {
                let r = xi.norm();
                m.r_lo <= r && r <= m.r_hi
            })
            .map(|m| m.geometry.log_margin(xi))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let guaranteed = if samples.is_empty() {
        0.5 * max_margin(&cover.base.geometry)
    } else {
        samples.iter().map(best).fold(f64::INFINITY, f64::min)
    };
    if !(guaranteed > 0.0 && guaranteed.is_finite()) {
        let witness = samples
            .iter()
            .find(|xi| !(best(xi) > 0.0))
            .map(|xi| xi.to_vec())
            .unwrap_or_else(|| cover.base.reference.to_vec());
        return Err(Error::CoverageGap(witness));
    }
    let pou = PartitionOfUnity {
        start: RAMP_START * guaranteed,
        width: RAMP_LENGTH * guaranteed,
        members,
        r_min: cover.meta.r_min,
        r_max: cover.meta.r_max,
    };
    for xi in &samples {
        pou.eval(xi)?;
    }
    Ok(pou)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{build_induced_cover, CoverParams};
    use crate::matgroup::{GroupSpec, Mat};

    #[test]
    fn smoothstep_is_c2_at_the_ends() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        let h = 1e-4;
        let d1 = (smoothstep(1.0) - smoothstep(1.0 - h)) / h;
        assert!(d1 < 1e-6);
    }

    #[test]
    fn dyadic_partition_sums_to_one() {
        let spec = GroupSpec::cyclic(Mat::identity(2).scale(2.0)).unwrap();
        let cover = build_induced_cover(&spec, 4, &CoverParams::default()).unwrap();
        let pou = build_partition(&cover).unwrap();
        for xi in crate::cover::annulus_samples(&cover, 4096, 11) {
            let vals = pou.eval(&xi).unwrap();
            let s: f64 = vals.iter().map(|v| v.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
            for (k, phi) in vals {
                assert!((0.0..=1.0).contains(&phi));
                assert!(pou.members[k].geometry.contains(&xi));
            }
        }
        // Radial: rotating ξ leaves every value unchanged.
        let xi = Vector::from_slice(&[0.7, 0.0]);
        let r = Mat::rotation2(1.1).apply(&xi);
        for k in 0..pou.members.len() {
            assert!((pou.value(k, &xi) - pou.value(k, &r)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_element_is_constant_one() {
        let spec = GroupSpec::cyclic(Mat::identity(2).scale(2.0)).unwrap();
        let cover = build_induced_cover(&spec, 1, &CoverParams::default()).unwrap();
        let mut pou = build_partition(&cover).unwrap();
        pou.members.retain(|m| m.index == vec![0]);
        let xi = Vector::from_slice(&[1.0, 0.0]);
        assert_eq!(pou.eval(&xi).unwrap(), vec![(0, 1.0)]);
        assert!(matches!(pou.eval(&Vector::from_slice(&[40.0, 0.0])), Err(Error::CoverageGap(_))));
    }
}
