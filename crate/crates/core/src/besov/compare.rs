//! Norm-ratio statistics between two groups over a battery of frequency packets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::norms::{decomposition_norm, Exponent};
use super::partition::{build_partition, PartitionOfUnity};
use crate::config::RunConfig;
use crate::cover::build_induced_cover;
use crate::error::{Error, Result};
use crate::matgroup::{GroupKind, GroupSpec, Mat, Vector};

/// Frequency cells kept free between a packet and the grid boundary.
pub const CLEARANCE_CELLS: usize = 4;

/// A smooth compactly supported bump in frequency,
/// `f̂(ξ) = exp(1 − 1/(1 − r²)) e^{−2πi m·ξ}` with `r² = Σ ((ξ_k − c_k)/w_k)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Packet {
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
    /// Spatial translation m.
    #[serde(default)]
    pub modulation: Vec<f64>,
    /// Packet-scale label used for spread trends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<i64>,
}

impl Packet {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > super::grid::MAX_GRID_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        if self.widths.len() != d {
            return Err(Error::Dimension { expected: d, found: self.widths.len() });
        }
        if !self.modulation.is_empty() && self.modulation.len() != d {
            return Err(Error::Dimension { expected: d, found: self.modulation.len() });
        }
        if self.widths.iter().any(|w| !(*w > 0.0 && w.is_finite()))
            || self.center.iter().chain(&self.modulation).any(|x| !x.is_finite())
        {
            return Err(Error::Config("packet widths must be positive and all entries finite".into()));
        }
        Ok(())
    }

    pub fn eval(&self, xi: &Vector) -> Complex64 {
        let r2: f64 = (0..self.dim()).map(|k| ((xi[k] - self.center[k]) / self.widths[k]).powi(2)).sum();
        if r2 >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let amp = (1.0 - 1.0 / (1.0 - r2)).exp();
        let phase: f64 = self.modulation.iter().enumerate().map(|(k, m)| m * xi[k]).sum();
        Complex64::from_polar(amp, -2.0 * std::f64::consts::PI * phase)
    }

    /// Samples the packet on an `n`-point grid centered at its own frequency,
    /// with the spacing chosen so the support keeps the clearance.
    pub fn grid_function(&self, n: usize) -> Result<GridFunction> {
        self.validate()?;
        let w = self.widths.iter().fold(0.0f64, |a, &b| a.max(b));
        let cells = (n / 2).saturating_sub(CLEARANCE_CELLS).max(1) as f64;
        let dxi = w / cells;
        GridFunction::from_frequency(self.dim(), n, 0.5 / dxi, Vector::from_slice(&self.center), |xi| {
            self.eval(xi)
        })
    }
}

/// Packets at `base^j · direction` for `j` in `scales`, widths `rel_width · base^j`.
pub fn scaled_packets(direction: &Vector, base: f64, scales: std::ops::RangeInclusive<i64>, rel_width: f64) -> Vec<Packet> {
    let u = direction.scale(1.0 / direction.norm());
    scales
        .map(|j| {
            let r = base.powi(j as i32);
            Packet {
                center: u.scale(r).to_vec(),
                widths: vec![rel_width * r; u.dim()],
                modulation: Vec::new(),
                scale: Some(j),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SpreadTrend {
    /// The cumulative spread grows at every packet scale.
    Increasing,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioRow {
    pub packet: usize,
    pub scale: i64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub ratio: f64,
    pub tail_a: f64,
    pub tail_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormComparison {
    pub p: Exponent,
    pub q: Exponent,
    pub grid: usize,
    pub rows: Vec<RatioRow>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// Cumulative spread max/min over all packets up to each scale.
    pub spreads: Vec<(i64, f64)>,
    pub trend: SpreadTrend,
    /// Whether any packet left more than the warning fraction outside a cover.
    pub tail_warning: bool,
}

/// Grid size used for norms: the configured size, capped at 64 in three dimensions.
pub fn norm_grid(cfg: &RunConfig, dim: usize) -> usize {
    if dim >= 3 {
        cfg.grid.min(64)
    } else {
        cfg.grid
    }
}

fn partition_for(spec: &GroupSpec, cfg: &RunConfig) -> Result<PartitionOfUnity> {
    let cover = build_induced_cover(spec, cfg.window, &crate::equiv::cover_params(cfg))?;
    build_partition(&cover)
}

/// Ratios of the two decomposition norms over the battery.
pub fn compare_norms(
    spec_a: &GroupSpec,
    spec_b: &GroupSpec,
    battery: &[Packet],
    p: Exponent,
    q: Exponent,
    cfg: &RunConfig,
) -> Result<NormComparison> {
    cfg.validate()?;
    if spec_a.dim != spec_b.dim {
        return Err(Error::Dimension { expected: spec_a.dim, found: spec_b.dim });
    }
    if battery.is_empty() {
        return Err(Error::Config("empty packet battery".into()));
    }
    for pk in battery {
        pk.validate()?;
        if pk.dim() != spec_a.dim {
            return Err(Error::Dimension { expected: spec_a.dim, found: pk.dim() });
        }
    }
    let pou_a = partition_for(spec_a, cfg)?;
    let pou_b = if spec_a == spec_b { pou_a.clone() } else { partition_for(spec_b, cfg)? };
    let n = norm_grid(cfg, spec_a.dim);
    let tol = &cfg.tolerances;
    let rows = battery
        .iter()
        .enumerate()
        .map(|(i, pk)| {
            let f = pk.grid_function(n)?;
            let a = decomposition_norm(&f, &pou_a, p, q, tol)?;
            let b = decomposition_norm(&f, &pou_b, p, q, tol)?;
            if !(a.norm > 0.0 && b.norm > 0.0) {
                return Err(Error::Numerical(format!("packet {i} has a vanishing norm")));
            }
            Ok(RatioRow {
                packet: i,
                scale: pk.scale.unwrap_or(i as i64),
                norm_a: a.norm,
                norm_b: b.norm,
                ratio: a.norm / b.norm,
                tail_a: a.tail,
                tail_b: b.tail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(p, q, n, rows, tol.tail_warning))
}

fn summarize(p: Exponent, q: Exponent, grid: usize, rows: Vec<RatioRow>, tail_limit: f64) -> NormComparison {
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let mut scales: Vec<i64> = rows.iter().map(|r| r.scale).collect();
    scales.sort_unstable();
    scales.dedup();
    let spreads: Vec<(i64, f64)> = scales
        .iter()
        .map(|&s| {
            let upto = rows.iter().filter(|r| r.scale <= s).map(|r| r.ratio);
            let (lo, hi) = upto.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            (s, hi / lo)
        })
        .collect();
    let increasing = spreads.len() >= 3 && spreads.windows(2).all(|w| w[1].1 > w[0].1 * (1.0 + 1e-9));
    NormComparison {
        p,
        q,
        grid,
        tail_warning: rows.iter().any(|r| r.tail_a.max(r.tail_b) > tail_limit),
        rows,
        min,
        max,
        spread: max / min,
        spreads,
        trend: if increasing { SpreadTrend::Increasing } else { SpreadTrend::Bounded },
    }
}

/// Packets along the direction in which the two groups scale most differently.
///
/// Uses the top singular direction of `(A^{-K} B^{⌊εK⌋})ᵀ` for the step
/// matrices of the two groups, rounded to the nearest coordinate axis, and
/// falls back to the first axis.
pub fn default_battery(spec_a: &GroupSpec, spec_b: &GroupSpec, k: i64) -> Vec<Packet> {
    let d = spec_a.dim;
    let step = |s: &GroupSpec| -> Option<Mat> {
        match &s.kind {
            GroupKind::Cyclic { matrix } => Some(*matrix),
            GroupKind::OneParameter { generator } => Some(crate::matgroup::mat_exp(generator)),
            GroupKind::ScalarSimilitude => Some(Mat::identity(s.dim).scale(std::f64::consts::E)),
            _ => None,
        }
    };
    let mut axis = 0;
    let mut base = 2.0;
    if let (Some(a), Some(b)) = (step(spec_a), step(spec_b)) {
        let (da, db) = (a.det().abs(), b.det().abs());
        base = da.powf(1.0 / d as f64).max(1.0 + 1e-3);
        if da != 1.0 && db != 1.0 {
            let eps = da.ln() / db.ln();
            let m = a.pow(-k).and_then(|ak| Ok(ak * b.pow((eps * k as f64).floor() as i64)?));
            if let Ok(m) = m {
                let n = m.to_nalgebra().transpose();
                let svd = n.svd(true, false);
                if let Some(u) = svd.u {
                    let (imax, _) = svd
                        .singular_values
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
                    let col = u.column(imax);
                    axis = (0..d).max_by(|&i, &j| col[i].abs().total_cmp(&col[j].abs())).unwrap_or(0);
                }
            }
        }
        if base < 1.0 + 1e-3 {
            base = 2.0;
        }
    }
    scaled_packets(&Vector::basis(d, axis), base, 1..=5, 0.15)
}
