//! Volume growth of word-metric balls and the linear-growth test.

use std::collections::HashSet;
use std::f64::consts::PI;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matgroup::{GeneratingSet, GroupKind, GroupSpec, Mat};

/// Element cap for ball counting in finitely generated groups.
pub const BFS_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthSample {
    pub r: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum GrowthVerdict {
    Linear,
    PolynomialDegree { degree: u32 },
    SuperPolynomialTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthReport {
    /// How ν was computed.
    pub measure: String,
    pub samples: Vec<GrowthSample>,
    /// Least-squares slope of log ν against log r.
    pub exponent: f64,
    /// Root-mean-square residual of that fit.
    pub residual: f64,
    pub verdict: GrowthVerdict,
    /// Ball counting stopped at the element cap before the largest radius.
    pub truncated: bool,
}

/// Haar volume of the rotation ball of angle ≤ θ (θ ≤ π).
fn rotation_ball(dim: usize, theta: f64) -> f64 {
    let t = theta.clamp(0.0, PI);
    match dim {
        2 => 2.0 * t,
        // ∫_{|ω|≤θ} 2(1 − cos|ω|)/|ω|² dω.
        _ => 8.0 * PI * (t - t.sin()),
    }
}

/// Nine log-spaced radii over two decades, starting where the chart formula
/// has left its small-radius regime.
pub fn default_radii(spec: &GroupSpec, w: &GeneratingSet) -> Vec<f64> {
    let (r0, decades) = match (&spec.kind, w) {
        (GroupKind::DiscreteFG { .. }, _) => (2.0, 1.0),
        (GroupKind::Cyclic { .. }, _) => (10.0, 2.0),
        (GroupKind::Similitude { .. }, GeneratingSet::Box { half_width }) => ((PI / half_width).ceil(), 2.0),
        _ => (1.0, 2.0),
    };
    let n = 9;
    (0..n).map(|k| (r0 * 10f64.powf(decades * k as f64 / (n - 1) as f64)).round()).collect()
}

/// Entrywise key with relative resolution, so tiny and huge entries stay distinct.
fn relative_key(m: &Mat) -> Vec<i64> {
    let d = m.dim();
    let mut key = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let x = m[(i, j)];
            key.push(if x.abs() < 1e-300 { 0 } else { x.signum() as i64 * ((x.abs().ln() / 1e-8).round() as i64 + (1 << 40)) });
        }
    }
    key
}

fn ball_counts(gens: &[Mat], radius: u32, dim: usize) -> (Vec<usize>, bool) {
    let id = Mat::identity(dim);
    let mut seen = HashSet::new();
    seen.insert(relative_key(&id));
    let mut frontier = vec![id];
    let mut counts = vec![1usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for m in &frontier {
            for g in gens {
                let p = *m * *g;
                if !p.is_finite() {
                    return (counts, true);
                }
                if seen.insert(relative_key(&p)) {
                    next.push(p);
                    if seen.len() > BFS_CAP {
                        return (counts, true);
                    }
                }
            }
        }
        counts.push(seen.len());
        frontier = next;
    }
    (counts, false)
}

/// ν(r) = μ_G(W^r) on the given radii, with a log-log power fit.
pub fn growth_function(
    spec: &GroupSpec,
    w: &GeneratingSet,
    radii: &[f64],
    tol: &Tolerances,
) -> Result<GrowthReport> {
    if radii.len() < 5 {
        return Err(Error::Config(format!("need at least 5 radii, got {}", radii.len())));
    }
    if radii.windows(2).any(|p| !(p[1] > p[0])) || !(radii[0] > 0.0) {
        return Err(Error::Config("radii must be positive and increasing".into()));
    }
    if radii[radii.len() - 1] < 10.0 * radii[0] {
        return Err(Error::Config("radii must span at least a decade".into()));
    }
    let box_width = |w: &GeneratingSet| match w {
        GeneratingSet::Box { half_width } if *half_width > 0.0 => Ok(*half_width),
        GeneratingSet::Box { half_width } => {
            Err(Error::Config(format!("box half-width must be positive, got {half_width}")))
        }
        GeneratingSet::Generators { .. } => {
            Err(Error::Config(format!("{} charts need a box generating set", spec.kind_name())))
        }
    };
    let mut truncated = false;
    let (measure, volumes): (String, Vec<f64>) = match &spec.kind {
        GroupKind::OneParameter { .. } | GroupKind::ScalarSimilitude => {
            let d = box_width(w)?;
            ("interval length 2rδ".into(), radii.iter().map(|r| 2.0 * r * d).collect())
        }
        GroupKind::AbelianFlow { generators } => {
            let d = box_width(w)?;
            let k = generators.len() as i32;
            (format!("box volume (2rδ)^{k}"), radii.iter().map(|r| (2.0 * r * d).powi(k)).collect())
        }
        GroupKind::Similitude { .. } => {
            let d = box_width(w)?;
            (
                "log-scale interval times rotation ball".into(),
                radii.iter().map(|r| 2.0 * r * d * rotation_ball(spec.dim, r * d)).collect(),
            )
        }
        GroupKind::Cyclic { matrix } => match w {
            GeneratingSet::Box { half_width } => (
                "counting measure 2⌊rδ⌋ + 1".into(),
                radii.iter().map(|r| 2.0 * (r * half_width + 1e-9).floor() + 1.0).collect(),
            ),
            GeneratingSet::Generators { list, .. } => {
                let standard = list.len() == 2
                    && list.iter().any(|g| g.max_abs_diff(matrix) <= 1e-12 * matrix.frobenius_norm())
                    && matrix
                        .inverse()
                        .map(|inv| list.iter().any(|g| g.max_abs_diff(&inv) <= 1e-12 * inv.frobenius_norm()))
                        .unwrap_or(false);
                if standard {
                    ("counting measure 2⌊r⌋ + 1".into(), radii.iter().map(|r| 2.0 * r.floor() + 1.0).collect())
                } else {
                    let (v, t) = bfs_volumes(list, radii, spec.dim);
                    truncated = t;
                    ("ball counting".into(), v)
                }
            }
        },
        GroupKind::DiscreteFG { .. } => match w {
            GeneratingSet::Generators { list, .. } => {
                let (v, t) = bfs_volumes(list, radii, spec.dim);
                truncated = t;
                ("ball counting".into(), v)
            }
            GeneratingSet::Box { .. } => {
                return Err(Error::Config("finitely generated groups need a generator list".into()))
            }
        },
    };
    let samples: Vec<GrowthSample> = radii
        .iter()
        .zip(&volumes)
        .filter(|(_, v)| v.is_finite())
        .map(|(&r, &volume)| GrowthSample { r, volume })
        .collect();
    if samples.len() < 3 {
        return Err(Error::Truncation("too few radii below the counting cap".into()));
    }
    let (exponent, residual) = log_log_fit(&samples);
    Ok(GrowthReport {
        measure,
        verdict: classify(exponent, residual, tol),
        samples,
        exponent,
        residual,
        truncated,
    })
}

fn bfs_volumes(gens: &[Mat], radii: &[f64], dim: usize) -> (Vec<f64>, bool) {
    let r_max = radii[radii.len() - 1].floor() as u32;
    let (counts, truncated) = ball_counts(gens, r_max, dim);
    let v = radii
        .iter()
        .map(|r| counts.get(r.floor() as usize).map_or(f64::INFINITY, |&c| c as f64))
        .collect();
    (v, truncated)
}

/// Slope and RMS residual of least squares on (log r, log ν).
pub fn log_log_fit(samples: &[GrowthSample]) -> (f64, f64) {
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.volume.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

fn classify(exponent: f64, residual: f64, tol: &Tolerances) -> GrowthVerdict {
    let (lo, hi) = tol.linear_band;
    if residual < tol.growth_residual && (lo..=hi).contains(&exponent) {
        return GrowthVerdict::Linear;
    }
    let degree = exponent.round();
    if residual < tol.growth_residual && degree >= 1.0 && (exponent - degree).abs() <= 0.2 {
        GrowthVerdict::PolynomialDegree { degree: degree as u32 }
    } else {
        GrowthVerdict::SuperPolynomialTrend
    }
}

/// A one-parameter subgroup `exp(ℝX)` found among chart directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum SubgroupSearch {
    Found { generator: Mat, chart_direction: Vec<f64> },
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum LinearGrowth {
    Linear { exponent: f64, subgroup: SubgroupSearch },
    NotLinear { exponent: f64 },
}

/// Linear iff the fitted exponent lies in the linear band with a small
/// residual; a linear verdict also reports a cocompact one-parameter
/// subgroup when a chart direction provides one.
pub fn linear_growth_test(spec: &GroupSpec, w: &GeneratingSet, tol: &Tolerances) -> Result<(LinearGrowth, GrowthReport)> {
    let report = growth_function(spec, w, &default_radii(spec, w), tol)?;
    let out = if report.verdict == GrowthVerdict::Linear {
        LinearGrowth::Linear { exponent: report.exponent, subgroup: chart_subgroup(spec) }
    } else {
        LinearGrowth::NotLinear { exponent: report.exponent }
    };
    Ok((out, report))
}

fn chart_subgroup(spec: &GroupSpec) -> SubgroupSearch {
    let d = spec.dim;
    match &spec.kind {
        GroupKind::OneParameter { generator } => {
            SubgroupSearch::Found { generator: *generator, chart_direction: vec![1.0] }
        }
        GroupKind::ScalarSimilitude => {
            SubgroupSearch::Found { generator: Mat::identity(d), chart_direction: vec![1.0] }
        }
        GroupKind::AbelianFlow { generators } if generators.len() == 1 => {
            SubgroupSearch::Found { generator: generators[0], chart_direction: vec![1.0] }
        }
        GroupKind::Similitude { .. } => {
            // The scalar flow is central and its quotient is the compact rotation group.
            let mut dir = vec![0.0; spec.chart_dim()];
            dir[0] = 1.0;
            SubgroupSearch::Found { generator: Mat::identity(d), chart_direction: dir }
        }
        _ => SubgroupSearch::NotFound,
    }
}
