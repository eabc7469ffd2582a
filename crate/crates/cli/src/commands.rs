//! Command pipelines.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use coorbit::besov::{compare_norms, default_battery, Exponent, NormComparison};
use coorbit::cover::{
    build_induced_cover, export_adjacency, export_elements, properness_check, self_stats, ElementExport,
    Geometry, Properness, SelfStats,
};
use coorbit::equiv::{coorbit_equivalence, cover_params, CompareOptions, Outcome, Verdict};
use coorbit::growth::{growth_function, linear_growth_test, GrowthReport, LinearGrowth};
use coorbit::matgroup::{Admissibility, GeneratingSet, GroupKind, GroupSpec};
use coorbit::RunConfig;
use serde::Serialize;

use crate::input::{load_battery, load_group, load_pair};
use crate::output::{num, Envelope, Sink};

pub enum Status {
    Decided,
    Inconclusive,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GrowthSection {
    linear: LinearGrowth,
    report: GrowthReport,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Analysis {
    group: GroupSpec,
    admissibility: Admissibility,
    #[serde(skip_serializing_if = "Option::is_none")]
    properness: Option<Properness>,
    self_stats: Vec<SelfStats>,
    /// Interior neighbor count and transition norm agree across windows.
    #[serde(skip_serializing_if = "Option::is_none")]
    self_stable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth: Option<GrowthSection>,
    unchecked: Vec<String>,
}

fn growth_rows(r: &GrowthReport) -> Vec<Vec<String>> {
    r.samples.iter().map(|s| vec![num(s.r), num(s.volume)]).collect()
}

pub fn analyze(path: &Path, cfg: &RunConfig, out: Option<PathBuf>) -> Result<Status> {
    let spec = load_group(path)?;
    let sink = Sink::new(out)?;
    let admissibility = spec.admissibility();
    let mut report = Analysis {
        group: spec.clone(),
        admissibility,
        properness: None,
        self_stats: Vec::new(),
        self_stable: None,
        growth: None,
        unchecked: Vec::new(),
    };
    if matches!(admissibility, Admissibility::NotAdmissible { .. }) {
        sink.json("analysis.json", &Envelope::new("analyze", cfg, &report))?;
        return Ok(Status::Decided);
    }
    if admissibility == Admissibility::Unchecked {
        report.unchecked.push("admissibility of a finitely generated group".into());
    }
    let params = cover_params(cfg);
    let mut stats = Vec::new();
    for (i, w) in cfg.windows().into_iter().enumerate() {
        let cover = build_induced_cover(&spec, w, &params)?;
        if i == 0 {
            match &cover.base.geometry {
                Geometry::Shell(shell) => {
                    report.properness = Some(properness_check(&spec, shell, w, cfg.budget)?);
                }
                Geometry::Body(_) => report.unchecked.push("properness: base set is not a shell".into()),
            }
        }
        stats.push(self_stats(&cover, cfg.budget, &cfg.tolerances)?);
    }
    report.self_stable = Some(stats.windows(2).all(|p| {
        p[0].max_count == p[1].max_count
            && (p[0].max_transition_norm - p[1].max_transition_norm).abs() <= 1e-9 * p[0].max_transition_norm.max(1.0)
    }));
    report.self_stats = stats;
    let w = GeneratingSet::default_for(&spec)?;
    match linear_growth_test(&spec, &w, &cfg.tolerances) {
        Ok((linear, r)) => report.growth = Some(GrowthSection { linear, report: r }),
        Err(e) => report.unchecked.push(format!("growth: {e}")),
    }
    sink.json("analysis.json", &Envelope::new("analyze", cfg, &report))?;
    let rows: Vec<Vec<String>> = report
        .self_stats
        .iter()
        .map(|s| {
            vec![
                s.window.to_string(),
                s.max_count.to_string(),
                num(s.max_transition_norm),
                s.interior_elements.to_string(),
            ]
        })
        .collect();
    sink.csv("self_stats.csv", &["window", "maxCount", "maxTransitionNorm", "interiorElements"], &rows)?;
    if let Some(g) = &report.growth {
        sink.csv("growth.csv", &["r", "volume"], &growth_rows(&g.report))?;
    }
    Ok(Status::Decided)
}

fn ratio_rows(c: &NormComparison) -> Vec<Vec<String>> {
    c.rows
        .iter()
        .map(|r| vec![r.scale.to_string(), num(r.norm_a), num(r.norm_b), num(r.ratio)])
        .collect()
}

pub fn compare(
    path: &Path,
    cfg: &RunConfig,
    with_qi: bool,
    with_norms: bool,
    out: Option<PathBuf>,
) -> Result<Status> {
    let (a, b) = load_pair(path)?;
    let sink = Sink::new(out)?;
    let opts = CompareOptions { with_qi, with_norms, ..CompareOptions::default() };
    let verdict: Verdict = coorbit_equivalence(&a, &b, cfg, &opts)?;
    sink.json("verdict.json", &Envelope::new("compare", cfg, &verdict))?;
    let ev = &verdict.evidence;
    let rows: Vec<Vec<String>> = ev
        .count_trends
        .iter()
        .map(|t| {
            vec![
                t.window.to_string(),
                t.max_ab.to_string(),
                t.max_ba.to_string(),
                t.exact_pairs.to_string(),
                t.sampled_pairs.to_string(),
            ]
        })
        .collect();
    sink.csv("counts.csv", &["window", "maxAB", "maxBA", "exactPairs", "sampledPairs"], &rows)?;
    if let Some(eps) = &ev.epsilon {
        let rows: Vec<Vec<String>> =
            eps.log_s.iter().map(|(k, l)| vec![k.to_string(), num(*l), num(l.exp())]).collect();
        sink.csv("epsilon.csv", &["k", "logS", "s"], &rows)?;
    }
    if let Some(qi) = &ev.qi {
        let rows: Vec<Vec<String>> = qi
            .residuals
            .iter()
            .map(|r| vec![r.window.to_string(), num(r.max_violation), num(r.required_r2)])
            .collect();
        sink.csv("qi.csv", &["window", "maxViolation", "requiredR2"], &rows)?;
    }
    if let Some(c) = &ev.norm_ratios {
        sink.csv("norm_ratios.csv", &["j", "normA", "normB", "ratio"], &ratio_rows(c))?;
    }
    Ok(match verdict.outcome {
        Outcome::Inconclusive => Status::Inconclusive,
        _ => Status::Decided,
    })
}

pub fn besov_compare(
    path: &Path,
    battery: Option<&Path>,
    p: Exponent,
    q: Exponent,
    cfg: &RunConfig,
    out: Option<PathBuf>,
) -> Result<Status> {
    let (a, b) = load_pair(path)?;
    let sink = Sink::new(out)?;
    let packets = match battery {
        Some(path) => load_battery(path, a.dim)?,
        None => default_battery(&a, &b, cfg.window as i64),
    };
    let c = compare_norms(&a, &b, &packets, p, q, cfg)?;
    sink.json("besov_summary.json", &Envelope::new("besov-compare", cfg, &c))?;
    sink.csv("ratios.csv", &["j", "normA", "normB", "ratio"], &ratio_rows(&c))?;
    Ok(Status::Decided)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CoverExport {
    group: GroupSpec,
    window: u32,
    elements: Vec<ElementExport>,
    adjacency_rows: usize,
}

pub fn export_cover(path: &Path, cfg: &RunConfig, out: Option<PathBuf>) -> Result<Status> {
    let spec = load_group(path)?;
    let sink = Sink::new(out)?;
    let cover = build_induced_cover(&spec, cfg.window, &cover_params(cfg))?;
    if cover.is_empty() {
        return Err(anyhow!("window {} produced an empty cover", cfg.window));
    }
    let adjacency = export_adjacency(&cover, cfg.budget)?;
    let report = CoverExport {
        group: spec,
        window: cfg.window,
        elements: export_elements(&cover),
        adjacency_rows: adjacency.len(),
    };
    sink.json("cover.json", &Envelope::new("export-cover", cfg, &report))?;
    let rows: Vec<Vec<String>> =
        adjacency.iter().map(|r| vec![r.i.to_string(), r.j.to_string(), r.status.clone()]).collect();
    sink.csv("adjacency.csv", &["i", "j", "status"], &rows)?;
    Ok(Status::Decided)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GrowthOutput {
    group: GroupSpec,
    generating_set: GeneratingSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    linear: Option<LinearGrowth>,
    report: GrowthReport,
}

pub fn growth(
    path: &Path,
    radii: Option<Vec<f64>>,
    step: Option<f64>,
    cfg: &RunConfig,
    out: Option<PathBuf>,
) -> Result<Status> {
    let spec = load_group(path)?;
    let sink = Sink::new(out)?;
    let w = match step {
        Some(d) if matches!(spec.kind, GroupKind::DiscreteFG { .. }) => {
            return Err(anyhow!("--step {d} does not apply to a finitely generated group"))
        }
        Some(d) => GeneratingSet::Box { half_width: d },
        None => GeneratingSet::default_for(&spec)?,
    };
    let (linear, report) = match radii {
        Some(r) => (None, growth_function(&spec, &w, &r, &cfg.tolerances)?),
        None => {
            let (l, r) = linear_growth_test(&spec, &w, &cfg.tolerances)?;
            (Some(l), r)
        }
    };
    let rows = growth_rows(&report);
    sink.json("growth.json", &Envelope::new("growth", cfg, GrowthOutput { group: spec, generating_set: w, linear, report }))?;
    sink.csv("growth.csv", &["r", "volume"], &rows)?;
    Ok(Status::Decided)
}
