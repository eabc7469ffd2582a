//! Verdicts: weak equivalence of induced covers and the scalar criteria.

use serde::Serialize;

use crate::besov::{compare_norms, default_battery, Exponent, NormComparison, Packet};
use crate::config::{RunConfig, Tolerances};
use crate::cover::{
    build_induced_cover, directed_counts, support_equality_test, Contact, CoverParams, InducedCover, Rows,
    SupportComparison,
};
use crate::error::{Error, Result};
use crate::matgroup::{
    check_one_parameter_admissible, conjugate_spec, mat_exp, mat_log, GeneratingSet, GroupKind, GroupSpec, Mat,
    Vector,
};
use crate::metric::{fit_quasi_isometry, transition_density, transition_pairs, QiCertificate};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

/// Directed maxima of interior neighbor counts at one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTrend {
    pub window: u32,
    #[serde(rename = "maxAB")]
    pub max_ab: usize,
    #[serde(rename = "maxBA")]
    pub max_ba: usize,
    /// Index realizing `max_ab`.
    #[serde(rename = "argmaxAB")]
    pub argmax_ab: Option<Vec<i64>>,
    #[serde(rename = "argmaxBA")]
    pub argmax_ba: Option<Vec<i64>>,
    #[serde(rename = "exactPairs")]
    pub exact_pairs: usize,
    #[serde(rename = "sampledPairs")]
    pub sampled_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all_fields = "camelCase")]
pub enum WeakEquivalence {
    WeaklyEquivalent {
        #[serde(rename = "maxCount")]
        max_count: usize,
    },
    NotWeaklyEquivalent {
        /// "AB" or "BA": the direction whose maximum grows.
        direction: String,
        counts: Vec<(u32, usize)>,
        indices: Vec<Vec<i64>>,
    },
    Inconclusive,
}

fn directed_max(a: &InducedCover, b: &InducedCover, budget: usize, tol: &Tolerances) -> Result<(usize, Option<Vec<i64>>, usize, usize)> {
    let (rows, exact, sampled) = directed_counts(a, b, Rows::Interior, budget, Contact::Open, tol)?;
    let best = rows
        .iter()
        .filter(|r| r.interior && !r.truncated)
        .max_by(|x, y| x.count.cmp(&y.count).then(y.id.cmp(&x.id)));
    Ok((best.map_or(0, |r| r.count), best.map(|r| r.index.clone()), exact, sampled))
}

/// Compares directed interior maxima of covers built at nested windows.
///
/// `covers_a[k]` and `covers_b[k]` must share a window.
pub fn weak_equivalence_test(
    covers_a: &[InducedCover],
    covers_b: &[InducedCover],
    budget: usize,
    tol: &Tolerances,
) -> Result<(WeakEquivalence, Vec<CountTrend>)> {
    if covers_a.len() != covers_b.len() || covers_a.len() < 2 {
        return Err(Error::Config("weak equivalence needs matching nested windows".into()));
    }
    let mut trends = Vec::new();
    for (a, b) in covers_a.iter().zip(covers_b) {
        if a.meta.window != b.meta.window {
            return Err(Error::Config("cover windows do not match".into()));
        }
        if !(0..a.len()).any(|i| a.is_interior(i)) || !(0..b.len()).any(|i| b.is_interior(i)) {
            return Err(Error::Config(format!("window {} has no interior indices", a.meta.window)));
        }
        let (max_ab, argmax_ab, e1, s1) = directed_max(a, b, budget, tol)?;
        let (max_ba, argmax_ba, e2, s2) = directed_max(b, a, budget, tol)?;
        trends.push(CountTrend {
            window: a.meta.window,
            max_ab,
            max_ba,
            argmax_ab,
            argmax_ba,
            exact_pairs: e1 + e2,
            sampled_pairs: s1 + s2,
        });
    }
    let same = |f: fn(&CountTrend) -> usize| trends.windows(2).all(|p| f(&p[0]) == f(&p[1]));
    let grows = |f: fn(&CountTrend) -> usize| trends.windows(2).all(|p| f(&p[1]) > f(&p[0]));
    let verdict = if same(|t| t.max_ab) && same(|t| t.max_ba) {
        WeakEquivalence::WeaklyEquivalent { max_count: trends[0].max_ab.max(trends[0].max_ba) }
    } else if grows(|t| t.max_ab) {
        WeakEquivalence::NotWeaklyEquivalent {
            direction: "AB".into(),
            counts: trends.iter().map(|t| (t.window, t.max_ab)).collect(),
            indices: trends.iter().filter_map(|t| t.argmax_ab.clone()).collect(),
        }
    } else if grows(|t| t.max_ba) {
        WeakEquivalence::NotWeaklyEquivalent {
            direction: "BA".into(),
            counts: trends.iter().map(|t| (t.window, t.max_ba)).collect(),
            indices: trends.iter().filter_map(|t| t.argmax_ba.clone()).collect(),
        }
    } else {
        WeakEquivalence::Inconclusive
    };
    Ok((verdict, trends))
}

/// Machine-checkable reason behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Witness {
    SupportPoint { point: Vec<f64>, covered_by: String },
    CountGrowth { direction: String, counts: Vec<(u32, usize)>, indices: Vec<Vec<i64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Evidence {
    pub support_test: SupportComparison,
    pub count_trends: Vec<CountTrend>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_equivalence: Option<WeakEquivalence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonCriterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qi: Option<QiCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_ratios: Option<NormComparison>,
    /// Assumptions the run could not check.
    pub unchecked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub outcome: Outcome,
    pub witnesses: Vec<Witness>,
    pub evidence: Evidence,
    pub config: RunConfig,
}

/// Optional corroboration for [`coorbit_equivalence`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompareOptions {
    /// Fit a quasi-isometry certificate for the transition map at this base point.
    pub qi_point: Option<Vector>,
    /// Also run with the reference point of the first base set.
    pub with_qi: bool,
    /// Attach decomposition-norm ratios over a packet battery.
    pub with_norms: bool,
    /// Battery for the norm ratios; packets along the mismatch direction when absent.
    pub battery: Option<Vec<Packet>>,
    /// (p, q) of the norm ratios; (1, 1) when absent.
    pub exponents: Option<(Exponent, Exponent)>,
}

pub fn cover_params(cfg: &RunConfig) -> CoverParams {
    CoverParams {
        coverage_samples: cfg.coverage_samples,
        seed: cfg.seed,
        budget: cfg.budget,
        tolerances: cfg.tolerances.clone(),
        ..CoverParams::default()
    }
}

/// Covers of one spec at the three run windows.
pub fn nested_covers(spec: &GroupSpec, cfg: &RunConfig) -> Result<Vec<InducedCover>> {
    let params = cover_params(cfg);
    cfg.windows().iter().map(|&w| build_induced_cover(spec, w, &params)).collect()
}

/// Full equivalence pipeline: supports, then weak equivalence of induced covers.
pub fn coorbit_equivalence(
    spec_a: &GroupSpec,
    spec_b: &GroupSpec,
    cfg: &RunConfig,
    opts: &CompareOptions,
) -> Result<Verdict> {
    cfg.validate()?;
    if spec_a.dim != spec_b.dim {
        return Err(Error::Dimension { expected: spec_a.dim, found: spec_b.dim });
    }
    let params = cover_params(cfg);
    let mut unchecked = Vec::new();
    for s in [spec_a, spec_b] {
        if matches!(s.kind, GroupKind::DiscreteFG { .. }) {
            unchecked.push("compact generation of the stabilizer of a discrete group".to_string());
        }
    }
    let support = support_equality_test(spec_a, spec_b, cfg.window, cfg.coverage_samples, &params)?;
    let mut evidence = Evidence {
        support_test: support.clone(),
        count_trends: Vec::new(),
        weak_equivalence: None,
        epsilon: scalar_evidence(spec_a, spec_b, cfg),
        qi: None,
        norm_ratios: None,
        unchecked,
    };
    if let SupportComparison::Unequal { witness, covered_by } = support {
        return Ok(Verdict {
            outcome: Outcome::NotEquivalent,
            witnesses: vec![Witness::SupportPoint { point: witness, covered_by }],
            evidence,
            config: cfg.clone(),
        });
    }
    let covers_a = nested_covers(spec_a, cfg)?;
    let covers_b = nested_covers(spec_b, cfg)?;
    let (weak, trends) = weak_equivalence_test(&covers_a, &covers_b, cfg.budget, &cfg.tolerances)?;
    evidence.count_trends = trends;
    evidence.weak_equivalence = Some(weak.clone());
    if opts.with_qi || opts.qi_point.is_some() {
        let xi = opts.qi_point.unwrap_or(covers_a[0].base.reference);
        match transition_certificate(spec_a, spec_b, &xi, cfg) {
            Ok(c) => evidence.qi = Some(c),
            Err(e) => evidence.unchecked.push(format!("transition certificate: {e}")),
        }
    }
    if opts.with_norms {
        let battery =
            opts.battery.clone().unwrap_or_else(|| default_battery(spec_a, spec_b, cfg.window as i64));
        let (p, q) = opts.exponents.unwrap_or((Exponent(1.0), Exponent(1.0)));
        match compare_norms(spec_a, spec_b, &battery, p, q, cfg) {
            Ok(c) => evidence.norm_ratios = Some(c),
            Err(e) => evidence.unchecked.push(format!("norm ratios: {e}")),
        }
    }
    let (outcome, witnesses) = match weak {
        WeakEquivalence::WeaklyEquivalent { .. } => (Outcome::Equivalent, Vec::new()),
        WeakEquivalence::NotWeaklyEquivalent { direction, counts, indices } => {
            (Outcome::NotEquivalent, vec![Witness::CountGrowth { direction, counts, indices }])
        }
        WeakEquivalence::Inconclusive => (Outcome::Inconclusive, Vec::new()),
    };
    Ok(Verdict { outcome, witnesses, evidence, config: cfg.clone() })
}

/// Epsilon sequence for a pair of cyclic or one-parameter groups, when defined.
fn scalar_evidence(a: &GroupSpec, b: &GroupSpec, cfg: &RunConfig) -> Option<EpsilonCriterion> {
    let step_matrix = |s: &GroupSpec| -> Option<Mat> {
        match &s.kind {
            GroupKind::Cyclic { matrix } => Some(*matrix),
            GroupKind::OneParameter { generator } => Some(mat_exp(generator)),
            GroupKind::ScalarSimilitude => Some(Mat::identity(s.dim).scale(std::f64::consts::E)),
            _ => None,
        }
    };
    let (ma, mb) = (step_matrix(a)?, step_matrix(b)?);
    epsilon_criterion(&ma, &mb, cfg.window as i64, &cfg.tolerances).ok()
}

/// Quasi-isometry certificate of the transition map p^{(2)}_* ∘ p^{(1)}_ξ.
///
/// Both groups must have a single window axis. Constants are fitted on
/// window K and checked on 2K and 4K.
pub fn transition_certificate(
    spec_a: &GroupSpec,
    spec_b: &GroupSpec,
    xi: &Vector,
    cfg: &RunConfig,
) -> Result<QiCertificate> {
    let params = cover_params(cfg);
    let [k1, k2, k3] = cfg.windows();
    let cover_a = build_induced_cover(spec_a, k3, &params)?;
    if cover_a.family.window_axes != 1 {
        return Err(Error::NotSupported("transition certificates need one-axis families".into()));
    }
    // The codomain cover must reach every image; grow it with the scale ratio.
    let (_, hi_a) = scale_rates(spec_a, cover_a.meta.step);
    let (lo_b, _) = scale_rates(spec_b, spec_b.default_step());
    let reach = ((k3 as f64) * hi_a / lo_b.max(1e-3)).ceil() as u32 + 4;
    let cover_b = build_induced_cover(spec_b, reach.max(k3), &params)?;
    if cover_b.family.window_axes != 1 {
        return Err(Error::NotSupported("transition certificates need one-axis families".into()));
    }
    let w_a = GeneratingSet::default_for(spec_a)?;
    let w_b = GeneratingSet::default_for(spec_b)?;
    let samples = par::map(&[k1, k2, k3], |&k| transition_pairs(&cover_a, &w_a, &cover_b, &w_b, xi, k));
    let samples: Vec<_> = samples.into_iter().collect::<Result<_>>()?;
    let r3 = transition_density(&cover_a, &cover_b, &w_b, xi, k3)?;
    fit_quasi_isometry(&samples, r3, &cfg.tolerances)
}

/// Smallest and largest |log σ| of one family step.
fn scale_rates(spec: &GroupSpec, step: f64) -> (f64, f64) {
    let m = match &spec.kind {
        GroupKind::OneParameter { generator } => mat_exp(&generator.scale(step)),
        GroupKind::Cyclic { matrix } => *matrix,
        _ => Mat::identity(spec.dim).scale(step.exp()),
    };
    let logs: Vec<f64> = m.singular_values().iter().map(|s| s.ln().abs()).collect();
    (logs.iter().copied().fold(f64::INFINITY, f64::min), logs.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all_fields = "camelCase")]
pub enum Cocompactness {
    Cocompact,
    /// A chart direction of the larger group the subgroup does not reach.
    NotCocompact { direction: Vec<f64> },
    /// An element of the subgroup outside the larger group.
    NotSubgroup { witness: Vec<Vec<f64>> },
}

/// Lie algebra data of a coordinate family: chart generators and which of
/// them are non-compact.
struct Algebra {
    generators: Vec<Mat>,
    noncompact: Vec<usize>,
}

fn skew_basis(d: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            out.push(Mat::from_fn(d, |r, c| {
                if (r, c) == (i, j) {
                    -1.0
                } else if (r, c) == (j, i) {
                    1.0
                } else {
                    0.0
                }
            }));
        }
    }
    out
}

fn algebra(spec: &GroupSpec) -> Option<Algebra> {
    let d = spec.dim;
    match &spec.kind {
        GroupKind::OneParameter { generator } => Some(Algebra { generators: vec![*generator], noncompact: vec![0] }),
        GroupKind::AbelianFlow { generators } => {
            Some(Algebra { generators: generators.clone(), noncompact: (0..generators.len()).collect() })
        }
        GroupKind::ScalarSimilitude => Some(Algebra { generators: vec![Mat::identity(d)], noncompact: vec![0] }),
        GroupKind::Similitude { frame } => {
            let f = frame.unwrap_or_else(|| Mat::identity(d));
            let fi = f.inverse().ok()?;
            let mut g = vec![Mat::identity(d)];
            g.extend(skew_basis(d).into_iter().map(|j| fi * j * f));
            Some(Algebra { generators: g, noncompact: vec![0] })
        }
        _ => None,
    }
}

/// Coordinates of `z` in the span of `gens`, if it lies there within 1e-8.
fn coordinates(z: &Mat, gens: &[Mat]) -> Option<Vec<f64>> {
    let d = z.dim();
    let n = gens.len();
    let a = nalgebra::DMatrix::from_fn(d * d, n, |r, c| gens[c][(r / d, r % d)]);
    let b = nalgebra::DVector::from_fn(d * d, |r, _| z[(r / d, r % d)]);
    let x = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let resid = (&a * &x - &b).norm();
    (resid <= 1e-8 * z.frobenius_norm().max(1.0)).then(|| x.iter().copied().collect())
}

/// Whether ⟨sub⟩ ≤ sup and, if so, whether the quotient is compact.
pub fn subgroup_cocompact_test(sub: &GroupSpec, sup: &GroupSpec) -> Result<Cocompactness> {
    if sub.dim != sup.dim {
        return Err(Error::Dimension { expected: sup.dim, found: sub.dim });
    }
    let d = sup.dim;
    let unsupported = || Error::NotSupported(format!("{} inside {}", sub.kind_name(), sup.kind_name()));
    // Sub-group generators: lattice steps and flow directions.
    let (steps, flows): (Vec<Mat>, Vec<Mat>) = match &sub.kind {
        GroupKind::Cyclic { matrix } => (vec![*matrix], Vec::new()),
        GroupKind::DiscreteFG { .. } => return Err(unsupported()),
        _ => (Vec::new(), algebra(sub).ok_or_else(unsupported)?.generators),
    };
    if let GroupKind::Cyclic { matrix: b } = &sup.kind {
        if let Some(f) = flows.first() {
            return Ok(Cocompactness::NotSubgroup { witness: mat_exp(&f.scale(1e-3)).rows() });
        }
        let a = steps[0];
        let lb = b.det().abs().ln();
        if lb.abs() < 1e-12 {
            return Err(unsupported());
        }
        let k = (a.det().abs().ln() / lb).round() as i64;
        let bk = b.pow(k)?;
        return Ok(if k != 0 && a.max_abs_diff(&bk) <= 1e-8 * bk.frobenius_norm().max(1.0) {
            Cocompactness::Cocompact
        } else {
            Cocompactness::NotSubgroup { witness: a.rows() }
        });
    }
    let alg = algebra(sup).ok_or_else(unsupported)?;
    let mut projected: Vec<Vec<f64>> = Vec::new();
    for f in &flows {
        match coordinates(f, &alg.generators) {
            Some(c) => projected.push(alg.noncompact.iter().map(|&i| c[i]).collect()),
            None => return Ok(Cocompactness::NotSubgroup { witness: mat_exp(f).rows() }),
        }
    }
    for a in &steps {
        let member = match &sup.kind {
            GroupKind::ScalarSimilitude | GroupKind::Similitude { .. } => {
                // Similitudes: F a F⁻¹ = c·R with R orthogonal.
                let f = match &sup.kind {
                    GroupKind::Similitude { frame: Some(f) } => *f,
                    _ => Mat::identity(d),
                };
                let m = f * *a * f.inverse()?;
                let c = m.det().abs().powf(1.0 / d as f64);
                let r = m.scale(1.0 / c);
                let orth = (r.transpose() * r).max_abs_diff(&Mat::identity(d)) <= 1e-8;
                let scalar = matches!(sup.kind, GroupKind::ScalarSimilitude);
                let ok = m.det() > 0.0
                    && orth
                    && (!scalar || r.max_abs_diff(&Mat::identity(d)) <= 1e-8)
                    && (d != 3 || r.det() > 0.0);
                ok.then(|| vec![c.ln()])
            }
            _ => {
                let l = mat_log(a).ok();
                l.and_then(|l| coordinates(&l, &alg.generators))
                    .map(|c| alg.noncompact.iter().map(|&i| c[i]).collect())
            }
        };
        match member {
            Some(c) => projected.push(c),
            None => return Ok(Cocompactness::NotSubgroup { witness: a.rows() }),
        }
    }
    // Cocompact iff the projected generators span the non-compact coordinates.
    let r = alg.noncompact.len();
    let gram = nalgebra::DMatrix::from_fn(r, r, |i, j| projected.iter().map(|p| p[i] * p[j]).sum::<f64>());
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let (k, &low) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| Error::Numerical("empty chart".into()))?;
    if top > 0.0 && low > 1e-9 * top {
        return Ok(Cocompactness::Cocompact);
    }
    let dir = canonical_sign(eig.eigenvectors.column(k).iter().copied().collect());
    Ok(Cocompactness::NotCocompact { direction: dir })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Transport {
    pub original: Verdict,
    pub conjugated: Verdict,
    pub agree: bool,
}

/// Runs the pipeline on (A, B) and on (M⁻¹AM, M⁻¹BM).
pub fn conjugation_transport(
    spec_a: &GroupSpec,
    spec_b: &GroupSpec,
    m: &Mat,
    cfg: &RunConfig,
    opts: &CompareOptions,
) -> Result<Transport> {
    let original = coorbit_equivalence(spec_a, spec_b, cfg, opts)?;
    let ca = conjugate_spec(spec_a, m)?;
    let cb = conjugate_spec(spec_b, m)?;
    let conjugated = coorbit_equivalence(&ca, &cb, cfg, opts)?;
    let agree = original.outcome == conjugated.outcome;
    Ok(Transport { original, conjugated, agree })
}

/// The sequence s_k = ‖A^{-k} B^{⌊εk⌋}‖ with ε = ln|det A| / ln|det B|.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EpsilonCriterion {
    pub epsilon: f64,
    pub k_range: (i64, i64),
    /// `(k, ln s_k)`.
    pub log_s: Vec<(i64, f64)>,
    pub bounded: bool,
    /// Exponential growth rate of s_k in |k| (0 when bounded).
    pub rate: f64,
}

impl EpsilonCriterion {
    pub fn s(&self, k: i64) -> Option<f64> {
        self.log_s.iter().find(|(j, _)| *j == k).map(|(_, l)| l.exp())
    }
}

/// ⌊x⌋, treating values within 1e-9 of an integer as that integer.
fn snapped_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Late-window maximum against early-window maximum (log scale).
fn stabilizes(points: &[(f64, f64)], t_max: f64, tol: f64) -> bool {
    let early = points.iter().filter(|p| p.0.abs() <= t_max / 2.0).map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let late = points.iter().filter(|p| p.0.abs() > t_max / 2.0).map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    late <= early + (1.0 + tol).ln()
}

/// Least-squares slope of `y` against `|x|` over the outer half, per side; the larger one.
fn growth_rate(points: &[(f64, f64)], t_max: f64) -> f64 {
    let slope = |sel: &dyn Fn(f64) -> bool| -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            points.iter().filter(|p| sel(p.0) && p.0.abs() >= t_max / 2.0).map(|p| (p.0.abs(), p.1)).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    };
    let plus = slope(&|t| t > 0.0).unwrap_or(0.0);
    let minus = slope(&|t| t < 0.0).unwrap_or(0.0);
    plus.max(minus).max(0.0)
}

fn eigen_moduli_side(m: &Mat) -> Option<i8> {
    let e = m.eigenvalues();
    if e.iter().all(|z| z.norm() > 1.0 + 1e-9) {
        Some(1)
    } else if e.iter().all(|z| z.norm() < 1.0 - 1e-9) {
        Some(-1)
    } else {
        None
    }
}

/// Products carried as (log scale, normalized matrix) to avoid overflow.
#[derive(Clone, Copy)]
struct Scaled {
    log: f64,
    m: Mat,
}

impl Scaled {
    fn identity(d: usize) -> Self {
        Scaled { log: 0.0, m: Mat::identity(d) }
    }

    fn renormalize(mut self) -> Self {
        let n = self.m.op_norm();
        if n > 0.0 && !(1e-8..=1e8).contains(&n) {
            self.m = self.m.scale(1.0 / n);
            self.log += n.ln();
        }
        self
    }

    fn log_norm(&self) -> f64 {
        self.log + self.m.op_norm().ln()
    }
}

pub fn epsilon_criterion(a: &Mat, b: &Mat, k_max: i64, tol: &Tolerances) -> Result<EpsilonCriterion> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    if k_max < 2 {
        return Err(Error::Domain("k range must be at least 2".into()));
    }
    let (da, db) = (a.det().abs(), b.det().abs());
    if (da.ln()).abs() < 1e-12 || (db.ln()).abs() < 1e-12 {
        return Err(Error::Domain("determinants must have modulus different from 1".into()));
    }
    match (eigen_moduli_side(a), eigen_moduli_side(b)) {
        (Some(x), Some(y)) if x == y => {}
        _ => return Err(Error::Domain("A and B must be both expansive or both contractive".into())),
    }
    let eps = da.ln() / db.ln();
    let d = a.dim();
    let mut log_s = Vec::with_capacity(2 * k_max as usize + 1);
    if a == b {
        // A^{-k} A^{k} = I.
        for k in -k_max..=k_max {
            log_s.push((k, 0.0));
        }
    } else {
        let a_inv = a.inverse()?;
        let b_inv = b.inverse()?;
        for (sign, a_step) in [(1i64, a_inv), (-1i64, *a)] {
            let mut p = Scaled::identity(d);
            let mut prev = 0i64;
            for j in 1..=k_max {
                let k = sign * j;
                let e = snapped_floor(eps * k as f64);
                p.m = a_step * p.m;
                let diff = e - prev;
                let bs = if diff >= 0 { *b } else { b_inv };
                for _ in 0..diff.abs() {
                    p.m = p.m * bs;
                    p = p.renormalize();
                }
                p = p.renormalize();
                prev = e;
                log_s.push((k, p.log_norm()));
            }
        }
        log_s.push((0, 0.0));
        log_s.sort_by_key(|x| x.0);
    }
    let pts: Vec<(f64, f64)> = log_s.iter().map(|&(k, l)| (k as f64, l)).collect();
    let bounded = stabilizes(&pts, k_max as f64, tol.stabilization);
    let rate = if bounded { 0.0 } else { growth_rate(&pts, k_max as f64) };
    Ok(EpsilonCriterion { epsilon: eps, k_range: (-k_max, k_max), log_s, bounded, rate })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Isotropy {
    EquivalentToScalar { s: f64, max_norm: f64 },
    NotEquivalentToScalar { s: f64, rate: f64, max_norm: f64 },
}

/// Default horizon for the isotropy test.
pub const ISOTROPY_HORIZON: f64 = 50.0;

/// Log-spaced sample times on [−T, T].
fn log_times(t_max: f64, n: usize) -> Vec<f64> {
    let lo = (t_max * 1e-4).ln();
    let hi = t_max.ln();
    let mut ts = vec![0.0];
    for i in 0..n {
        let t = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        ts.push(t);
        ts.push(-t);
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts
}

/// Splits X = sI + Y and tests whether exp(ℝY) stays bounded on [−T, T].
pub fn one_param_isotropy_test(x: &Mat, t_max: f64, tol: &Tolerances) -> Result<Isotropy> {
    if let crate::matgroup::Admissibility::NotAdmissible { witness_re, witness_im } = check_one_parameter_admissible(x) {
        return Err(Error::Domain(format!("generator not admissible (eigenvalue {witness_re} + {witness_im}i)")));
    }
    let d = x.dim();
    let s = x.trace() / d as f64;
    let y = *x - Mat::identity(d).scale(s);
    let ts = log_times(t_max, 400);
    let logs = par::map(&ts, |&t| mat_exp(&y.scale(t)).op_norm().ln());
    let pts: Vec<(f64, f64)> = ts.iter().copied().zip(logs).collect();
    let max_norm = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).exp();
    if stabilizes(&pts, t_max, tol.stabilization) {
        Ok(Isotropy::EquivalentToScalar { s, max_norm })
    } else {
        Ok(Isotropy::NotEquivalentToScalar { s, rate: growth_rate(&pts, t_max), max_norm })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Eigenspace {
    pub eigenvalue: f64,
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Partner {
    /// No irreducibly admissible group is coorbit equivalent to exp(ℝX).
    NoIrreduciblePartner {
        reason: String,
        rate: f64,
        /// Eigenspaces of X (diagonalizable real spectrum only).
        eigenspaces: Option<Vec<Eigenspace>>,
        /// Smallest proper invariant eigenspace.
        invariant_subspace: Option<Vec<Vec<f64>>>,
    },
    PossiblyScalarEquivalent { s: f64 },
}

/// Real eigenspaces of X when it is diagonalizable over ℝ.
pub fn real_eigenspaces(x: &Mat) -> Option<Vec<Eigenspace>> {
    let d = x.dim();
    let eig = x.eigenvalues();
    if eig.iter().any(|z| z.im.abs() > 1e-9) {
        return None;
    }
    let mut vals: Vec<f64> = eig.iter().map(|z| z.re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct: Vec<f64> = Vec::new();
    for v in vals {
        if distinct.last().is_none_or(|l| (v - l).abs() > 1e-7 * v.abs().max(1.0)) {
            distinct.push(v);
        }
    }
    let mut out = Vec::new();
    let mut total = 0;
    for lam in distinct {
        let basis = (*x - Mat::identity(d).scale(lam)).null_space(1e-8);
        total += basis.len();
        out.push(Eigenspace {
            eigenvalue: lam,
            basis: basis.iter().map(|v| canonical_sign(v.to_vec())).collect(),
        });
    }
    (total == d).then_some(out)
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-12) {
        if *x < 0.0 {
            v.iter_mut().for_each(|e| *e = -*e);
        }
    }
    v.iter_mut().for_each(|e| {
        if e.abs() < 1e-15 {
            *e = 0.0
        }
    });
    v
}

pub fn irreducible_partner_test(x: &Mat, tol: &Tolerances) -> Result<Partner> {
    match one_param_isotropy_test(x, ISOTROPY_HORIZON, tol)? {
        Isotropy::EquivalentToScalar { s, .. } => Ok(Partner::PossiblyScalarEquivalent { s }),
        Isotropy::NotEquivalentToScalar { rate, .. } => {
            let eigenspaces = real_eigenspaces(x);
            let invariant_subspace = eigenspaces.as_ref().and_then(|es| {
                es.iter()
                    .filter(|e| e.basis.len() < x.dim())
                    .min_by_key(|e| e.basis.len())
                    .map(|e| e.basis.clone())
            });
            Ok(Partner::NoIrreduciblePartner {
                reason: "the trace-free part generates an unbounded group, so the one-parameter group is not \
                         equivalent to the scalar dilations, the only candidate among irreducible groups"
                    .into(),
                rate,
                eigenspaces,
                invariant_subspace,
            })
        }
    }
}
