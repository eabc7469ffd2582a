//! Analyzing windows, the discrete Calderón condition and direct coorbit norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::{inverse_samples, lp_quadrature, GridFunction};
use super::norms::{is_expansive, lq_aggregate, support_points, Exponent};
use super::partition::{radial_bounds, smoothstep, PartitionOfUnity};
use crate::config::Tolerances;
use crate::cover::halton::cube_to_sphere;
use crate::cover::Geometry;
use crate::error::{Error, Result};
use crate::matgroup::{mat_exp, GroupElement, GroupKind, GroupSpec, Mat, Vector};
use crate::par;

/// Orbit sums stop once powers leave this range of singular values.
const POWER_LIMIT: f64 = 1e150;
const MAX_POWERS: i64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `smoothstep(margin / width)` of a shell or body.
    Shell { geometry: Geometry, width: f64 },
    /// `√φ_k` for a member of a partition of unity.
    Partition { pou: PartitionOfUnity, member: usize },
}

impl Profile {
    fn raw(&self, xi: &Vector) -> f64 {
        match self {
            Profile::Shell { geometry, width } => smoothstep(geometry.log_margin(xi) / width),
            Profile::Partition { pou, member } => pou.value(*member, xi).sqrt(),
        }
    }

    fn radial_bounds(&self) -> (f64, f64) {
        match self {
            Profile::Shell { geometry, .. } => radial_bounds(geometry),
            Profile::Partition { pou, member } => radial_bounds(&pou.members[*member].geometry),
        }
    }
}

/// Powers `(A^{jT}, σ_min, σ_max)` for the orbit sums.
#[derive(Debug, Clone, PartialEq)]
struct Orbit {
    powers: Vec<(i64, Mat, f64, f64)>,
}

impl Orbit {
    fn new(a: &Mat) -> Result<Orbit> {
        let at = a.transpose();
        let at_inv = at.inverse()?;
        let mut powers = vec![(0, Mat::identity(a.dim()), 1.0, 1.0)];
        for (step, sign) in [(at, 1i64), (at_inv, -1)] {
            let mut p = Mat::identity(a.dim());
            for j in 1..=MAX_POWERS {
                p = p * step;
                let s = p.singular_values();
                let (hi, lo) = (s[0], s[s.len() - 1]);
                if !(hi < POWER_LIMIT && lo > 1.0 / POWER_LIMIT) {
                    break;
                }
                powers.push((sign * j, p, lo, hi));
            }
        }
        powers.sort_by_key(|e| e.0);
        Ok(Orbit { powers })
    }

    /// Points `A^{jT}ξ` whose norm lies in `[lo, hi]`.
    fn hits<'a>(&'a self, xi: &'a Vector, lo: f64, hi: f64) -> impl Iterator<Item = Vector> + 'a {
        let r = xi.norm();
        self.powers.iter().filter_map(move |(_, p, smin, smax)| {
            if smin * r > hi || smax * r < lo {
                return None;
            }
            let eta = p.apply(xi);
            let n = eta.norm();
            (lo <= n && n <= hi).then_some(eta)
        })
    }
}

/// Frequency-side profile ψ̂ with optional Calderón normalization against ⟨A⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzingWindow {
    pub profile: Profile,
    /// Generator and quadrature weight of the normalization, once applied.
    pub normalizer: Option<(Mat, f64)>,
    orbit: Option<Orbit>,
}

impl AnalyzingWindow {
    pub fn new(profile: Profile) -> Self {
        AnalyzingWindow { profile, normalizer: None, orbit: None }
    }

    /// Random smooth shell bump around the unit sphere.
    pub fn random_shell(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r0 = rng.gen_range(0.35..0.6);
        let r1 = r0 * rng.gen_range(3.0..6.0);
        let mut shape = Mat::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                shape[(i, j)] += rng.gen_range(-0.15..0.15);
            }
        }
        let shell = crate::cover::Shell::ellipsoidal(shape, r0, r1)?;
        let geometry = Geometry::Shell(shell);
        let width = 0.5 * (r1 / r0).ln() * rng.gen_range(0.3..0.9);
        Ok(AnalyzingWindow::new(Profile::Shell { geometry, width }))
    }

    pub fn from_partition(pou: &PartitionOfUnity, member: usize) -> Self {
        AnalyzingWindow::new(Profile::Partition { pou: pou.clone(), member })
    }

    /// Unnormalized profile value.
    pub fn raw(&self, xi: &Vector) -> f64 {
        self.profile.raw(xi)
    }

    /// `w Σ_j ψ̂_raw(A^{jT}ξ)²` for the normalizer, if any.
    pub fn orbit_sum(&self, xi: &Vector) -> Option<f64> {
        let ((_, w), orbit) = (self.normalizer.as_ref()?, self.orbit.as_ref()?);
        let (lo, hi) = self.profile.radial_bounds();
        Some(w * orbit.hits(xi, lo, hi).map(|eta| self.raw(&eta).powi(2)).sum::<f64>())
    }

    /// Divides ψ̂ by the square root of its weighted Calderón sum over ⟨A⟩.
    pub fn normalized(&self, a: &Mat, weight: f64) -> Result<AnalyzingWindow> {
        if !is_expansive(a) && !is_expansive(&a.inverse()?) {
            return Err(Error::Domain("Calderón normalization needs an expansive generator".into()));
        }
        Ok(AnalyzingWindow {
            profile: self.profile.clone(),
            normalizer: Some((*a, weight)),
            orbit: Some(Orbit::new(a)?),
        })
    }

    /// Normalized ψ̂(ξ); the raw profile when no normalizer is set.
    pub fn eval(&self, xi: &Vector) -> f64 {
        let raw = self.raw(xi);
        if raw == 0.0 {
            return 0.0;
        }
        match self.orbit_sum(xi) {
            Some(s) if s > 0.0 => raw / s.sqrt(),
            Some(_) => 0.0,
            None => raw,
        }
    }

    /// Default test annulus `[ρ, ρ σ_max(A)]`, met by every orbit.
    pub fn test_annulus(&self, a: &Mat) -> (f64, f64) {
        let (lo, hi) = self.profile.radial_bounds();
        let rho = (lo.max(1e-300) * hi).sqrt();
        let s = a.singular_values()[0];
        let s = if s > 1.0 { s } else { 1.0 / a.singular_values()[a.dim() - 1] };
        (rho, rho * s)
    }
}

/// Max deviation of `w Σ_j |ψ̂(A^{jT}ξ)|²` from one after normalization,
/// over `count` seeded log-uniform points of `annulus`.
pub fn calderon_check(
    psi: &AnalyzingWindow,
    a: &Mat,
    weight: f64,
    annulus: (f64, f64),
    count: usize,
    seed: u64,
) -> Result<f64> {
    if !is_expansive(a) {
        return Err(Error::Domain(format!("matrix {a:?} is not expansive")));
    }
    let psi = match &psi.normalizer {
        Some((m, w)) if m == a && *w == weight => psi.clone(),
        _ => psi.normalized(a, weight)?,
    };
    let d = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (annulus.0.ln(), annulus.1.ln());
    let points: Vec<Vector> = (0..count)
        .map(|_| {
            let u: Vec<f64> = (0..d.max(2) - 1).map(|_| rng.gen::<f64>()).collect();
            let dir = if d == 1 {
                Vector::from_slice(&[if u[0] < 0.5 { -1.0 } else { 1.0 }])
            } else {
                cube_to_sphere(&u, d)
            };
            dir.scale(rng.gen_range(l0..l1).exp())
        })
        .collect();
    let (lo, hi) = psi.profile.radial_bounds();
    let orbit = psi.orbit.as_ref().expect("normalized window has an orbit");
    let sums = par::map(&points, |xi| {
        let raw_sum = psi.orbit_sum(xi).unwrap_or(0.0);
        if raw_sum == 0.0 {
            return Err(Error::InadmissibleWindow(xi.to_vec()));
        }
        Ok(weight * orbit.hits(xi, lo, hi).map(|eta| psi.eval(&eta).powi(2)).sum::<f64>())
    });
    let mut dev: f64 = 0.0;
    for s in sums {
        dev = dev.max((s? - 1.0).abs());
    }
    Ok(dev)
}

/// Quadrature nodes `h_k` with Haar weights for a cyclic, one-parameter or scalar group.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Quadrature {
    pub window: u32,
    /// The step `A` with nodes `A^k`, and the chart weight of one step.
    pub generator: Mat,
    pub weight: f64,
    pub nodes: Vec<GroupElement>,
}

impl Quadrature {
    /// Midpoint rule on the well-spread lattice `|k| ≤ window`.
    pub fn for_spec(spec: &GroupSpec, window: u32) -> Result<Quadrature> {
        let d = spec.dim;
        let step = spec.step.unwrap_or_else(|| spec.default_step());
        let (generator, weight) = match &spec.kind {
            GroupKind::Cyclic { matrix } => (*matrix, 1.0),
            GroupKind::OneParameter { generator } => (mat_exp(&generator.scale(step)), step),
            GroupKind::ScalarSimilitude => (Mat::identity(d).scale(step.exp()), step),
            _ => {
                return Err(Error::NotSupported(format!(
                    "direct coorbit norms for {} groups",
                    spec.kind_name()
                )))
            }
        };
        let nodes = (-(window as i64)..=window as i64)
            .map(|k| Ok(GroupElement { matrix: generator.pow(k)?, coords: None }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Quadrature { window, generator, weight, nodes })
    }
}

/// `(Σ_k w ‖W_ψ f(·, h_k)‖_p^q / |det h_k|)^{1/q}` with
/// `W_ψ f(·, h) = ℱ⁻¹(f̂ · conj ψ̂(hᵀ·)) |det h|^{1/2}`.
pub fn coorbit_norm_direct(
    f: &GridFunction,
    spec: &GroupSpec,
    psi: &AnalyzingWindow,
    p: Exponent,
    q: Exponent,
    quadrature: &Quadrature,
    tol: &Tolerances,
) -> Result<f64> {
    if !matches!(
        spec.kind,
        GroupKind::Cyclic { .. } | GroupKind::OneParameter { .. } | GroupKind::ScalarSimilitude
    ) {
        return Err(Error::NotSupported(format!("direct coorbit norms for {} groups", spec.kind_name())));
    }
    match &psi.normalizer {
        Some((a, w))
            if a.max_abs_diff(&quadrature.generator) <= 1e-12 * a.frobenius_norm()
                && (w - quadrature.weight).abs() <= 1e-15 => {}
        _ => {
            return Err(Error::Config(
                "analyzing window must be normalized against the quadrature generator".into(),
            ))
        }
    }
    let fh = f.to_frequency();
    let support = support_points(&fh);
    if support.is_empty() {
        return Ok(0.0);
    }
    // ψ̂(hᵀξ) = raw(hᵀξ)/√S(ξ) because the orbit sum S is invariant under ⟨A⟩.
    let inv_sqrt: Vec<f64> = par::map(&support, |&i| {
        let s = psi.orbit_sum(&fh.frequency(i)).unwrap_or(0.0);
        if s > 0.0 {
            1.0 / s.sqrt()
        } else {
            0.0
        }
    });
    let cell = fh.dx().powi(fh.dim as i32);
    let per_node = par::map(&quadrature.nodes, |h| {
        let det = h.matrix.det().abs();
        let ht = h.matrix.transpose();
        let mut data = vec![Complex64::new(0.0, 0.0); fh.len()];
        let mut captured = 0.0;
        let mut any = false;
        for (k, &i) in support.iter().enumerate() {
            let v = psi.raw(&ht.apply(&fh.frequency(i))) * inv_sqrt[k];
            if v != 0.0 {
                data[i] = fh.samples[i] * (v * det.sqrt());
                captured += fh.samples[i].norm_sqr() * v * v;
                any = true;
            }
        }
        let norm = if any { lp_quadrature(&inverse_samples(&fh, &data), cell, p.0) } else { 0.0 };
        (norm, det, captured)
    });
    let total: f64 = support.iter().map(|&i| fh.samples[i].norm_sqr()).sum();
    let captured: f64 = per_node.iter().map(|x| x.2).sum::<f64>() * quadrature.weight;
    if captured < (1.0 - tol.tail_warning) * total {
        return Err(Error::Truncation(format!(
            "quadrature window {} captures {:.3} of the spectral mass",
            quadrature.window,
            captured / total
        )));
    }
    let value = if q.0.is_infinite() {
        per_node.iter().map(|x| x.0).fold(0.0, f64::max)
    } else {
        let terms = per_node.iter().map(|&(n, det, _)| (quadrature.weight / det).powf(1.0 / q.0) * n);
        lq_aggregate(terms, q)
    };
    Ok(value)
}
