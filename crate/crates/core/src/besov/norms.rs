//! Decomposition-space and anisotropic Besov norms of grid functions.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::{inverse_samples, lp_quadrature, GridFunction};
use super::partition::{build_partition, PartitionOfUnity};
use crate::config::{RunConfig, Tolerances};
use crate::cover::build_induced_cover;
use crate::error::{Error, Result};
use crate::matgroup::{GroupSpec, Mat};
use crate::par;

/// An integrability exponent in `[1, ∞]`. Serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self> {
        if v >= 1.0 {
            Ok(Exponent(v))
        } else {
            Err(Error::Domain(format!("exponent {v} must lie in [1, ∞]")))
        }
    }

    /// 1/p, zero for p = ∞.
    pub fn recip(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
            Raw::Text(t) => return Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        };
        Exponent::new(v).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            t => Exponent::new(t.parse().map_err(|_| Error::Domain(format!("bad exponent {t:?}")))?),
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// ℓ^q norm of nonnegative terms; maximum for q = ∞.
pub fn lq_aggregate(terms: impl IntoIterator<Item = f64>, q: Exponent) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(0.0, f64::max);
    if q.0.is_infinite() {
        max
    } else if q.0 == 1.0 {
        terms.iter().sum()
    } else if max == 0.0 || !max.is_finite() {
        max
    } else {
        // Scaled by the largest term so powers neither underflow nor overflow.
        max * terms.iter().map(|t| (t / max).powf(q.0)).sum::<f64>().powf(1.0 / q.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormEntry {
    pub id: usize,
    pub index: Vec<i64>,
    /// ‖ℱ⁻¹(φ_i f̂)‖_{L^p}.
    pub magnitude: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormReport {
    pub p: Exponent,
    pub q: Exponent,
    pub entries: Vec<NormEntry>,
    pub norm: f64,
    /// L² mass of f̂ outside the partition, relative to ‖f̂‖₂.
    pub tail: f64,
    pub tail_warning: bool,
}

impl NormReport {
    /// ℓ^q combination of the weighted magnitudes.
    pub fn aggregate(entries: &[NormEntry], q: Exponent) -> f64 {
        lq_aggregate(entries.iter().map(|e| e.weight * e.magnitude), q)
    }
}

/// Flat indices where f̂ does not vanish.
pub(crate) fn support_points(fh: &GridFunction) -> Vec<usize> {
    (0..fh.len()).filter(|&i| fh.samples[i] != Complex64::new(0.0, 0.0)).collect()
}

/// Per-member magnitudes with caller-chosen weights.
pub(crate) fn weighted_norm(
    f: &GridFunction,
    pou: &PartitionOfUnity,
    p: Exponent,
    q: Exponent,
    tol: &Tolerances,
    weight: impl Fn(usize) -> f64 + Sync,
) -> Result<NormReport> {
    let fh = f.to_frequency();
    let support = support_points(&fh);
    let gp = pou.sample(&fh, Some(&support))?;
    let cell = fh.dx().powi(fh.dim as i32);
    let magnitudes = par::map(&gp.members, |ms| {
        let mut data = vec![Complex64::new(0.0, 0.0); fh.len()];
        for &(flat, phi) in &ms.values {
            data[flat] = fh.samples[flat] * phi;
        }
        lp_quadrature(&inverse_samples(&fh, &data), cell, p.0)
    });
    let entries: Vec<NormEntry> = gp
        .members
        .iter()
        .zip(magnitudes)
        .map(|(ms, magnitude)| {
            let m = &pou.members[ms.member];
            NormEntry { id: m.id, index: m.index.clone(), magnitude, weight: weight(ms.member) }
        })
        .collect();
    let total: f64 = support.iter().map(|&i| fh.samples[i].norm_sqr()).sum();
    let lost: f64 = gp.uncovered.iter().map(|&i| fh.samples[i].norm_sqr()).sum();
    let tail = if total > 0.0 { (lost / total).sqrt() } else { 0.0 };
    Ok(NormReport {
        p,
        q,
        norm: NormReport::aggregate(&entries, q),
        entries,
        tail,
        tail_warning: tail > tol.tail_warning,
    })
}

/// `‖(u_i ‖ℱ⁻¹(φ_i f̂)‖_{L^p})_i‖_{ℓ^q}` with `u_i = |det h_i|^{1/2 − 1/p}`.
pub fn decomposition_norm(
    f: &GridFunction,
    pou: &PartitionOfUnity,
    p: Exponent,
    q: Exponent,
    tol: &Tolerances,
) -> Result<NormReport> {
    let e = 0.5 - p.recip();
    weighted_norm(f, pou, p, q, tol, |k| pou.members[k].det.powf(e))
}

/// Minimal eigenvalue modulus minus one must exceed this for expansiveness.
pub const EXPANSIVE_TOL: f64 = 1e-9;

pub fn is_expansive(a: &Mat) -> bool {
    a.is_finite() && a.eigenvalues().iter().all(|z| z.norm() > 1.0 + EXPANSIVE_TOL)
}

/// `‖(|det A|^{αj} ‖f ∗ φ_j‖_{L^p})_j‖_{ℓ^q}` with `φ̂_j(ξ) = φ̂_0(A^{−jT}ξ)`.
///
/// The φ_j come from the partition of the cover induced by ⟨A⟩; the member
/// with index i equals φ_{−i}.
pub fn anisotropic_besov_norm(
    f: &GridFunction,
    a: &Mat,
    alpha: f64,
    p: Exponent,
    q: Exponent,
    cfg: &RunConfig,
) -> Result<NormReport> {
    if !is_expansive(a) {
        return Err(Error::Domain(format!("matrix {a:?} is not expansive")));
    }
    let spec = GroupSpec::cyclic(*a)?;
    let cover = build_induced_cover(&spec, cfg.window, &crate::equiv::cover_params(cfg))?;
    let pou = build_partition(&cover)?;
    anisotropic_besov_norm_with(f, &pou, a, alpha, p, q, &cfg.tolerances)
}

/// As [`anisotropic_besov_norm`] on a prebuilt cyclic partition.
pub fn anisotropic_besov_norm_with(
    f: &GridFunction,
    pou: &PartitionOfUnity,
    a: &Mat,
    alpha: f64,
    p: Exponent,
    q: Exponent,
    tol: &Tolerances,
) -> Result<NormReport> {
    let ln_det = a.det().abs().ln();
    weighted_norm(f, pou, p, q, tol, |k| (-(pou.members[k].index[0] as f64) * alpha * ln_det).exp())
}

/// The exponent α for which the Besov weights equal the decomposition
/// weights `u_i` on the same cyclic partition.
pub fn matching_alpha(p: Exponent) -> f64 {
    p.recip() - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverParams;
    use crate::matgroup::Vector;

    #[test]
    fn aggregate_survives_extreme_scales() {
        let tiny = [1e-80, 1e-83, 0.0];
        assert!((lq_aggregate(tiny, Exponent(6.0)) / 1e-80 - 1.0).abs() < 1e-12);
        let huge = [1e200, 1e200];
        assert!((lq_aggregate(huge, Exponent(2.0)) / 1e200 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(lq_aggregate([0.0, 0.0], Exponent(3.0)), 0.0);
    }

    fn dyadic() -> (GroupSpec, PartitionOfUnity) {
        let spec = GroupSpec::cyclic(Mat::identity(2).scale(2.0)).unwrap();
        let cover = build_induced_cover(&spec, 6, &CoverParams::default()).unwrap();
        (spec.clone(), build_partition(&cover).unwrap())
    }

    fn bump(center: [f64; 2], w: f64) -> impl Fn(&Vector) -> Complex64 {
        move |xi: &Vector| {
            let r2 = ((xi[0] - center[0]).powi(2) + (xi[1] - center[1]).powi(2)) / (w * w);
            if r2 < 1.0 {
                Complex64::new((1.0 - 1.0 / (1.0 - r2)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
    }

    fn packet(center: [f64; 2], w: f64) -> GridFunction {
        let c = Vector::from_slice(&center);
        let extent = 0.5 * 28.0 / w;
        GridFunction::from_frequency(2, 64, extent, c, bump(center, w)).unwrap()
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let (_, pou) = dyadic();
        let f = GridFunction::zeros(2, 32, 4.0).unwrap();
        let r = decomposition_norm(&f, &pou, Exponent(1.0), Exponent(1.0), &Tolerances::default())
            .unwrap();
        assert_eq!(r.norm, 0.0);
        assert!(r.entries.is_empty());
    }

    #[test]
    fn single_plateau_term_reproduces_l2() {
        let (_, pou) = dyadic();
        // The plateau of the element with index 0 is |ξ| ∈ [2^{-1/2}, 2^{1/2}] in
        // log-radius; a narrow packet at radius 1 stays on it.
        let f = packet([1.0, 0.0], 0.12);
        let tol = Tolerances::default();
        let r = decomposition_norm(&f, &pou, Exponent(2.0), Exponent(2.0), &tol).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].index, vec![0]);
        let l2 = f.l2_norm();
        assert!((r.norm - l2).abs() <= 1e-6 * l2, "{} vs {l2}", r.norm);
    }

    #[test]
    fn homogeneity_and_aggregation() {
        let (_, pou) = dyadic();
        let f = packet([1.8, 1.1], 0.9);
        let tol = Tolerances::default();
        for (p, q) in [(1.0, 1.0), (2.0, 2.0), (1.0, f64::INFINITY), (3.0, 1.5)] {
            let (p, q) = (Exponent(p), Exponent(q));
            let r = decomposition_norm(&f, &pou, p, q, &tol).unwrap();
            assert!(r.entries.len() >= 2);
            assert_eq!(r.norm, NormReport::aggregate(&r.entries, q));
            let c = Complex64::new(-1.5, 2.0);
            let rc = decomposition_norm(&f.scaled(c), &pou, p, q, &tol).unwrap();
            assert!((rc.norm - 2.5 * r.norm).abs() <= 1e-12 * rc.norm);
        }
    }

    #[test]
    fn besov_matches_decomposition_at_matching_alpha() {
        let (_, pou) = dyadic();
        let a = Mat::identity(2).scale(2.0);
        let f = packet([3.0, -1.0], 1.2);
        let tol = Tolerances::default();
        for (p, q) in [(1.0, 1.0), (2.0, 2.0), (4.0, 1.0)] {
            let (p, q) = (Exponent(p), Exponent(q));
            let d = decomposition_norm(&f, &pou, p, q, &tol).unwrap();
            let b = anisotropic_besov_norm_with(&f, &pou, &a, matching_alpha(p), p, q, &tol).unwrap();
            assert!((d.norm - b.norm).abs() <= 1e-12 * d.norm);
        }
    }

    #[test]
    fn plancherel_identity_at_two_two() {
        // ‖(‖φ_j f̂‖₂)_j‖_{ℓ²}² = ∫ |f̂|² Σ φ_j², bounded by ‖f‖² and ‖f‖²/m.
        let (_, pou) = dyadic();
        let a = Mat::identity(2).scale(2.0);
        let f = packet([2.0, 1.0], 1.5);
        let fh = f.to_frequency();
        let tol = Tolerances::default();
        let r = anisotropic_besov_norm_with(&f, &pou, &a, 0.0, Exponent(2.0), Exponent(2.0), &tol).unwrap();
        let mut oracle = 0.0;
        let mut overlap = 0usize;
        for i in 0..fh.len() {
            let z = fh.samples[i].norm_sqr();
            if z == 0.0 {
                continue;
            }
            let vals = pou.eval(&fh.frequency(i)).unwrap();
            overlap = overlap.max(vals.len());
            oracle += z * vals.iter().map(|v| v.1 * v.1).sum::<f64>();
        }
        let oracle = (oracle * fh.dxi().powi(2)).sqrt();
        assert!((r.norm - oracle).abs() <= 1e-10 * oracle);
        let l2 = f.l2_norm();
        assert!(r.norm <= l2 * (1.0 + 1e-12));
        assert!(r.norm >= l2 / (overlap as f64).sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn shifting_alpha_shifts_single_term() {
        let (_, pou) = dyadic();
        let a = Mat::identity(2).scale(2.0);
        // Radius 4 sits on the plateau of index −2, that is j = 2.
        let f = packet([4.0, 0.0], 0.5);
        let tol = Tolerances::default();
        let (p, q) = (Exponent(1.0), Exponent(1.0));
        let r0 = anisotropic_besov_norm_with(&f, &pou, &a, 0.3, p, q, &tol).unwrap();
        let r1 = anisotropic_besov_norm_with(&f, &pou, &a, 0.6, p, q, &tol).unwrap();
        assert_eq!(r0.entries.len(), 1);
        let shift = r1.norm.ln() - r0.norm.ln();
        assert!((shift - 0.3 * 2.0 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_expansive() {
        let cfg = RunConfig::default();
        let f = GridFunction::zeros(2, 16, 1.0).unwrap();
        let r = anisotropic_besov_norm(&f, &Mat::diag(&[2.0, 1.0]), 0.0, Exponent(1.0), Exponent(1.0), &cfg);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        let s = serde_json::to_string(&Exponent::INFINITY).unwrap();
        assert_eq!(s, "\"inf\"");
        assert_eq!(serde_json::from_str::<Exponent>("1.5").unwrap(), Exponent(1.5));
    }
}
