//! Properness, support divergence and support equality diagnostics.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::build::{annulus_samples, build_induced_cover, CoverParams, InducedCover};
use super::geometry::{Geometry, Shell};
use super::intersect::{intersects_with, Contact};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matgroup::family::matrix_key;
use crate::matgroup::{enumerate_family, enumerate_word_ball, GroupKind, GroupSpec, Vector, WellSpreadFamily};
use crate::par;

fn family_for(spec: &GroupSpec, window: u32) -> Result<WellSpreadFamily> {
    match spec.kind {
        GroupKind::DiscreteFG { .. } => enumerate_word_ball(spec, window, super::build::DEFAULT_WORD_CAP),
        _ => enumerate_family(spec, window, spec.default_step()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Properness {
    /// The member set stabilized; indices of distinct members and the max ‖h‖.
    Bounded { max_norm: f64, members: Vec<Vec<i64>> },
    /// New members keep appearing: `(window, distinct members)` per window.
    UnboundedTrend { counts: Vec<(u32, usize)>, witness: Vec<i64> },
}

/// Samples `{h : h^T C ∩ C ≠ ∅}` over the chart window `max_window`.
///
/// Bounded when no new member appears in the outer half of the window.
pub fn properness_check(spec: &GroupSpec, c: &Shell, max_window: u32, budget: usize) -> Result<Properness> {
    if max_window < 2 {
        return Err(Error::Config("properness window must be at least 2".into()));
    }
    let tol = Tolerances::default();
    let family = family_for(spec, max_window)?;
    let base = Geometry::Shell(c.clone());
    let hits = par::map(&family.members, |m| -> Result<bool> {
        // h^T C ∩ C ≠ ∅ ⇔ C ∩ h^{-T} C ≠ ∅.
        let img = base.dual_image(&m.element.matrix)?;
        Ok(intersects_with(&base, &img, budget, Contact::Closed, &tol)?.intersects())
    });
    let mut found = Vec::new();
    for (m, hit) in family.members.iter().zip(hits) {
        if hit? {
            found.push((family.radius_of(&m.index), m));
        }
    }
    // Distinct elements, each at its smallest chart radius.
    found.sort_by_key(|(r, _)| *r);
    let mut seen = HashSet::new();
    let mut members: Vec<(u64, Vec<i64>, f64)> = Vec::new();
    for (r, m) in found {
        if seen.insert(matrix_key(&m.element.matrix)) {
            members.push((r, m.index.clone(), m.element.matrix.op_norm()));
        }
    }
    members.sort_by(|a, b| a.1.cmp(&b.1));
    let half = (max_window / 2) as u64;
    if let Some(w) = members.iter().find(|(r, _, _)| *r > half) {
        let mut counts = Vec::new();
        for win in [max_window / 4, max_window / 2, max_window] {
            counts.push((win, members.iter().filter(|(r, _, _)| *r <= win as u64).count()));
        }
        return Ok(Properness::UnboundedTrend { counts, witness: w.1.clone() });
    }
    let max_norm = members.iter().fold(0.0f64, |a, m| a.max(m.2));
    Ok(Properness::Bounded { max_norm, members: members.into_iter().map(|m| m.1).collect() })
}

/// Smooth bump `amplitude·(1 − |ξ − c|²/r²)³₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vector,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, xi: &Vector) -> f64 {
        let t = 1.0 - (*xi - self.center).norm().powi(2) / (self.radius * self.radius);
        if t > 0.0 {
            self.amplitude * t * t * t
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Divergence {
    FiniteIntegral { value: f64 },
    /// Partial integrals per window radius.
    DivergentTrend { partial_sums: Vec<f64> },
}

/// Integrates `M_{C,H} f(h) = sup_{ξ ∈ C} f(h^T ξ)` over growing chart windows.
pub fn support_divergence_test(
    spec: &GroupSpec,
    c: &Shell,
    f: &Bump,
    xi0: &Vector,
    max_window: u32,
    tol: &Tolerances,
) -> Result<Divergence> {
    if f.amplitude == 0.0 {
        return Ok(Divergence::FiniteIntegral { value: 0.0 });
    }
    if f.eval(xi0) <= 0.0 {
        return Err(Error::Config("bump must be positive at the reference point".into()));
    }
    if max_window < 4 {
        return Err(Error::Config("divergence window must be at least 4".into()));
    }
    let net = Geometry::Shell(c.clone()).sample_points(256);
    let family = family_for(spec, max_window)?;
    let cell = match spec.kind {
        GroupKind::Cyclic { .. } | GroupKind::DiscreteFG { .. } => 1.0,
        _ => family.step.powi(family.window_axes as i32),
    };
    let values = par::map(&family.members, |m| -> Result<f64> {
        let ht = m.element.matrix.transpose();
        let sup = net.iter().fold(0.0f64, |a, xi| a.max(f.eval(&ht.apply(xi))));
        Ok(sup * spec.haar_weight(&m.element)? * cell)
    });
    let mut by_radius = vec![0.0; max_window as usize + 1];
    for (m, v) in family.members.iter().zip(values) {
        by_radius[family.radius_of(&m.index) as usize] += v?;
    }
    let mut partial = Vec::with_capacity(by_radius.len());
    let mut acc = 0.0;
    for v in by_radius {
        acc += v;
        partial.push(acc);
    }
    let total = *partial.last().unwrap_or(&0.0);
    let q = partial[(3 * max_window as usize) / 4];
    if total > 0.0 && total - q > tol.divergence * total {
        Ok(Divergence::DivergentTrend { partial_sums: partial })
    } else {
        Ok(Divergence::FiniteIntegral { value: total })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum SupportComparison {
    Equal { samples: usize, missed_a: usize, missed_b: usize },
    /// `witness` lies in the support of `covered_by` but provably outside the other.
    Unequal { witness: Vec<f64>, covered_by: String },
}

impl SupportComparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, SupportComparison::Equal { .. })
    }
}

fn in_support(cover: &InducedCover, xi: &Vector) -> bool {
    cover.spec.support.contains(xi) && cover.first_containing(xi).is_some()
}

/// Compares `H_1^T C_1` and `H_2^T C_2` on stratified log-radial samples.
pub fn support_equality_test(
    spec_a: &GroupSpec,
    spec_b: &GroupSpec,
    window: u32,
    samples: usize,
    params: &CoverParams,
) -> Result<SupportComparison> {
    if spec_a.dim != spec_b.dim {
        return Err(Error::Dimension { expected: spec_a.dim, found: spec_b.dim });
    }
    let cover_a = build_induced_cover(spec_a, window, params)?;
    if spec_a == spec_b {
        return Ok(SupportComparison::Equal { samples: 0, missed_a: 0, missed_b: 0 });
    }
    let cover_b = build_induced_cover(spec_b, window, params)?;
    // Sample the annulus common to both windows, ignoring either support oracle.
    let mut probe = cover_a.clone();
    probe.spec.support = Default::default();
    if let (Some(a0), Some(a1), Some(b0), Some(b1)) =
        (cover_a.meta.r_min, cover_a.meta.r_max, cover_b.meta.r_min, cover_b.meta.r_max)
    {
        probe.meta.r_min = Some(a0.max(b0));
        probe.meta.r_max = Some(a1.min(b1));
    }
    let pts = annulus_samples(&probe, samples, params.seed ^ 0x5eed);
    let flags = par::map(&pts, |p| (in_support(&cover_a, p), in_support(&cover_b, p)));
    let (mut missed_a, mut missed_b) = (0, 0);
    let mut grown: [Option<Vec<InducedCover>>; 2] = [None, None];
    for (p, (ia, ib)) in pts.iter().zip(flags) {
        if ia == ib {
            continue;
        }
        let (miss_spec, miss_idx, who) = if ia { (spec_b, 1, "A") } else { (spec_a, 0, "B") };
        if grown[miss_idx].is_none() {
            let mut v = Vec::new();
            for w in [2 * window, 4 * window] {
                v.push(build_induced_cover(miss_spec, w, params)?);
            }
            grown[miss_idx] = Some(v);
        }
        let still_missing = grown[miss_idx].as_ref().unwrap().iter().all(|c| !in_support(c, p));
        if still_missing {
            return Ok(SupportComparison::Unequal { witness: p.to_vec(), covered_by: who.into() });
        }
        if ia {
            missed_b += 1;
        } else {
            missed_a += 1;
        }
    }
    Ok(SupportComparison::Equal { samples: pts.len(), missed_a, missed_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::{conjugate_spec, Mat, SupportOracle};

    fn dyadic() -> GroupSpec {
        GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap()
    }

    #[test]
    fn dyadic_properness_members() {
        let c = Shell::annulus(2, 0.5, 2.0).unwrap();
        match properness_check(&dyadic(), &c, 16, 256).unwrap() {
            Properness::Bounded { members, max_norm } => {
                let ks: Vec<i64> = members.iter().map(|m| m[0]).collect();
                assert_eq!(ks, vec![-2, -1, 0, 1, 2]);
                assert!((max_norm - 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trivial_group_is_bounded() {
        let c = Shell::annulus(2, 0.5, 2.0).unwrap();
        let spec = GroupSpec::cyclic(Mat::identity(2)).unwrap();
        let Properness::Bounded { members, .. } = properness_check(&spec, &c, 8, 256).unwrap() else {
            panic!()
        };
        assert_eq!(members.len(), 1);
    }

    #[test]
    fn hyperbolic_flow_is_unbounded() {
        let c = Shell::annulus(2, 0.5, 2.0).unwrap();
        let spec = GroupSpec::one_parameter(Mat::diag(&[1.0, -1.0])).unwrap();
        assert!(matches!(
            properness_check(&spec, &c, 16, 256).unwrap(),
            Properness::UnboundedTrend { .. }
        ));
    }

    #[test]
    fn divergence_examples() {
        let c = Shell::annulus(2, 0.5, 2.0).unwrap();
        let tol = Tolerances::default();
        let xi = Vector::from_slice(&[1.0, 0.0]);
        let inside = Bump { center: xi, radius: 0.3, amplitude: 1.0 };
        assert!(matches!(
            support_divergence_test(&dyadic(), &c, &inside, &xi, 32, &tol).unwrap(),
            Divergence::FiniteIntegral { .. }
        ));
        let zero = Bump { amplitude: 0.0, ..inside.clone() };
        assert_eq!(
            support_divergence_test(&dyadic(), &c, &zero, &xi, 32, &tol).unwrap(),
            Divergence::FiniteIntegral { value: 0.0 }
        );
        let origin = Bump { center: Vector::zeros(2), radius: 0.5, amplitude: 1.0 };
        let z = Vector::from_slice(&[0.1, 0.0]);
        assert!(matches!(
            support_divergence_test(&dyadic(), &c, &origin, &z, 32, &tol).unwrap(),
            Divergence::DivergentTrend { .. }
        ));
    }

    #[test]
    fn support_equality_examples() {
        let p = CoverParams { coverage_samples: 512, ..CoverParams::default() };
        assert!(support_equality_test(&dyadic(), &dyadic(), 4, 256, &p).unwrap().is_equal());
        let x1 = GroupSpec::one_parameter(Mat::identity(3)).unwrap();
        let x2 = GroupSpec::one_parameter(Mat::diag(&[3f64.ln(), 2f64.ln(), 2f64.ln()])).unwrap();
        assert!(support_equality_test(&x1, &x2, 4, 512, &p).unwrap().is_equal());

        let half = SupportOracle::HalfSpace { normal: Vector::from_slice(&[1.0, 0.0]) };
        let a = dyadic().with_support(half);
        let b = conjugate_spec(&a, &Mat::rotation2(std::f64::consts::FRAC_PI_2)).unwrap();
        match support_equality_test(&a, &b, 4, 256, &p).unwrap() {
            SupportComparison::Unequal { witness, .. } => {
                let w = Vector::from_slice(&witness);
                assert_ne!(a.support.contains(&w), b.support.contains(&w));
            }
            other => panic!("{other:?}"),
        }
    }
}
