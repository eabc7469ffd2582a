//! Group specifications, chart coordinates and the JSON schema.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expm::mat_exp;
use super::mat::{Mat, Vector, MAX_DIM};
use crate::error::{Error, Result};

/// Tolerance on the operator norm of commutators between flow generators.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Tolerance separating eigenvalue real parts from zero.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Claimed essential frequency support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind")]
pub enum SupportOracle {
    /// ℝ^d \ {0}.
    #[default]
    Punctured,
    /// The open half space `{ξ : ⟨normal, ξ⟩ > 0}`.
    HalfSpace { normal: Vector },
    /// `map(inner) = {ξ : map⁻¹ ξ ∈ inner}`.
    Transformed { map: Mat, inner: Box<SupportOracle> },
}

impl SupportOracle {
    pub fn contains(&self, xi: &Vector) -> bool {
        match self {
            SupportOracle::Punctured => xi.norm() > 0.0,
            SupportOracle::HalfSpace { normal } => normal.dot(xi) > 0.0,
            SupportOracle::Transformed { map, inner } => match map.solve(xi) {
                Ok(y) => inner.contains(&y),
                Err(_) => false,
            },
        }
    }

    /// The image of this support under ξ ↦ map ξ. Punctured space is invariant.
    pub fn transformed(&self, map: &Mat) -> SupportOracle {
        match self {
            SupportOracle::Punctured => SupportOracle::Punctured,
            other => SupportOracle::Transformed { map: *map, inner: Box::new(other.clone()) },
        }
    }
}

/// The supported families of closed matrix groups.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupKind {
    /// exp(ℝ X).
    OneParameter { generator: Mat },
    /// ⟨A⟩ = {A^k : k ∈ ℤ}.
    Cyclic { matrix: Mat },
    /// exp(ℝX₁ + … + ℝX_k) with pairwise commuting generators.
    AbelianFlow { generators: Vec<Mat> },
    /// ℝ⁺·I_d.
    ScalarSimilitude,
    /// F⁻¹ (ℝ⁺·SO(d)) F for d ∈ {2, 3}; `frame` defaults to the identity.
    Similitude { frame: Option<Mat> },
    /// Group generated by a finite list of matrices.
    DiscreteFG { generators: Vec<Mat> },
}

/// A parametrized dilation group H ≤ GL(d, ℝ).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub dim: usize,
    pub kind: GroupKind,
    pub support: SupportOracle,
    /// Optional override of the lattice step used by `enumerate_family`.
    pub step: Option<f64>,
}

/// Chart coordinates of a group element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Coords {
    /// (t₁, …, t_k) for one-parameter, abelian flow and scalar similitude charts.
    Flow(Vec<f64>),
    /// Exponent k for cyclic groups.
    Power(i64),
    /// Log-scale plus rotation angle (d = 2) or rotation vector (d = 3).
    Similitude { log_scale: f64, rotation: Vec<f64> },
    /// Word over the symmetric generator list (index 2i is g_i, 2i+1 is g_i⁻¹).
    Word(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub matrix: Mat,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coords: Option<Coords>,
}

impl GroupElement {
    pub fn identity(dim: usize) -> Self {
        GroupElement { matrix: Mat::identity(dim), coords: None }
    }
}

/// Result of the one-parameter admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Admissibility {
    /// All eigenvalue real parts share the given sign.
    Admissible { sign: i8 },
    /// An eigenvalue violating the sign condition.
    NotAdmissible { witness_re: f64, witness_im: f64 },
    /// No check is available for the family (finitely generated groups).
    Unchecked,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }
}

/// Sign test on the real parts of the eigenvalues of a one-parameter generator.
pub fn check_one_parameter_admissible(x: &Mat) -> Admissibility {
    let eig = x.eigenvalues();
    classify_real_parts(&eig)
}

fn classify_real_parts(eig: &[Complex64]) -> Admissibility {
    if eig.iter().all(|z| z.re > ADMISSIBLE_TOL) {
        return Admissibility::Admissible { sign: 1 };
    }
    if eig.iter().all(|z| z.re < -ADMISSIBLE_TOL) {
        return Admissibility::Admissible { sign: -1 };
    }
    // The witness is the eigenvalue on the minority side (or on the axis).
    let pos = eig.iter().filter(|z| z.re > ADMISSIBLE_TOL).count();
    let neg = eig.iter().filter(|z| z.re < -ADMISSIBLE_TOL).count();
    let witness = eig
        .iter()
        .find(|z| z.re.abs() <= ADMISSIBLE_TOL)
        .or_else(|| {
            if neg <= pos {
                eig.iter().find(|z| z.re < -ADMISSIBLE_TOL)
            } else {
                eig.iter().find(|z| z.re > ADMISSIBLE_TOL)
            }
        })
        .copied()
        .unwrap_or_default();
    Admissibility::NotAdmissible { witness_re: witness.re, witness_im: witness.im }
}

impl GroupSpec {
    pub fn new(dim: usize, kind: GroupKind) -> Result<Self> {
        let spec = GroupSpec { dim, kind, support: SupportOracle::Punctured, step: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cyclic(matrix: Mat) -> Result<Self> {
        GroupSpec::new(matrix.dim(), GroupKind::Cyclic { matrix })
    }

    pub fn one_parameter(generator: Mat) -> Result<Self> {
        GroupSpec::new(generator.dim(), GroupKind::OneParameter { generator })
    }

    pub fn abelian_flow(generators: Vec<Mat>) -> Result<Self> {
        let dim = generators.first().map(|g| g.dim()).unwrap_or(0);
        GroupSpec::new(dim, GroupKind::AbelianFlow { generators })
    }

    pub fn scalar_similitude(dim: usize) -> Result<Self> {
        GroupSpec::new(dim, GroupKind::ScalarSimilitude)
    }

    pub fn similitude(dim: usize) -> Result<Self> {
        GroupSpec::new(dim, GroupKind::Similitude { frame: None })
    }

    pub fn discrete(generators: Vec<Mat>) -> Result<Self> {
        let dim = generators.first().map(|g| g.dim()).unwrap_or(0);
        GroupSpec::new(dim, GroupKind::DiscreteFG { generators })
    }

    pub fn with_support(mut self, support: SupportOracle) -> Self {
        self.support = support;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GroupKind::OneParameter { .. } => "OneParameter",
            GroupKind::Cyclic { .. } => "Cyclic",
            GroupKind::AbelianFlow { .. } => "AbelianFlow",
            GroupKind::ScalarSimilitude => "ScalarSimilitude",
            GroupKind::Similitude { .. } => "Similitude",
            GroupKind::DiscreteFG { .. } => "DiscreteFG",
        }
    }

    /// Checks the structural invariants, reporting JSON-pointer style locations.
    pub fn validate(&self) -> Result<()> {
        let invalid = |pointer: &str, message: String| Error::InvalidSpec {
            pointer: pointer.to_string(),
            message,
        };
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(invalid("/dim", format!("dimension {} out of range 1..=4", self.dim)));
        }
        let check_dim = |m: &Mat, pointer: String| -> Result<()> {
            if m.dim() != self.dim {
                return Err(invalid(
                    &pointer,
                    format!("matrix is {0}×{0}, expected {1}×{1}", m.dim(), self.dim),
                ));
            }
            Ok(())
        };
        match &self.kind {
            GroupKind::OneParameter { generator } => check_dim(generator, "/generator".into())?,
            GroupKind::Cyclic { matrix } => {
                check_dim(matrix, "/matrix".into())?;
                if matrix.is_singular() {
                    return Err(invalid("/matrix", "cyclic generator must be invertible".into()));
                }
            }
            GroupKind::AbelianFlow { generators } => {
                if generators.is_empty() {
                    return Err(invalid("/generators", "at least one generator required".into()));
                }
                for (i, g) in generators.iter().enumerate() {
                    check_dim(g, format!("/generators/{i}"))?;
                }
                for i in 0..generators.len() {
                    for j in (i + 1)..generators.len() {
                        let c = generators[i].commutator(&generators[j]).op_norm();
                        if c > COMMUTE_TOL {
                            return Err(invalid(
                                &format!("/generators/{j}"),
                                format!("generators {i} and {j} do not commute (‖[X,Y]‖ = {c:e})"),
                            ));
                        }
                    }
                }
            }
            GroupKind::ScalarSimilitude => {}
            GroupKind::Similitude { frame } => {
                if !(2..=3).contains(&self.dim) {
                    return Err(invalid("/dim", "similitude groups need d ∈ {2, 3}".into()));
                }
                if let Some(f) = frame {
                    check_dim(f, "/frame".into())?;
                    if f.is_singular() {
                        return Err(invalid("/frame", "frame must be invertible".into()));
                    }
                }
            }
            GroupKind::DiscreteFG { generators } => {
                if generators.is_empty() {
                    return Err(invalid("/generators", "at least one generator required".into()));
                }
                for (i, g) in generators.iter().enumerate() {
                    check_dim(g, format!("/generators/{i}"))?;
                    if g.is_singular() {
                        return Err(invalid(
                            &format!("/generators/{i}"),
                            "generator must be invertible".into(),
                        ));
                    }
                }
            }
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(invalid("/step", "step must be positive and finite".into()));
            }
        }
        Ok(())
    }

    /// Admissibility precheck for the family.
    pub fn admissibility(&self) -> Admissibility {
        match &self.kind {
            GroupKind::OneParameter { generator } => check_one_parameter_admissible(generator),
            GroupKind::Cyclic { matrix } => {
                // ⟨A⟩ needs A expansive or contractive; test log|λ| like real parts.
                let logs: Vec<Complex64> = matrix
                    .eigenvalues()
                    .iter()
                    .map(|z| Complex64::new(z.norm().ln(), z.arg()))
                    .collect();
                match classify_real_parts(&logs) {
                    Admissibility::NotAdmissible { .. } => {
                        let w = matrix
                            .eigenvalues()
                            .into_iter()
                            .min_by(|a, b| {
                                (a.norm().ln().abs()).partial_cmp(&b.norm().ln().abs()).unwrap()
                            })
                            .unwrap_or_default();
                        Admissibility::NotAdmissible { witness_re: w.re, witness_im: w.im }
                    }
                    ok => ok,
                }
            }
            GroupKind::AbelianFlow { generators } => {
                let sum = generators.iter().skip(1).fold(generators[0], |acc, g| acc + *g);
                check_one_parameter_admissible(&sum)
            }
            GroupKind::ScalarSimilitude | GroupKind::Similitude { .. } => {
                Admissibility::Admissible { sign: 1 }
            }
            GroupKind::DiscreteFG { .. } => Admissibility::Unchecked,
        }
    }

    /// Default lattice step for well-spread families.
    pub fn default_step(&self) -> f64 {
        if let Some(s) = self.step {
            return s;
        }
        match &self.kind {
            GroupKind::OneParameter { generator } => {
                let tr = generator.trace().abs();
                if tr > ADMISSIBLE_TOL {
                    self.dim as f64 * LN_2 / tr
                } else {
                    LN_2
                }
            }
            GroupKind::Cyclic { .. } | GroupKind::DiscreteFG { .. } => 1.0,
            GroupKind::AbelianFlow { .. }
            | GroupKind::ScalarSimilitude
            | GroupKind::Similitude { .. } => LN_2,
        }
    }

    /// Number of chart coordinates (0 for discrete families).
    pub fn chart_dim(&self) -> usize {
        match &self.kind {
            GroupKind::OneParameter { .. } | GroupKind::ScalarSimilitude => 1,
            GroupKind::AbelianFlow { generators } => generators.len(),
            GroupKind::Similitude { .. } => {
                if self.dim == 2 {
                    2
                } else {
                    4
                }
            }
            GroupKind::Cyclic { .. } | GroupKind::DiscreteFG { .. } => 0,
        }
    }

    /// The symmetric generator list g₀, g₀⁻¹, g₁, g₁⁻¹, … of a discrete group.
    pub fn symmetric_generators(&self) -> Result<Vec<Mat>> {
        match &self.kind {
            GroupKind::DiscreteFG { generators } => {
                let mut out = Vec::with_capacity(2 * generators.len());
                for g in generators {
                    out.push(*g);
                    out.push(g.inverse()?);
                }
                Ok(out)
            }
            GroupKind::Cyclic { matrix } => Ok(vec![*matrix, matrix.inverse()?]),
            _ => Err(Error::NotSupported(format!(
                "{} has no finite generator list",
                self.kind_name()
            ))),
        }
    }

    /// Evaluates the chart at the given coordinates.
    pub fn element(&self, coords: Coords) -> Result<GroupElement> {
        let d = self.dim;
        let matrix = match (&self.kind, &coords) {
            (GroupKind::OneParameter { generator }, Coords::Flow(t)) if t.len() == 1 => {
                mat_exp(&generator.scale(t[0]))
            }
            (GroupKind::ScalarSimilitude, Coords::Flow(t)) if t.len() == 1 => {
                Mat::identity(d).scale(t[0].exp())
            }
            (GroupKind::AbelianFlow { generators }, Coords::Flow(t))
                if t.len() == generators.len() =>
            {
                let x = generators
                    .iter()
                    .zip(t)
                    .fold(Mat::zeros(d), |acc, (g, &ti)| acc + g.scale(ti));
                mat_exp(&x)
            }
            (GroupKind::Cyclic { matrix }, Coords::Power(k)) => matrix.pow(*k)?,
            (GroupKind::Similitude { frame }, Coords::Similitude { log_scale, rotation }) => {
                let r = match (d, rotation.len()) {
                    (2, 1) => Mat::rotation2(rotation[0]),
                    (3, 3) => mat_exp(&Mat::skew3(&Vector::from_slice(rotation))),
                    _ => {
                        return Err(Error::Dimension { expected: d - 1, found: rotation.len() })
                    }
                };
                let core = r.scale(log_scale.exp());
                match frame {
                    Some(f) => f.inverse()? * core * *f,
                    None => core,
                }
            }
            (GroupKind::DiscreteFG { .. }, Coords::Word(w)) => {
                let gens = self.symmetric_generators()?;
                let mut m = Mat::identity(d);
                for &letter in w {
                    let g = gens.get(letter as usize).ok_or_else(|| {
                        Error::Config(format!("word letter {letter} out of range"))
                    })?;
                    m = m * *g;
                }
                m
            }
            _ => {
                return Err(Error::Config(format!(
                    "coordinates {coords:?} do not fit a {} chart",
                    self.kind_name()
                )))
            }
        };
        Ok(GroupElement { matrix, coords: Some(coords) })
    }

    /// Left Haar density at `h` relative to the chart measure.
    ///
    /// Flow, cyclic and scalar charts are homomorphisms from ℝ^k or ℤ, so the
    /// density is 1. For three-dimensional similitudes the rotation-vector
    /// chart carries the SO(3) density 2(1 − cos θ)/θ², θ = |ω|.
    pub fn haar_weight(&self, h: &GroupElement) -> Result<f64> {
        let coords = h.coords.as_ref().ok_or(Error::MissingCoords)?;
        match (&self.kind, coords) {
            (GroupKind::Similitude { .. }, Coords::Similitude { rotation, .. })
                if rotation.len() == 3 =>
            {
                let theta = Vector::from_slice(rotation).norm();
                if theta < 1e-6 {
                    Ok(1.0 - theta * theta / 12.0)
                } else {
                    Ok(2.0 * (1.0 - theta.cos()) / (theta * theta))
                }
            }
            _ => Ok(1.0),
        }
    }
}

/// h^{-T} ξ.
pub fn dual_action(h: &GroupElement, xi: &Vector) -> Result<Vector> {
    if xi.dim() != h.matrix.dim() {
        return Err(Error::Dimension { expected: h.matrix.dim(), found: xi.dim() });
    }
    h.matrix.solve_transpose(xi).map_err(|_| Error::Singular("dual action: invalid group element"))
}

/// The spec of A⁻¹ H A. The support becomes Aᵀ 𝒪.
pub fn conjugate_spec(spec: &GroupSpec, a: &Mat) -> Result<GroupSpec> {
    if a.dim() != spec.dim {
        return Err(Error::Dimension { expected: spec.dim, found: a.dim() });
    }
    let ai = a.inverse()?;
    let conj = |m: &Mat| ai * *m * *a;
    let kind = match &spec.kind {
        GroupKind::OneParameter { generator } => {
            GroupKind::OneParameter { generator: conj(generator) }
        }
        GroupKind::Cyclic { matrix } => GroupKind::Cyclic { matrix: conj(matrix) },
        GroupKind::AbelianFlow { generators } => {
            GroupKind::AbelianFlow { generators: generators.iter().map(conj).collect() }
        }
        GroupKind::ScalarSimilitude => GroupKind::ScalarSimilitude,
        GroupKind::Similitude { frame } => {
            // A⁻¹ F⁻¹ K F A = (F A)⁻¹ K (F A).
            let f = frame.unwrap_or_else(|| Mat::identity(spec.dim));
            GroupKind::Similitude { frame: Some(f * *a) }
        }
        GroupKind::DiscreteFG { generators } => {
            GroupKind::DiscreteFG { generators: generators.iter().map(conj).collect() }
        }
    };
    Ok(GroupSpec {
        dim: spec.dim,
        kind,
        support: spec.support.transformed(&a.transpose()),
        step: spec.step,
    })
}

/// Flat JSON form `{"kind": ..., "dim": d, "generator"|"matrix"|"generators": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpecJson {
    pub kind: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generator: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generators: Option<Vec<Mat>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frame: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support: Option<SupportOracle>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<f64>,
}

impl TryFrom<GroupSpecJson> for GroupSpec {
    type Error = Error;

    fn try_from(raw: GroupSpecJson) -> Result<GroupSpec> {
        let missing = |field: &str| Error::InvalidSpec {
            pointer: format!("/{field}"),
            message: format!("field `{field}` is required for kind {}", raw.kind),
        };
        let kind = match raw.kind.as_str() {
            "OneParameter" => {
                GroupKind::OneParameter { generator: raw.generator.ok_or_else(|| missing("generator"))? }
            }
            "Cyclic" => GroupKind::Cyclic { matrix: raw.matrix.ok_or_else(|| missing("matrix"))? },
            "AbelianFlow" => GroupKind::AbelianFlow {
                generators: raw.generators.clone().ok_or_else(|| missing("generators"))?,
            },
            "ScalarSimilitude" => GroupKind::ScalarSimilitude,
            "Similitude" => GroupKind::Similitude { frame: raw.frame },
            "DiscreteFG" => GroupKind::DiscreteFG {
                generators: raw.generators.clone().ok_or_else(|| missing("generators"))?,
            },
            other => {
                return Err(Error::InvalidSpec {
                    pointer: "/kind".into(),
                    message: format!("unknown group kind `{other}`"),
                })
            }
        };
        let spec = GroupSpec {
            dim: raw.dim,
            kind,
            support: raw.support.unwrap_or_default(),
            step: raw.step,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&GroupSpec> for GroupSpecJson {
    fn from(spec: &GroupSpec) -> GroupSpecJson {
        let mut raw = GroupSpecJson {
            kind: spec.kind_name().to_string(),
            dim: spec.dim,
            generator: None,
            matrix: None,
            generators: None,
            frame: None,
            support: match spec.support {
                SupportOracle::Punctured => None,
                ref s => Some(s.clone()),
            },
            step: spec.step,
        };
        match &spec.kind {
            GroupKind::OneParameter { generator } => raw.generator = Some(*generator),
            GroupKind::Cyclic { matrix } => raw.matrix = Some(*matrix),
            GroupKind::AbelianFlow { generators } | GroupKind::DiscreteFG { generators } => {
                raw.generators = Some(generators.clone())
            }
            GroupKind::ScalarSimilitude => {}
            GroupKind::Similitude { frame } => raw.frame = *frame,
        }
        raw
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupSpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GroupSpecJson::deserialize(d)?;
        GroupSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}
