//! Model varieties (CP1 and torus-invariant CP2), quadrature, Monge–Ampère
//! ratios, Laplacians and scalar curvature.
//!
//! Curvature (1,1)-forms are carried per node as a [`Form`]: on CP1 slot 0
//! holds the density relative to ω_FS; on CP2_toric the three slots hold the
//! ξ-Hessian (11, 12, 22) of the full Kähler potential in logarithmic torus
//! coordinates ξ_i = log|x_i|². Both encodings are linear in the potential.

mod field;
mod potential;
mod quadrature;
pub mod spectral;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::weighted_sum;

pub use field::ScalarField;
pub use potential::{HarmonicTerm, Potential, SampledPotential};
pub use quadrature::{GridSignature, QuadratureRule};
use spectral::SphericalTransform;

/// Per-node curvature data, see the module docs.
pub type Form = [f64; 3];

/// Default cap on the section tables a model may require.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "CP1")]
    Cp1,
    #[serde(rename = "CP2_toric")]
    Cp2Toric,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cp1 => "CP1",
            ModelKind::Cp2Toric => "CP2_toric",
        }
    }

    /// Complex dimension n.
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Cp1 => 1,
            ModelKind::Cp2Toric => 2,
        }
    }

    /// N_k = dim H⁰(X, L^k).
    pub fn section_count(self, k: usize) -> usize {
        match self {
            ModelKind::Cp1 => k + 1,
            ModelKind::Cp2Toric => (k + 1) * (k + 2) / 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CP1" | "cp1" => Ok(ModelKind::Cp1),
            "CP2_toric" | "cp2_toric" | "CP2" => Ok(ModelKind::Cp2Toric),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub memory_budget_bytes: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// A polarized model (X, L, ω_FS) with its quadrature grid.
#[derive(Clone, Debug)]
pub struct ManifoldModel {
    kind: ModelKind,
    resolution_k: usize,
    grid: QuadratureRule,
    ref_forms: Vec<Form>,
    /// det of the reference ξ-Hessian (p0 p1 p2) on CP2; 1 on CP1.
    ref_det: Vec<f64>,
    transform: Option<Arc<SphericalTransform>>,
}

/// Builds `name` ∈ {CP1, CP2_toric} with a grid supporting levels up to
/// `resolution_k`.
pub fn build_model(name: &str, resolution_k: usize) -> Result<ManifoldModel> {
    ManifoldModel::build(name.parse()?, resolution_k, BuildOptions::default())
}

impl ManifoldModel {
    pub fn build(kind: ModelKind, resolution_k: usize, opts: BuildOptions) -> Result<Self> {
        if resolution_k == 0 {
            return Err(Error::InvalidParameter("resolution_k must be at least 1".into()));
        }
        let (na, nb) = Self::grid_shape(kind, resolution_k);
        // section values + derivatives, complex, at the top level
        let needed = na
            .saturating_mul(nb)
            .saturating_mul(kind.section_count(resolution_k))
            .saturating_mul(32);
        if needed > opts.memory_budget_bytes {
            return Err(Error::MemoryBudget {
                resolution: resolution_k,
                needed,
                budget: opts.memory_budget_bytes,
            });
        }
        let grid = match kind {
            ModelKind::Cp1 => QuadratureRule::sphere(na, nb),
            ModelKind::Cp2Toric => QuadratureRule::simplex(na),
        };
        let (ref_forms, ref_det): (Vec<Form>, Vec<f64>) = match kind {
            ModelKind::Cp1 => grid.nodes.iter().map(|_| ([1.0, 0.0, 0.0], 1.0)).unzip(),
            ModelKind::Cp2Toric => grid
                .nodes
                .iter()
                .map(|[p1, p2]| (potential::reference_hessian(*p1, *p2), p1 * p2 * (1.0 - p1 - p2)))
                .unzip(),
        };
        let transform = match kind {
            ModelKind::Cp1 => Some(Arc::new(SphericalTransform::new(
                &grid.polar_nodes,
                &grid.polar_weights,
                nb,
            ))),
            ModelKind::Cp2Toric => None,
        };
        Ok(ManifoldModel {
            kind,
            resolution_k,
            grid,
            ref_forms,
            ref_det,
            transform,
        })
    }

    /// (polar, azimuthal) node counts on CP1; (s, t) on CP2.
    fn grid_shape(kind: ModelKind, r: usize) -> (usize, usize) {
        match kind {
            ModelKind::Cp1 => (2 * r + 12, 2 * r + 8),
            ModelKind::Cp2Toric => (r + 8, r + 8),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn resolution_k(&self) -> usize {
        self.resolution_k
    }

    /// V = ∫ c1(L)^n.
    pub fn volume(&self) -> f64 {
        1.0
    }

    /// Average scalar curvature n c1(X)·[ω]^{n-1}/[ω]^n.
    pub fn sbar(&self) -> f64 {
        match self.kind {
            ModelKind::Cp1 => 2.0,
            ModelKind::Cp2Toric => 6.0,
        }
    }

    /// Scalar curvature of ω_FS in the same normalization (equals sbar).
    pub fn reference_scalar_curvature(&self) -> f64 {
        self.sbar()
    }

    pub fn grid(&self) -> &QuadratureRule {
        &self.grid
    }

    pub fn signature(&self) -> GridSignature {
        self.grid.signature
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    pub fn capability_k(&self) -> usize {
        self.grid.capability_k
    }

    pub fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.capability_k() {
            return Err(Error::Capability {
                k,
                capability: self.capability_k(),
            });
        }
        Ok(())
    }

    pub fn reference_forms(&self) -> &[Form] {
        &self.ref_forms
    }

    /// ∫ f ω_ref^n with pairwise reduction.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        weighted_sum(&self.grid.weights, values)
    }

    pub fn check_field(&self, f: &ScalarField) -> Result<()> {
        if f.grid != self.signature() {
            return Err(Error::GridMismatch {
                expected: self.node_count(),
                got: f.len(),
            });
        }
        Ok(())
    }

    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        ScalarField::new(values, self.signature())
    }

    /// Ratio of the top power of `form` to ω_ref^n at `node`.
    pub fn top_ratio(&self, node: usize, form: &Form) -> f64 {
        match self.kind {
            ModelKind::Cp1 => form[0],
            ModelKind::Cp2Toric => (form[0] * form[2] - form[1] * form[1]) / self.ref_det[node],
        }
    }

    /// Top-form ratios for a whole field of forms; fails on the first
    /// non-positive node.
    pub fn top_ratios(&self, forms: &[Form]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(forms.len());
        for (i, f) in forms.iter().enumerate() {
            let r = self.top_ratio(i, f);
            let pos = match self.kind {
                ModelKind::Cp1 => r > 0.0,
                // positive definite 2×2: trace and determinant positive
                ModelKind::Cp2Toric => r > 0.0 && f[0] + f[2] > 0.0,
            };
            if !pos || !r.is_finite() {
                return Err(Error::Positivity { node: i, value: r });
            }
            out.push(r);
        }
        Ok(out)
    }

    /// F = ω_φ^n / ω_ref^n.
    pub fn ma_ratio(&self, phi: &Potential) -> Result<ScalarField> {
        let sp = phi.sample(self)?;
        self.field(self.ma_ratio_sampled(&sp)?)
    }

    pub fn ma_ratio_sampled(&self, phi: &SampledPotential) -> Result<Vec<f64>> {
        self.top_ratios(&phi.forms(self, 1.0))
    }

    fn transform(&self, op: &str) -> Result<&SphericalTransform> {
        self.transform
            .as_deref()
            .ok_or_else(|| Error::Unsupported(format!("{op} is only available on CP1")))
    }

    /// Δ_ref f = ((√-1/2π)∂∂̄f)/ω_FS by spectral differentiation (CP1).
    pub fn reference_laplacian(&self, values: &[f64]) -> Result<Vec<f64>> {
        let tr = self.transform("laplacian")?;
        if values.len() != self.node_count() {
            return Err(Error::GridMismatch {
                expected: self.node_count(),
                got: values.len(),
            });
        }
        Ok(tr.laplacian(values))
    }

    /// Δ_{ω_φ} f = ((√-1/2π)∂∂̄f)/ω_φ (CP1).
    pub fn laplacian(&self, phi_metric: &Potential, f: &ScalarField) -> Result<ScalarField> {
        self.check_field(f)?;
        let sp = phi_metric.sample(self)?;
        let ratio = self.ma_ratio_sampled(&sp)?;
        let lap = self.reference_laplacian(&f.values)?;
        self.field(lap.iter().zip(&ratio).map(|(l, r)| l / r).collect())
    }

    /// S(ω_φ) = (S(ω_ref) - Δ_ref log F)/F (CP1).
    pub fn scalar_curvature(&self, phi: &Potential) -> Result<ScalarField> {
        let sp = phi.sample(self)?;
        self.field(self.scalar_curvature_sampled(&sp)?)
    }

    pub fn scalar_curvature_sampled(&self, phi: &SampledPotential) -> Result<Vec<f64>> {
        if self.kind != ModelKind::Cp1 {
            return Err(Error::Unsupported("scalar curvature is only available on CP1".into()));
        }
        let ratio = self.ma_ratio_sampled(phi)?;
        let log_f: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
        let lap = self.reference_laplacian(&log_f)?;
        let s0 = self.reference_scalar_curvature();
        Ok(ratio.iter().zip(&lap).map(|(r, l)| (s0 - l) / r).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp1() -> ManifoldModel {
        build_model("CP1", 10).unwrap()
    }

    #[test]
    fn build_examples() {
        let m = cp1();
        assert_eq!(m.volume(), 1.0);
        assert_eq!(m.sbar(), 2.0);
        assert!(m.capability_k() >= 10);
        assert!((m.integrate(&vec![1.0; m.node_count()]) - 1.0).abs() < 1e-12);
        let sig = m.signature();
        assert!(sig.n_a >= 18 && sig.n_b >= 28);

        let m2 = build_model("CP2_toric", 6).unwrap();
        assert_eq!(m2.sbar(), 6.0);
        assert!((m2.integrate(&vec![1.0; m2.node_count()]) - 1.0).abs() < 1e-12);
        assert!(m2.capability_k() >= 6);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_model("CP3", 4), Err(Error::UnknownModel(_))));
        let tiny = BuildOptions {
            memory_budget_bytes: 1000,
        };
        assert!(matches!(
            ManifoldModel::build(ModelKind::Cp1, 40, tiny),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn ma_ratio_constant_potentials() {
        let m = cp1();
        for phi in [Potential::constant(0.0), Potential::constant(3.5)] {
            let f = m.ma_ratio(&phi).unwrap();
            assert!(f.values.iter().all(|v| (*v - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn ma_ratio_volume_conservation() {
        let m = build_model("CP1", 20).unwrap();
        for phi in [
            Potential::mobius(2.0).unwrap(),
            Potential::mobius(0.6).unwrap(),
            Potential::legendre(2, 0.075).unwrap(),
            Potential::legendre(3, 0.0375).unwrap(),
        ] {
            let f = m.ma_ratio(&phi).unwrap();
            assert!((m.integrate(&f.values) - 1.0).abs() < 1e-10, "{}", phi.label());
        }
        let m2 = build_model("CP2_toric", 8).unwrap();
        for phi in [
            Potential::weighted_fs(2.0, 0.5).unwrap(),
            Potential::moment_quadratic(0.2, [0.3, -0.1, 0.5, 0.2, -0.4]).unwrap(),
        ] {
            let f = m2.ma_ratio(&phi).unwrap();
            assert!((m2.integrate(&f.values) - 1.0).abs() < 1e-10, "{}", phi.label());
        }
    }

    #[test]
    fn positivity_failures_are_reported() {
        // F = 1 - 6·0.3·P2 < 0 at the poles
        assert!(matches!(Potential::legendre(2, 0.3), Err(Error::Positivity { .. })));
        let m = cp1();
        let big = Potential::Harmonics {
            terms: vec![HarmonicTerm { l: 3, m: 2, coeff: 5.0 }],
        };
        match m.ma_ratio(&big) {
            Err(Error::Positivity { node, value }) => {
                assert!(node < m.node_count());
                assert!(value <= 0.0);
            }
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn scalar_curvature_examples() {
        let m = build_model("CP1", 20).unwrap();
        let s = m.scalar_curvature(&Potential::constant(0.0)).unwrap();
        assert!(s.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let s = m.scalar_curvature(&Potential::mobius(2.0).unwrap()).unwrap();
        assert!(s.values.iter().all(|v| (v - 2.0).abs() < 1e-7), "sup dev {}", s.map(|v| v - 2.0).sup_norm());
        let phi = Potential::legendre(2, 0.075).unwrap();
        let s = m.scalar_curvature(&phi).unwrap();
        let f = m.ma_ratio(&phi).unwrap();
        let avg: Vec<f64> = s.values.iter().zip(&f.values).map(|(a, b)| a * b).collect();
        assert!((m.integrate(&avg) - 2.0).abs() < 1e-8);
        let m2 = build_model("CP2_toric", 4).unwrap();
        assert!(matches!(
            m2.scalar_curvature(&Potential::constant(0.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn laplacian_examples() {
        let m = cp1();
        let zero = Potential::constant(0.0);
        let one = m.field(vec![1.0; m.node_count()]).unwrap();
        let l1 = m.laplacian(&zero, &one).unwrap().sup_norm();
        assert!(l1 < 1e-12, "{l1}");
        // cos θ is a degree-1 harmonic: eigenvalue -l(l+1) = -2
        let cos_t = m.field(m.grid().nodes.iter().map(|n| n[0]).collect()).unwrap();
        let lap = m.laplacian(&zero, &cos_t).unwrap();
        for (l, c) in lap.values.iter().zip(&cos_t.values) {
            assert!((l + 2.0 * c).abs() < 1e-10);
        }
        let other = build_model("CP1", 6).unwrap();
        let wrong = other.field(vec![0.0; other.node_count()]).unwrap();
        assert!(matches!(m.laplacian(&zero, &wrong), Err(Error::GridMismatch { .. })));
    }
}
