use crate::error::{Error, Result};
use crate::manifold::{Form, GridSignature, ManifoldModel, Potential, SampledPotential};

/// A Hermitian metric h_ref^k e^{-ψ} on L^k, sampled on the grid together
/// with its absolute curvature form c1(L^k, h) per node.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricLevelK {
    pub k: usize,
    pub psi: Vec<f64>,
    pub forms: Vec<Form>,
    pub grid: GridSignature,
}

impl MetricLevelK {
    /// h_ref^k.
    pub fn reference(model: &ManifoldModel, k: usize) -> Self {
        Self::from_sampled(model, &SampledPotential::zero(model.node_count()), k)
    }

    /// h_k(φ) = h_ref^k e^{-kφ}.
    pub fn from_potential(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<Self> {
        let sp = phi.sample(model)?;
        Ok(Self::from_sampled(model, &sp, k))
    }

    pub fn from_sampled(model: &ManifoldModel, phi: &SampledPotential, k: usize) -> Self {
        let kf = k as f64;
        MetricLevelK {
            k,
            psi: phi.values.iter().map(|v| kf * v).collect(),
            forms: phi.forms(model, kf),
            grid: model.signature(),
        }
    }

    /// e^c h, i.e. ψ ↦ ψ - c.
    pub fn scaled(&self, c: f64) -> Self {
        MetricLevelK {
            psi: self.psi.iter().map(|p| p - c).collect(),
            ..self.clone()
        }
    }

    /// Potential and forms interpolated linearly: (1 - t) self + t other.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        MetricLevelK {
            k: self.k,
            psi: self.psi.iter().zip(&other.psi).map(|(a, b)| (1.0 - t) * a + t * b).collect(),
            forms: self
                .forms
                .iter()
                .zip(&other.forms)
                .map(|(a, b)| std::array::from_fn(|i| (1.0 - t) * a[i] + t * b[i]))
                .collect(),
            grid: self.grid,
        }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// c1(L^k, h)^n / ω_ref^n per node; fails if the curvature is not positive.
    pub fn top_ratios(&self, model: &ManifoldModel) -> Result<Vec<f64>> {
        self.check(model)?;
        model.top_ratios(&self.forms)
    }

    /// The rescaled potential ψ/k as relative-to-reference data.
    pub fn as_sampled_potential(&self, model: &ManifoldModel) -> SampledPotential {
        let kf = self.k as f64;
        SampledPotential {
            values: self.psi.iter().map(|p| p / kf).collect(),
            ddc: self
                .forms
                .iter()
                .zip(model.reference_forms())
                .map(|(f, r)| std::array::from_fn(|i| f[i] / kf - r[i]))
                .collect(),
        }
    }

    pub(crate) fn check(&self, model: &ManifoldModel) -> Result<()> {
        if self.grid != model.signature() || self.psi.len() != model.node_count() {
            return Err(Error::GridMismatch {
                expected: model.node_count(),
                got: self.psi.len(),
            });
        }
        Ok(())
    }
}
