use num_complex::Complex64;

use crate::error::Result;
use crate::manifold::{ManifoldModel, ModelKind};

/// Monomial basis of H⁰(X, L^k) evaluated on the grid.
///
/// Values are stored in the unitary frame of h_ref^k, so `|values|²` is
/// `|s_α|²_{h_ref^k}`: on CP1 `z^a / (1+|z|²)^{k/2}`; on CP2_toric the real
/// orbit magnitude `(p1^a p2^b p0^c)^{1/2}`.
#[derive(Clone, Debug)]
pub struct SectionBasis {
    k: usize,
    kind: ModelKind,
    exponents: Vec<[usize; 2]>,
    /// values[q * N + α]
    values: Vec<Complex64>,
    /// CP1 only: scaled holomorphic derivative in the chart used at q
    /// (north for cos θ ≥ 0, south otherwise), same layout as `values`.
    derivs: Vec<Complex64>,
}

/// Builds the level-k monomial basis; `k` must lie within the model's
/// quadrature capability.
pub fn section_basis(model: &ManifoldModel, k: usize) -> Result<SectionBasis> {
    model.check_level(k)?;
    let kind = model.kind();
    let exponents: Vec<[usize; 2]> = match kind {
        ModelKind::Cp1 => (0..=k).map(|a| [a, 0]).collect(),
        ModelKind::Cp2Toric => (0..=k)
            .flat_map(|a| (0..=(k - a)).map(move |b| [a, b]))
            .collect(),
    };
    let n = exponents.len();
    let nodes = &model.grid().nodes;
    let mut values = Vec::with_capacity(nodes.len() * n);
    let mut derivs = Vec::new();
    match kind {
        ModelKind::Cp1 => {
            derivs.reserve(nodes.len() * n);
            for &[u, phi] in nodes {
                let z0 = (0.5 * (1.0 + u)).sqrt();
                let r1 = (0.5 * (1.0 - u)).sqrt();
                let north = u >= 0.0;
                for &[a, _] in &exponents {
                    let phase = Complex64::from_polar(1.0, a as f64 * phi);
                    let mag = r1.powi(a as i32) * z0.powi((k - a) as i32);
                    values.push(phase * mag);
                    // d/dz z^a (north) or d/dw w^{k-a} (south), rescaled to the
                    // unitary frame; common per-node phases are dropped.
                    let c = if north { a } else { k - a };
                    let d = if c == 0 {
                        0.0
                    } else {
                        c as f64 * r1.powi(a as i32 - 1) * z0.powi((k - a) as i32 - 1)
                    };
                    derivs.push(phase * d);
                }
            }
        }
        ModelKind::Cp2Toric => {
            for &[p1, p2] in nodes {
                let p0 = 1.0 - p1 - p2;
                for &[a, b] in &exponents {
                    let c = k - a - b;
                    let sq = p1.powi(a as i32) * p2.powi(b as i32) * p0.powi(c as i32);
                    values.push(Complex64::new(sq.sqrt(), 0.0));
                }
            }
        }
    }
    Ok(SectionBasis {
        k,
        kind,
        exponents,
        values,
        derivs,
    })
}

impl SectionBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// N_k.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Monomial exponents: (a, 0) for z^a on CP1, (a, b) for x^a y^b on CP2.
    pub fn exponents(&self) -> &[[usize; 2]] {
        &self.exponents
    }

    /// Degree d_k = V k^n.
    pub fn degree(&self) -> f64 {
        (self.k as f64).powi(self.kind.dim() as i32)
    }

    pub fn node_values(&self, q: usize) -> &[Complex64] {
        let n = self.len();
        &self.values[q * n..(q + 1) * n]
    }

    pub fn node_derivs(&self, q: usize) -> &[Complex64] {
        let n = self.len();
        &self.derivs[q * n..(q + 1) * n]
    }

    /// Value of the α-th monomial in the affine chart (trivialized by the
    /// section Z0^k): z^a on CP1, x^a y^b on CP2.
    pub fn affine_value(&self, alpha: usize, z: &[Complex64]) -> Complex64 {
        let [a, b] = self.exponents[alpha];
        match self.kind {
            ModelKind::Cp1 => z[0].powu(a as u32),
            ModelKind::Cp2Toric => z[0].powu(a as u32) * z[1].powu(b as u32),
        }
    }
}
