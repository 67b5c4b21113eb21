//! Built-in Kähler potential families with closed-form ∂∂̄ data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::legendre;

use super::spectral::assoc_legendre_normalized;
use super::{Form, ManifoldModel, ModelKind};

/// One real spherical harmonic `coeff · P̄_l^{|m|}(cos θ) · trig(|m| φ)`,
/// with `cos` for m ≥ 0 and `sin` for m < 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: usize,
    pub m: i32,
    pub coeff: f64,
}

/// A Kähler potential φ relative to the reference Fubini–Study metric,
/// ω_φ = ω_FS + (√-1/2π)∂∂̄φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    /// φ ≡ value (any model).
    Constant { value: f64 },
    /// CP1: φ = log((1 + λ²|z|²)/(1 + |z|²)), the pullback of ω_FS by z ↦ λz.
    Mobius { lambda: f64 },
    /// CP1: φ = eps · P_l(cos θ), l ∈ {1, 2, 3}.
    Legendre { l: usize, eps: f64 },
    /// CP1: finite real spherical-harmonic sum (not axially symmetric in general).
    Harmonics { terms: Vec<HarmonicTerm> },
    /// CP2_toric: φ = log((1 + a|x|² + b|y|²)/(1 + |x|² + |y|²)), a torus pullback of ω_FS.
    WeightedFs { a: f64, b: f64 },
    /// CP2_toric: φ = eps · (c1 p1 + c2 p2 + c11 p1² + c12 p1 p2 + c22 p2²) in moment coordinates.
    MomentQuadratic { eps: f64, coeffs: [f64; 5] },
}

impl Potential {
    pub fn constant(value: f64) -> Self {
        Potential::Constant { value }
    }

    pub fn mobius(lambda: f64) -> Result<Self> {
        let p = Potential::Mobius { lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn legendre(l: usize, eps: f64) -> Result<Self> {
        let p = Potential::Legendre { l, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn harmonics(terms: Vec<HarmonicTerm>) -> Result<Self> {
        let p = Potential::Harmonics { terms };
        p.validate()?;
        Ok(p)
    }

    pub fn weighted_fs(a: f64, b: f64) -> Result<Self> {
        let p = Potential::WeightedFs { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn moment_quadratic(eps: f64, coeffs: [f64; 5]) -> Result<Self> {
        let p = Potential::MomentQuadratic { eps, coeffs };
        p.validate()?;
        Ok(p)
    }

    /// Parameter checks that do not depend on a grid. Positivity of ω_φ is
    /// additionally checked node by node in [`Potential::sample`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Potential::Constant { value } if !value.is_finite() => bad("constant must be finite".into()),
            Potential::Mobius { lambda } if !(lambda.is_finite() && *lambda > 0.0) => {
                bad(format!("Möbius parameter must be positive, got {lambda}"))
            }
            Potential::Legendre { l, eps } => {
                if !(1..=3).contains(l) {
                    return bad(format!("Legendre degree must be 1, 2 or 3, got {l}"));
                }
                if !eps.is_finite() {
                    return bad("Legendre amplitude must be finite".into());
                }
                // F = 1 - l(l+1) eps P_l(u) on [-1, 1]
                let c = (l * (l + 1)) as f64 * eps;
                let min_f = (0..=20_000)
                    .map(|i| {
                        let u = -1.0 + 2.0 * i as f64 / 20_000.0;
                        1.0 - c * legendre(*l, u)
                    })
                    .fold(f64::INFINITY, f64::min);
                if min_f <= 0.0 {
                    return Err(Error::Positivity { node: usize::MAX, value: min_f });
                }
                Ok(())
            }
            Potential::Harmonics { terms } => {
                for t in terms {
                    if t.m.unsigned_abs() as usize > t.l || !t.coeff.is_finite() {
                        return bad(format!("invalid harmonic term {t:?}"));
                    }
                }
                Ok(())
            }
            Potential::WeightedFs { a, b } if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) => {
                bad(format!("weighted FS needs positive weights, got ({a}, {b})"))
            }
            Potential::MomentQuadratic { eps, coeffs }
                if !(eps.is_finite() && coeffs.iter().all(|c| c.is_finite())) =>
            {
                bad("moment polynomial coefficients must be finite".into())
            }
            _ => Ok(()),
        }
    }

    pub fn supports(&self, kind: ModelKind) -> bool {
        match self {
            Potential::Constant { .. } => true,
            Potential::Mobius { .. } | Potential::Legendre { .. } | Potential::Harmonics { .. } => {
                kind == ModelKind::Cp1
            }
            Potential::WeightedFs { .. } | Potential::MomentQuadratic { .. } => kind == ModelKind::Cp2Toric,
        }
    }

    /// Whether ω_φ is (an automorphism pullback of) the Fubini–Study metric.
    pub fn is_csck(&self) -> bool {
        matches!(
            self,
            Potential::Constant { .. } | Potential::Mobius { .. } | Potential::WeightedFs { .. }
        )
    }

    /// Short stable label used in reports and cache keys.
    pub fn label(&self) -> String {
        match self {
            Potential::Constant { value } => format!("const({value})"),
            Potential::Mobius { lambda } => format!("mobius({lambda})"),
            Potential::Legendre { l, eps } => format!("{eps}*P{l}"),
            Potential::Harmonics { terms } => {
                let parts: Vec<String> = terms.iter().map(|t| format!("{}*Y{}_{}", t.coeff, t.l, t.m)).collect();
                format!("harm[{}]", parts.join("+"))
            }
            Potential::WeightedFs { a, b } => format!("wfs({a},{b})"),
            Potential::MomentQuadratic { eps, coeffs } => format!("mq({eps};{coeffs:?})"),
        }
    }

    /// Values and ∂∂̄ data on the model grid; fails if ω_φ is not positive at
    /// some node.
    pub fn sample(&self, model: &ManifoldModel) -> Result<SampledPotential> {
        self.validate()?;
        if !self.supports(model.kind()) {
            return Err(Error::Unsupported(format!(
                "potential {} is not defined on {}",
                self.label(),
                model.kind().name()
            )));
        }
        let nodes = &model.grid().nodes;
        let mut values = Vec::with_capacity(nodes.len());
        let mut ddc = Vec::with_capacity(nodes.len());
        for [a, b] in nodes.iter().copied() {
            let (v, d) = self.eval_at(a, b);
            values.push(v);
            ddc.push(d);
        }
        let sp = SampledPotential { values, ddc };
        model.top_ratios(&sp.forms(model, 1.0))?;
        Ok(sp)
    }

    /// (φ, ddc φ) at chart point (a, b).
    fn eval_at(&self, a: f64, b: f64) -> (f64, Form) {
        match self {
            Potential::Constant { value } => (*value, [0.0; 3]),
            Potential::Mobius { lambda } => {
                let l2 = lambda * lambda;
                let big = 1.0 + a + l2 * (1.0 - a);
                let f = 4.0 * l2 / (big * big);
                ((0.5 * big).ln(), [f - 1.0, 0.0, 0.0])
            }
            Potential::Legendre { l, eps } => {
                let p = legendre(*l, a);
                (eps * p, [-((l * (l + 1)) as f64) * eps * p, 0.0, 0.0])
            }
            Potential::Harmonics { terms } => {
                let mut v = 0.0;
                let mut lap = 0.0;
                for t in terms {
                    let m = t.m.unsigned_abs() as usize;
                    let plm = assoc_legendre_normalized(t.l, m, a)[t.l - m];
                    let trig = if t.m >= 0 { (m as f64 * b).cos() } else { (m as f64 * b).sin() };
                    let y = t.coeff * plm * trig;
                    v += y;
                    lap -= (t.l * (t.l + 1)) as f64 * y;
                }
                (v, [lap, 0.0, 0.0])
            }
            Potential::WeightedFs { a: wa, b: wb } => {
                let (p1, p2) = (a, b);
                let p0 = 1.0 - p1 - p2;
                let d = p0 + wa * p1 + wb * p2;
                let q1 = wa * p1 / d;
                let q2 = wb * p2 / d;
                let href = reference_hessian(p1, p2);
                let tot = [q1 - q1 * q1, -q1 * q2, q2 - q2 * q2];
                (d.ln(), [tot[0] - href[0], tot[1] - href[1], tot[2] - href[2]])
            }
            Potential::MomentQuadratic { eps, coeffs } => {
                let (p1, p2) = (a, b);
                let [c1, c2, c11, c12, c22] = *coeffs;
                let g = c1 * p1 + c2 * p2 + c11 * p1 * p1 + c12 * p1 * p2 + c22 * p2 * p2;
                let grad = [c1 + 2.0 * c11 * p1 + c12 * p2, c2 + c12 * p1 + 2.0 * c22 * p2];
                let hg = [[2.0 * c11, c12], [c12, 2.0 * c22]];
                let p = [p1, p2];
                // J = ∂p/∂ξ = diag(p) - p pᵀ
                let jac = |i: usize, j: usize| if i == j { p[i] - p[i] * p[j] } else { -p[i] * p[j] };
                let d2p = |i: usize, j: usize, l: usize| {
                    let dij = (i == j) as u8 as f64;
                    let dil = (i == l) as u8 as f64;
                    let djl = (j == l) as u8 as f64;
                    dij * (dil * p[i] - p[i] * p[l]) - (dil * p[i] - p[i] * p[l]) * p[j] - p[i] * (djl * p[j] - p[j] * p[l])
                };
                let mut h = [[0.0; 2]; 2];
                for j in 0..2 {
                    for l in 0..2 {
                        let mut acc = 0.0;
                        for r in 0..2 {
                            for s in 0..2 {
                                acc += jac(r, j) * hg[r][s] * jac(s, l);
                            }
                        }
                        for (i, gi) in grad.iter().enumerate() {
                            acc += gi * d2p(i, j, l);
                        }
                        h[j][l] = eps * acc;
                    }
                }
                (eps * g, [h[0][0], h[0][1], h[1][1]])
            }
        }
    }
}

/// ξ-Hessian of log(1 + e^{ξ1} + e^{ξ2}) in moment coordinates: diag(p) - p pᵀ.
pub(crate) fn reference_hessian(p1: f64, p2: f64) -> Form {
    [p1 - p1 * p1, -p1 * p2, p2 - p2 * p2]
}

/// A potential evaluated on a grid: values and ∂∂̄φ relative to ω_ref
/// (Δ_ref φ in slot 0 on CP1; the ξ-Hessian on CP2_toric).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential {
    pub values: Vec<f64>,
    pub ddc: Vec<Form>,
}

impl SampledPotential {
    pub fn zero(n: usize) -> Self {
        SampledPotential {
            values: vec![0.0; n],
            ddc: vec![[0.0; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SampledPotential {
            values: self.values.iter().map(|v| c * v).collect(),
            ddc: self.ddc.iter().map(|d| [c * d[0], c * d[1], c * d[2]]).collect(),
        }
    }

    /// (1 - t) self + t other.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        SampledPotential {
            values: self.values.iter().zip(&other.values).map(|(a, b)| (1.0 - t) * a + t * b).collect(),
            ddc: self
                .ddc
                .iter()
                .zip(&other.ddc)
                .map(|(a, b)| {
                    [
                        (1.0 - t) * a[0] + t * b[0],
                        (1.0 - t) * a[1] + t * b[1],
                        (1.0 - t) * a[2] + t * b[2],
                    ]
                })
                .collect(),
        }
    }

    /// self - other.
    pub fn sub(&self, other: &Self) -> Self {
        SampledPotential {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ddc: self
                .ddc
                .iter()
                .zip(&other.ddc)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
                .collect(),
        }
    }

    /// Absolute curvature forms of level `scale`: scale · (ω_ref + ddc φ).
    pub fn forms(&self, model: &ManifoldModel, scale: f64) -> Vec<Form> {
        self.ddc
            .iter()
            .zip(model.reference_forms())
            .map(|(d, r)| [scale * (r[0] + d[0]), scale * (r[1] + d[1]), scale * (r[2] + d[2])])
            .collect()
    }
}
