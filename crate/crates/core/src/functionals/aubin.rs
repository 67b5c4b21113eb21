use super::path::{PathKind, PathSpec};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, Potential};
use crate::quantization::{hilb, GramMatrix, MetricLevelK};

/// I_k(b) - I_k(a) along the linear path a e^{-t(ψ_b - ψ_a)}.
pub fn aubin_yau_between(model: &ManifoldModel, a: &MetricLevelK, b: &MetricLevelK, t_nodes: &[(f64, f64)]) -> Result<f64> {
    if a.k != b.k {
        return Err(Error::LevelMismatch { expected: a.k, got: b.k });
    }
    a.check(model)?;
    b.check(model)?;
    let dpsi: Vec<f64> = b.psi.iter().zip(&a.psi).map(|(x, y)| x - y).collect();
    let mut terms = Vec::with_capacity(t_nodes.len());
    for &(t, w) in t_nodes {
        let ratios = model.top_ratios(&a.lerp(b, t).forms)?;
        let integrand: Vec<f64> = dpsi.iter().zip(&ratios).map(|(d, r)| d * r).collect();
        terms.push(w * model.integrate(&integrand));
    }
    Ok(-crate::numeric::pairwise_sum(&terms))
}

/// I_k(m), anchored at I_k(h_ref^k) = 0.
pub fn aubin_yau(model: &ManifoldModel, k: usize, m: &MetricLevelK, path: &PathSpec) -> Result<f64> {
    if m.k != k {
        return Err(Error::LevelMismatch { expected: k, got: m.k });
    }
    let reference = MetricLevelK::reference(model, k);
    let nodes = path.t_nodes();
    match &path.kind {
        PathKind::Linear => aubin_yau_between(model, &reference, m, &nodes),
        PathKind::TwoLeg { via } => {
            let mid = MetricLevelK::from_potential(model, via, k)?;
            Ok(aubin_yau_between(model, &reference, &mid, &nodes)? + aubin_yau_between(model, &mid, m, &nodes)?)
        }
        PathKind::Mobius => Err(Error::Unsupported("family paths are only defined for the K-energy".into())),
    }
}

/// P̃_k(h, H) = log det H / N_k - I_k(h)/(V k^n), with det taken in the
/// monomial basis.
pub fn p_tilde(model: &ManifoldModel, m: &MetricLevelK, g: &GramMatrix, k: usize) -> Result<f64> {
    p_tilde_with(model, m, g, k, &PathSpec::linear())
}

pub fn p_tilde_with(model: &ManifoldModel, m: &MetricLevelK, g: &GramMatrix, k: usize, path: &PathSpec) -> Result<f64> {
    if g.k() != k {
        return Err(Error::LevelMismatch { expected: k, got: g.k() });
    }
    let degree = model.volume() * (k as f64).powi(model.dim() as i32);
    Ok(g.log_det() / g.dim() as f64 - aubin_yau(model, k, m, path)? / degree)
}

/// ℒ_k(ω_φ) = P̃_k(h_k(φ), Hilb(h_k(φ))) with h_k(φ) = h_ref^k e^{-kφ}.
pub fn l_functional(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<f64> {
    let m = MetricLevelK::from_potential(model, phi, k)?;
    let g = hilb(model, &m)?;
    p_tilde(model, &m, &g, k)
}

/// ℒ_k(ω_φ) - ℒ_k(ω_ref).
pub fn l_difference(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<f64> {
    Ok(l_functional(model, phi, k)? - l_functional(model, &Potential::constant(0.0), k)?)
}

/// Slacks of -∫φ c1(h)^n ≤ I_k(h') - I_k(h) ≤ -∫φ c1(h')^n for h' = h e^{-φ}.
/// Both are nonnegative when I_k is convex.
pub fn lemma_conv1_check(model: &ManifoldModel, k: usize, m: &MetricLevelK, m2: &MetricLevelK) -> Result<(f64, f64)> {
    lemma_conv1_check_with(model, k, m, m2, &PathSpec::linear())
}

pub fn lemma_conv1_check_with(
    model: &ManifoldModel,
    k: usize,
    m: &MetricLevelK,
    m2: &MetricLevelK,
    path: &PathSpec,
) -> Result<(f64, f64)> {
    for x in [m, m2] {
        if x.k != k {
            return Err(Error::LevelMismatch { expected: k, got: x.k });
        }
    }
    let delta = aubin_yau_between(model, m, m2, &path.t_nodes())?;
    let phi: Vec<f64> = m2.psi.iter().zip(&m.psi).map(|(a, b)| a - b).collect();
    let weighted = |x: &MetricLevelK| -> Result<f64> {
        let r = x.top_ratios(model)?;
        Ok(model.integrate(&phi.iter().zip(&r).map(|(p, r)| p * r).collect::<Vec<_>>()))
    };
    let lower = delta + weighted(m)?;
    let upper = -weighted(m2)? - delta;
    Ok((lower, upper))
}
