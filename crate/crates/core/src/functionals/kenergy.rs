use super::path::{PathKind, PathSpec};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Potential, SampledPotential};
use crate::numeric::pairwise_sum;

/// Mabuchi K-energy ν(ω_φ) relative to ω_ref, integrated along `path` (CP1).
pub fn k_energy(model: &ManifoldModel, phi: &Potential, path: &PathSpec) -> Result<f64> {
    if model.kind() != ModelKind::Cp1 {
        return Err(Error::Unsupported("the K-energy needs scalar curvature (CP1 only)".into()));
    }
    let nodes = path.t_nodes();
    let zero = SampledPotential::zero(model.node_count());
    match &path.kind {
        PathKind::Linear => leg(model, &zero, &phi.sample(model)?, &nodes),
        PathKind::TwoLeg { via } => {
            let mid = via.sample(model)?;
            Ok(leg(model, &zero, &mid, &nodes)? + leg(model, &mid, &phi.sample(model)?, &nodes)?)
        }
        PathKind::Mobius => match phi {
            Potential::Mobius { lambda } => mobius_path(model, *lambda, &nodes),
            other => Err(Error::InvalidParameter(format!(
                "the Möbius path needs a Möbius endpoint, got {}",
                other.label()
            ))),
        },
    }
}

/// -∫ (S(ω_t) - S̄) φ̇ ω_t / V at one t, with S ω_t = (S_ref - Δ_ref log F) ω_ref.
fn rate(model: &ManifoldModel, at: &SampledPotential, velocity: &[f64]) -> Result<f64> {
    let ratio = model.ma_ratio_sampled(at)?;
    let log_f: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    let lap = model.reference_laplacian(&log_f)?;
    let s_ref = model.reference_scalar_curvature();
    let sbar = model.sbar();
    let integrand: Vec<f64> = velocity
        .iter()
        .zip(ratio.iter().zip(&lap))
        .map(|(v, (f, l))| v * (s_ref - l - sbar * f))
        .collect();
    Ok(-model.integrate(&integrand) / model.volume())
}

fn leg(model: &ManifoldModel, a: &SampledPotential, b: &SampledPotential, nodes: &[(f64, f64)]) -> Result<f64> {
    let velocity: Vec<f64> = b.values.iter().zip(&a.values).map(|(x, y)| x - y).collect();
    let terms = nodes
        .iter()
        .map(|&(t, w)| Ok(w * rate(model, &a.lerp(b, t), &velocity)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

fn mobius_path(model: &ManifoldModel, lambda: f64, nodes: &[(f64, f64)]) -> Result<f64> {
    let log_lambda = lambda.ln();
    let terms = nodes
        .iter()
        .map(|&(t, w)| {
            let lt = lambda.powf(t);
            let at = Potential::mobius(lt)?.sample(model)?;
            // d/dt log((1 + λ_t²|z|²)/(1 + |z|²)) with |z|² = (1 - u)/(1 + u)
            let velocity: Vec<f64> = model
                .grid()
                .nodes
                .iter()
                .map(|&[u, _]| 2.0 * lt * lt * log_lambda * (1.0 - u) / ((1.0 + u) + lt * lt * (1.0 - u)))
                .collect();
            Ok(w * rate(model, &at, &velocity)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}
