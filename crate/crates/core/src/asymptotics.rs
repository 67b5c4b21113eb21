//! Power-law fits for sequences indexed by k, and the residual sequences
//! they are applied to: Bergman kernel expansion residuals and the
//! convergence of Bergman metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Potential, SampledPotential};
use crate::quantization::{fs_with, hilb_with, section_basis, MetricLevelK};

/// Values at or below this are treated as exact zeros.
pub const NOISE_FLOOR: f64 = 1e-14;

/// value ≈ c · k^p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub p: f64,
    pub r2: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FitOutcome {
    Fit(DecayFit),
    /// Every value was at or below [`NOISE_FLOOR`].
    BelowNoiseFloor,
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&DecayFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::BelowNoiseFloor => None,
        }
    }

    /// The exponent, with exact sequences counting as arbitrarily fast decay.
    pub fn exponent(&self) -> f64 {
        match self {
            FitOutcome::Fit(f) => f.p,
            FitOutcome::BelowNoiseFloor => f64::NEG_INFINITY,
        }
    }

    pub fn r2(&self) -> f64 {
        match self {
            FitOutcome::Fit(f) => f.r2,
            FitOutcome::BelowNoiseFloor => 1.0,
        }
    }
}

/// Least-squares fit of log v = log c + p log k over points with v above the
/// noise floor.
pub fn fit_decay(points: &[(usize, f64)]) -> Result<FitOutcome> {
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidParameter("k values must be strictly increasing".into()));
        }
    }
    if let Some(&(k, v)) = points.iter().find(|(k, v)| *k == 0 || !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid point (k = {k}, value = {v})")));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, v)| *v > NOISE_FLOOR)
        .map(|&(k, v)| ((k as f64).ln(), v.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(FitOutcome::BelowNoiseFloor);
    }
    if usable.len() < 4 {
        return Err(Error::TooFewPoints(usable.len()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let ss_res: f64 = usable.iter().map(|q| (q.1 - b - p * q.0).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let ks: Vec<usize> = points.iter().filter(|(_, v)| *v > NOISE_FLOOR).map(|p| p.0).collect();
    Ok(FitOutcome::Fit(DecayFit {
        c: b.exp(),
        p,
        r2,
        k_min: ks[0],
        k_max: ks[ks.len() - 1],
        points: ks.len(),
    }))
}

/// sup |ρ_k - Σ_{i ≤ order} A_i k^{-i}| with A_0 = 1, A_1 = S(ω_φ)/2.
pub fn expansion_residual(
    model: &ManifoldModel,
    phi: &Potential,
    k_list: &[usize],
    order: usize,
) -> Result<Vec<(usize, f64)>> {
    if order > 1 {
        return Err(Error::InvalidParameter(format!("expansion order {order} not in {{0, 1}}")));
    }
    let sp = phi.sample(model)?;
    let a1: Vec<f64> = if order == 1 {
        if model.kind() != ModelKind::Cp1 {
            return Err(Error::Unsupported("first-order expansion needs scalar curvature (CP1 only)".into()));
        }
        model.scalar_curvature_sampled(&sp)?.iter().map(|s| 0.5 * s).collect()
    } else {
        vec![0.0; model.node_count()]
    };
    k_list
        .iter()
        .map(|&k| {
            let basis = section_basis(model, k)?;
            let m = MetricLevelK::from_sampled(model, &sp, k);
            let rho = crate::quantization::bergman_density(model, &basis, &m)?;
            let kf = k as f64;
            let sup = rho
                .iter()
                .zip(&a1)
                .map(|(r, a)| (r - 1.0 - a / kf).abs())
                .fold(0.0, f64::max);
            Ok((k, sup))
        })
        .collect()
}

/// C⁰ distances between the k-th Bergman metric FS(Hilb(h^k)) and h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRate {
    pub k: usize,
    /// sup |log(h_k^{1/k}/h)|
    pub potential_sup: f64,
    /// sup of the largest eigenvalue of ω_k/k - ω_φ relative to ω_ref
    pub form_sup: f64,
}

pub fn bergman_metric_rate(model: &ManifoldModel, phi: &Potential, k_list: &[usize]) -> Result<Vec<MetricRate>> {
    let sp = phi.sample(model)?;
    k_list
        .iter()
        .map(|&k| {
            let basis = section_basis(model, k)?;
            let m = MetricLevelK::from_sampled(model, &sp, k);
            let g = hilb_with(model, &basis, &m)?;
            let hk = fs_with(model, &basis, &g)?;
            metric_rate(model, &sp, &hk)
        })
        .collect()
}

/// Distances between a level-k metric `hk` and h_ref e^{-φ}.
pub fn metric_rate(model: &ManifoldModel, sp: &SampledPotential, hk: &MetricLevelK) -> Result<MetricRate> {
    hk.check(model)?;
    let kf = hk.k as f64;
    let target = sp.forms(model, 1.0);
    let potential_sup = hk
        .psi
        .iter()
        .zip(&sp.values)
        .map(|(p, phi)| (p / kf - phi).abs())
        .fold(0.0, f64::max);
    let form_sup = hk
        .forms
        .iter()
        .zip(&target)
        .zip(model.reference_forms())
        .map(|((f, t), r)| {
            let d: [f64; 3] = std::array::from_fn(|i| f[i] / kf - t[i]);
            relative_form_norm(model.kind(), &d, r)
        })
        .fold(0.0, f64::max);
    Ok(MetricRate {
        k: hk.k,
        potential_sup,
        form_sup,
    })
}

/// Largest |eigenvalue| of `d` measured against the reference form `r`.
fn relative_form_norm(kind: ModelKind, d: &[f64; 3], r: &[f64; 3]) -> f64 {
    match kind {
        ModelKind::Cp1 => d[0].abs(),
        ModelKind::Cp2Toric => {
            // eigenvalues of R^{-1} D for symmetric 2x2 R > 0, D
            let det_r = r[0] * r[2] - r[1] * r[1];
            let tr = (r[2] * d[0] - 2.0 * r[1] * d[1] + r[0] * d[2]) / det_r;
            let det = (d[0] * d[2] - d[1] * d[1]) / det_r;
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            (0.5 * tr + disc).abs().max((0.5 * tr - disc).abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_model;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(usize, f64)> = (5..=40).map(|k| (k, 5.0 / (k * k) as f64)).collect();
        let fit = *fit_decay(&pts).unwrap().fit().unwrap();
        assert!((fit.c - 5.0).abs() < 1e-10);
        assert!((fit.p + 2.0).abs() < 1e-10);
        assert!((fit.r2 - 1.0).abs() < 1e-10);
        assert_eq!((fit.k_min, fit.k_max, fit.points), (5, 40, 36));
    }

    #[test]
    fn dominated_term() {
        let pts: Vec<(usize, f64)> = (10..=40).map(|k| (k, 3.0 / k as f64 + 7.0 / (k * k) as f64)).collect();
        let p = fit_decay(&pts).unwrap().exponent();
        assert!(p > -1.3 && p < -1.0, "{p}");
    }

    #[test]
    fn noise_floor_and_errors() {
        let zeros: Vec<(usize, f64)> = (1..=6).map(|k| (k, 0.0)).collect();
        assert_eq!(fit_decay(&zeros).unwrap(), FitOutcome::BelowNoiseFloor);
        let few = [(1, 1.0), (2, 0.5), (3, 0.0), (4, 0.0)];
        assert!(matches!(fit_decay(&few), Err(Error::TooFewPoints(2))));
        let unordered = [(2, 1.0), (1, 0.5), (3, 0.2), (4, 0.1)];
        assert!(matches!(fit_decay(&unordered), Err(Error::InvalidParameter(_))));
        assert!(fit_decay(&[(1, -1.0), (2, 1.0), (3, 1.0), (4, 1.0)]).is_err());
    }

    #[test]
    fn residuals_vanish_at_reference() {
        let m = build_model("CP1", 12).unwrap();
        let phi = Potential::constant(0.0);
        for (_, r) in expansion_residual(&m, &phi, &[2, 6, 12], 1).unwrap() {
            assert!(r < 1e-12);
        }
        for rate in bergman_metric_rate(&m, &phi, &[3, 12]).unwrap() {
            assert!(rate.potential_sup < 1e-12 && rate.form_sup < 1e-12);
        }
        let m2 = build_model("CP2_toric", 6).unwrap();
        assert!(matches!(expansion_residual(&m2, &phi, &[3], 1), Err(Error::Unsupported(_))));
        for rate in bergman_metric_rate(&m2, &phi, &[2, 6]).unwrap() {
            assert!(rate.potential_sup < 1e-12 && rate.form_sup < 1e-10);
        }
    }
}
