use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aubin::{aubin_yau_between, l_functional, p_tilde};
use super::geodesic::{f_geodesic_from, lambda_coefficients};
use super::kenergy::k_energy;
use super::path::PathSpec;
use super::report::{FunctionalReport, NamedFit};
use crate::asymptotics::fit_decay;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Potential};
use crate::quantization::{bergman_sequence, fs_with, hilb_with, section_basis, MetricLevelK};

fn degree(model: &ManifoldModel, k: usize) -> f64 {
    model.volume() * (k as f64).powi(model.dim() as i32)
}

/// FS(Hilb(h^k)) for h = h_ref e^{-φ}.
fn bergman_metric(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<MetricLevelK> {
    let basis = section_basis(model, k)?;
    let m = MetricLevelK::from_potential(model, phi, k)?;
    fs_with(model, &basis, &hilb_with(model, &basis, &m)?)
}

/// P̃_k(h_k, Hilb(h_k)) - P̃_k(FS(Hilb(h_k)), Hilb(h_k)) for the k-th
/// Bergman metric h_k of h_ref e^{-φ}. Nonnegative by concavity of log.
pub fn lemma_step1_gap(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<f64> {
    let basis = section_basis(model, k)?;
    let hk = bergman_metric(model, phi, k)?;
    let next = fs_with(model, &basis, &hilb_with(model, &basis, &hk)?)?;
    Ok(aubin_yau_between(model, &hk, &next, &PathSpec::linear().t_nodes())? / degree(model, k))
}

/// |P̃_k(FS(H_k*), H_k*) - P̃_k(h_k*, Hilb(h_k*))| = |I_k(h_k*) - I_k(h_k**)|/(V k^n).
pub fn lemma_step3_gap(model: &ManifoldModel, phi_inf: &Potential, k: usize) -> Result<f64> {
    let seq = bergman_sequence(model, phi_inf, k)?;
    let d = aubin_yau_between(model, &seq.h_star, &seq.h_double_star, &PathSpec::linear().t_nodes())?;
    Ok(d.abs() / degree(model, k))
}

/// Geodesic comparison between H_k = Hilb(h_k) and H_k*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step2Report {
    pub k: usize,
    /// P̃_k(FS(H_k), H_k) - P̃_k(FS(H_k*), H_k*)
    pub difference: f64,
    /// f_k(1) - f_k(0) along the geodesic from H_k* to e^{2λ̄} H_k
    pub f_increment: f64,
    /// f_k′(0) from the integral formula
    pub fprime0: f64,
    /// max |λ̂_α|
    pub lambda_hat_max: f64,
}

impl Step2Report {
    /// f(1) - f(0) - f′(0), nonnegative by convexity.
    pub fn convexity_slack(&self) -> f64 {
        self.f_increment - self.fprime0
    }

    /// |f′(0)| / (k^{n-1} max|λ̂|).
    pub fn derivative_ratio(&self, dim: usize) -> f64 {
        if self.lambda_hat_max == 0.0 {
            return 0.0;
        }
        self.fprime0.abs() / ((self.k as f64).powi(dim as i32 - 1) * self.lambda_hat_max)
    }
}

pub fn lemma_step2(model: &ManifoldModel, phi: &Potential, phi_inf: &Potential, k: usize) -> Result<Step2Report> {
    let basis = section_basis(model, k)?;
    let hk = bergman_metric(model, phi, k)?;
    let gram_k = hilb_with(model, &basis, &hk)?;
    let seq = bergman_sequence(model, phi_inf, k)?;
    let base = &seq.gram_star;
    let lc = lambda_coefficients(base, &gram_k)?;
    let spec = lc.geodesic(k, vec![0.0, 1.0])?;
    let profile = f_geodesic_from(model, base, &spec)?;
    let difference = p_tilde(model, &fs_with(model, &basis, &gram_k)?, &gram_k, k)?
        - p_tilde(model, &seq.h_double_star, base, k)?;
    Ok(Step2Report {
        k,
        difference,
        f_increment: profile.f[1] - profile.f[0],
        fprime0: profile.fprime0_integral,
        lambda_hat_max: lc.max_abs(),
    })
}

/// Pass/fail thresholds of the theorem chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainTolerances {
    /// ν ≥ -nu_floor
    pub nu_floor: f64,
    /// |ν| ≤ csck_nu on cscK inputs
    pub csck_nu: f64,
    /// quadrature-limited inequalities
    pub inequality: f64,
}

impl Default for ChainTolerances {
    fn default() -> Self {
        ChainTolerances {
            nu_floor: 1e-6,
            csck_nu: 1e-6,
            inequality: 1e-8,
        }
    }
}

struct ChainRow {
    l_difference: f64,
    step1: f64,
    step2: Step2Report,
    chain_gap: f64,
}

fn chain_row(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<ChainRow> {
    let reference = Potential::constant(0.0);
    let l_phi = l_functional(model, phi, k)?;
    let l_ref = l_functional(model, &reference, k)?;
    let seq = bergman_sequence(model, &reference, k)?;
    let p_star = p_tilde(model, &seq.h_star, &seq.gram_star, k)?;
    Ok(ChainRow {
        l_difference: l_phi - l_ref,
        step1: lemma_step1_gap(model, phi, k)?,
        step2: lemma_step2(model, phi, &reference, k)?,
        chain_gap: l_phi - p_star,
    })
}

/// Evaluates the chain of inequalities comparing each suite potential with
/// the reference cscK metric, collecting violations instead of failing.
pub fn theorem1_evaluate(
    model: &ManifoldModel,
    suite: &[Potential],
    k_list: &[usize],
    tol: &ChainTolerances,
) -> Result<FunctionalReport> {
    if model.kind() != ModelKind::Cp1 {
        return Err(Error::Unsupported("the theorem chain needs the K-energy (CP1 only)".into()));
    }
    for &k in k_list {
        model.check_level(k)?;
    }
    let path = PathSpec::linear();
    let nus = suite
        .par_iter()
        .map(|phi| k_energy(model, phi, &path))
        .collect::<Result<Vec<f64>>>()?;
    let step3 = k_list
        .par_iter()
        .map(|&k| lemma_step3_gap(model, &Potential::constant(0.0), k))
        .collect::<Result<Vec<f64>>>()?;
    let jobs: Vec<(usize, usize)> = (0..suite.len()).flat_map(|i| k_list.iter().map(move |&k| (i, k))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, k)| chain_row(model, &suite[i], k))
        .collect::<Result<Vec<ChainRow>>>()?;

    let mut report = FunctionalReport::new(path.t_order, model.signature());
    for (&k, gap) in k_list.iter().zip(&step3) {
        report.push("reference", Some(k), "step3_gap", *gap);
    }
    for (i, phi) in suite.iter().enumerate() {
        let label = phi.label();
        let nu = nus[i];
        report.push(&label, None, "nu", nu);
        if nu < -tol.nu_floor {
            report.violation(format!("{label}: K-energy {nu:e} below -{:e}", tol.nu_floor));
        }
        if phi.is_csck() && nu.abs() > tol.csck_nu {
            report.violation(format!("{label}: K-energy {nu:e} nonzero on a cscK input"));
        }
        let mine = &rows[i * k_list.len()..(i + 1) * k_list.len()];
        let mut approx = Vec::with_capacity(k_list.len());
        for (&k, row) in k_list.iter().zip(mine) {
            let err = (2.0 * row.l_difference - nu).abs();
            approx.push((k, err));
            report.push(&label, Some(k), "l_difference", row.l_difference);
            report.push(&label, Some(k), "approx_error", err);
            report.push(&label, Some(k), "step1_gap", row.step1);
            report.push(&label, Some(k), "step2_difference", row.step2.difference);
            report.push(&label, Some(k), "step2_slack", row.step2.convexity_slack());
            report.push(&label, Some(k), "fprime0", row.step2.fprime0);
            report.push(&label, Some(k), "lambda_hat_max", row.step2.lambda_hat_max);
            report.push(&label, Some(k), "chain_gap", row.chain_gap);
            if row.step1 < -tol.inequality {
                report.violation(format!("{label}, k = {k}: step-1 gap {:e}", row.step1));
            }
            let scale = 1.0 + row.step2.f_increment.abs();
            if row.step2.convexity_slack() < -tol.inequality * scale {
                report.violation(format!(
                    "{label}, k = {k}: geodesic convexity slack {:e}",
                    row.step2.convexity_slack()
                ));
            }
        }
        // c from the first half of the k-range, checked on the rest
        let half = k_list.len().div_ceil(2);
        let c = k_list[..half]
            .iter()
            .zip(mine)
            .map(|(&k, row)| (-row.chain_gap * k as f64).max(0.0))
            .fold(0.0, f64::max);
        report.push(&label, None, "chain_constant", c);
        for (&k, row) in k_list.iter().zip(mine).skip(half) {
            if row.chain_gap < -c / k as f64 - tol.inequality {
                report.violation(format!(
                    "{label}, k = {k}: chain gap {:e} below -{c:e}/k",
                    row.chain_gap
                ));
            }
        }
        report.fits.push(NamedFit::from_result(&label, "approx_error", fit_decay(&approx)));
    }
    Ok(report)
}

/// Like [`theorem1_evaluate`], but any violation is an error listing them.
pub fn theorem1_suite(model: &ManifoldModel, suite: &[Potential], k_list: &[usize]) -> Result<FunctionalReport> {
    let report = theorem1_evaluate(model, suite, k_list, &ChainTolerances::default())?;
    if !report.violations.is_empty() {
        return Err(Error::CheckFailed(report.violations.join("; ")));
    }
    Ok(report)
}
