use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::{section_basis, SectionBasis};
use super::gram::GramMatrix;
use super::metric::MetricLevelK;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Potential, ScalarField};
use crate::numeric::pairwise_sum;

const LEAF: usize = 64;

fn check_basis(basis: &SectionBasis, k: usize) -> Result<()> {
    if basis.k() != k {
        return Err(Error::LevelMismatch {
            expected: basis.k(),
            got: k,
        });
    }
    Ok(())
}

/// Σ_q c_q b(q) b(q)† over a node range, upper triangle packed row-wise.
/// The split points depend only on the range, so the summation tree is fixed.
fn accumulate_upper(basis: &SectionBasis, coeffs: &[f64], lo: usize, hi: usize) -> Vec<Complex64> {
    let n = basis.len();
    if hi - lo <= LEAF {
        let mut acc = vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2];
        for q in lo..hi {
            let b = basis.node_values(q);
            let c = coeffs[q];
            let mut idx = 0;
            for i in 0..n {
                let bi = b[i] * c;
                for bj in &b[i..] {
                    acc[idx] += bi * bj.conj();
                    idx += 1;
                }
            }
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (mut a, b) = rayon::join(
        || accumulate_upper(basis, coeffs, lo, mid),
        || accumulate_upper(basis, coeffs, mid, hi),
    );
    for (x, y) in a.iter_mut().zip(&b) {
        *x += y;
    }
    a
}

/// Gram matrix of Σ_q c_q |s|² at nodes. On CP2_toric only the diagonal is
/// assembled: distinct torus weights are orthogonal.
fn assemble(basis: &SectionBasis, coeffs: &[f64]) -> DMatrix<Complex64> {
    let n = basis.len();
    let nodes = coeffs.len();
    match basis.kind() {
        ModelKind::Cp1 => {
            let packed = accumulate_upper(basis, coeffs, 0, nodes);
            let mut m = DMatrix::zeros(n, n);
            let mut idx = 0;
            for i in 0..n {
                for j in i..n {
                    m[(i, j)] = packed[idx];
                    m[(j, i)] = packed[idx].conj();
                    idx += 1;
                }
            }
            m
        }
        ModelKind::Cp2Toric => {
            let diag: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let terms: Vec<f64> = (0..nodes).map(|q| coeffs[q] * basis.node_values(q)[a].norm_sqr()).collect();
                    pairwise_sum(&terms)
                })
                .collect();
            DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) })
        }
    }
}

/// Hilb(h): ‖s‖² = (N_k/(V k^n)) ∫ |s|²_h c1(L^k, h)^n.
pub fn hilb(model: &ManifoldModel, m: &MetricLevelK) -> Result<GramMatrix> {
    let basis = section_basis(model, m.k)?;
    hilb_with(model, &basis, m)
}

pub fn hilb_with(model: &ManifoldModel, basis: &SectionBasis, m: &MetricLevelK) -> Result<GramMatrix> {
    check_basis(basis, m.k)?;
    let ratios = m.top_ratios(model)?;
    let scale = basis.len() as f64 / (model.volume() * basis.degree());
    let w = &model.grid().weights;
    let coeffs: Vec<f64> = (0..ratios.len())
        .map(|q| scale * w[q] * (-m.psi[q]).exp() * ratios[q])
        .collect();
    GramMatrix::new(m.k, assemble(basis, &coeffs))
}

fn require_cp2_diagonal(g: &GramMatrix) -> Result<()> {
    if !g.is_diagonal(1e-12) {
        return Err(Error::Unsupported(
            "CP2_toric supports torus-invariant (diagonal) Gram matrices only".into(),
        ));
    }
    Ok(())
}

/// Per node: Σ|t_α|²/h_ref^k for a G-orthonormal frame {t_α}.
pub fn orthonormal_density(model: &ManifoldModel, basis: &SectionBasis, g: &GramMatrix) -> Result<Vec<f64>> {
    check_basis(basis, g.k())?;
    let nodes = model.node_count();
    match basis.kind() {
        ModelKind::Cp1 => {
            let n = basis.len();
            Ok((0..nodes)
                .into_par_iter()
                .map_init(
                    || vec![Complex64::new(0.0, 0.0); n],
                    |x, q| {
                        g.solve_lower(basis.node_values(q), x);
                        x.iter().map(|v| v.norm_sqr()).sum::<f64>()
                    },
                )
                .collect())
        }
        ModelKind::Cp2Toric => {
            require_cp2_diagonal(g)?;
            let inv: Vec<f64> = g.diagonal().iter().map(|d| 1.0 / d).collect();
            Ok((0..nodes)
                .into_par_iter()
                .map(|q| basis.node_values(q).iter().zip(&inv).map(|(b, i)| b.norm_sqr() * i).sum::<f64>())
                .collect())
        }
    }
}

/// FS(G): |s|²_{FS(G)} = |s|² / Σ|t_α|² for a G-orthonormal {t_α}.
pub fn fs(model: &ManifoldModel, g: &GramMatrix) -> Result<MetricLevelK> {
    let basis = section_basis(model, g.k())?;
    fs_with(model, &basis, g)
}

pub fn fs_with(model: &ManifoldModel, basis: &SectionBasis, g: &GramMatrix) -> Result<MetricLevelK> {
    check_basis(basis, g.k())?;
    let nodes = model.node_count();
    let n = basis.len();
    let data: Vec<(f64, [f64; 3])> = match basis.kind() {
        ModelKind::Cp1 => (0..nodes)
            .into_par_iter()
            .map_init(
                || (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]),
                |(x, y), q| {
                    g.solve_lower(basis.node_values(q), x);
                    g.solve_lower(basis.node_derivs(q), y);
                    let xx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
                    let yy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
                    let xy: Complex64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
                    let density = (xx * yy - xy.norm_sqr()) / (xx * xx);
                    (xx.ln(), [density, 0.0, 0.0])
                },
            )
            .collect(),
        ModelKind::Cp2Toric => {
            require_cp2_diagonal(g)?;
            let inv: Vec<f64> = g.diagonal().iter().map(|d| 1.0 / d).collect();
            let exps = basis.exponents();
            (0..nodes)
                .into_par_iter()
                .map(|q| {
                    // ξ-Hessian of log Σ e^{⟨m,ξ⟩}/g_m is the covariance of m
                    let b = basis.node_values(q);
                    let v: Vec<f64> = b.iter().zip(&inv).map(|(b, i)| b.norm_sqr() * i).collect();
                    let total: f64 = v.iter().sum();
                    let (mut m1, mut m2) = (0.0, 0.0);
                    for (vi, e) in v.iter().zip(exps) {
                        m1 += vi * e[0] as f64;
                        m2 += vi * e[1] as f64;
                    }
                    m1 /= total;
                    m2 /= total;
                    let (mut c11, mut c12, mut c22) = (0.0, 0.0, 0.0);
                    for (vi, e) in v.iter().zip(exps) {
                        let d1 = e[0] as f64 - m1;
                        let d2 = e[1] as f64 - m2;
                        c11 += vi * d1 * d1;
                        c12 += vi * d1 * d2;
                        c22 += vi * d2 * d2;
                    }
                    (total.ln(), [c11 / total, c12 / total, c22 / total])
                })
                .collect()
        }
    };
    let (psi, forms) = data.into_iter().unzip();
    Ok(MetricLevelK {
        k: g.k(),
        psi,
        forms,
        grid: model.signature(),
    })
}

/// sup over nodes of |Σ_α |τ_α|²_h - 1| for an H-orthonormal frame {τ_α}.
pub fn balance_defect(model: &ManifoldModel, basis: &SectionBasis, m: &MetricLevelK, h: &GramMatrix) -> Result<f64> {
    m.check(model)?;
    let q = orthonormal_density(model, basis, h)?;
    Ok(q.iter()
        .zip(&m.psi)
        .map(|(q, p)| (q * (-p).exp() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// ρ_k(ω_φ) = (N_k n!/(V k^n)) Σ|s_α|²_{h^k} with {s_α} Hilb(h^k)-orthonormal.
pub fn bergman_kernel(model: &ManifoldModel, phi: &Potential, k: usize) -> Result<ScalarField> {
    let basis = section_basis(model, k)?;
    let m = MetricLevelK::from_potential(model, phi, k)?;
    model.field(bergman_density(model, &basis, &m)?)
}

/// Normalized Bergman kernel of an arbitrary level-k metric.
pub fn bergman_density(model: &ManifoldModel, basis: &SectionBasis, m: &MetricLevelK) -> Result<Vec<f64>> {
    let g = hilb_with(model, basis, m)?;
    let q = orthonormal_density(model, basis, &g)?;
    let fact: f64 = (1..=model.dim()).map(|i| i as f64).product();
    let c = basis.len() as f64 * fact / (model.volume() * basis.degree());
    Ok(q.iter().zip(&m.psi).map(|(q, p)| c * q * (-p).exp()).collect())
}

/// The chain h_k* = FS(Hilb(h_∞^k)), H_k* = Hilb(h_k*), h_k** = FS(H_k*).
#[derive(Clone, Debug)]
pub struct BergmanSequence {
    pub k: usize,
    pub h_inf: MetricLevelK,
    pub gram_inf: GramMatrix,
    pub h_star: MetricLevelK,
    /// (ω_k*/k)^n / ω_ref^n with ω_k* = c1(L^k, h_k*).
    pub omega_star: ScalarField,
    pub gram_star: GramMatrix,
    pub h_double_star: MetricLevelK,
}

pub fn bergman_sequence(model: &ManifoldModel, phi_inf: &Potential, k: usize) -> Result<BergmanSequence> {
    let basis = section_basis(model, k)?;
    let h_inf = MetricLevelK::from_potential(model, phi_inf, k)?;
    let gram_inf = hilb_with(model, &basis, &h_inf)?;
    let h_star = fs_with(model, &basis, &gram_inf)?;
    let kn = basis.degree();
    let omega_star = model.field(h_star.top_ratios(model)?.iter().map(|r| r / kn).collect())?;
    let gram_star = hilb_with(model, &basis, &h_star)?;
    let h_double_star = fs_with(model, &basis, &gram_star)?;
    Ok(BergmanSequence {
        k,
        h_inf,
        gram_inf,
        h_star,
        omega_star,
        gram_star,
        h_double_star,
    })
}

/// ‖Σ_α |τ_α|²_{h_k*} - 1‖_∞ with {τ_α} orthonormal for H_k* = Hilb(h_k*).
pub fn almost_balanced_defect(model: &ManifoldModel, phi_inf: &Potential, k: usize) -> Result<f64> {
    let seq = bergman_sequence(model, phi_inf, k)?;
    let basis = section_basis(model, k)?;
    balance_defect(model, &basis, &seq.h_star, &seq.gram_star)
}
