use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aubin::p_tilde;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, Potential};
use crate::quantization::{bergman_sequence, fs_with, section_basis, GramMatrix, SectionBasis};

/// Orientation of the one-parameter group acting on Gram matrices:
/// G(s) = M exp(GROUP_ACTION_SIGN · s Λ) M† for a base frame M.
///
/// Fixed so that the derivative of the P̃-surrogate at s = 0 equals the
/// integral formula with a plus sign; frozen by the calibration test.
pub const GROUP_ACTION_SIGN: f64 = -1.0;

/// Relative tolerance for the trace of a generator.
const TRACE_TOL: f64 = 1e-10;

/// A diagonal traceless generator in a frame orthonormal for the base Gram.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSpec {
    pub k: usize,
    pub generator: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Unitary rotation U of the base frame: the frame is L U with L the
    /// Cholesky factor of the base Gram.
    pub rotation: Option<DMatrix<Complex64>>,
}

impl GeodesicSpec {
    /// Rejects generators whose entries do not sum to zero.
    pub fn new(k: usize, generator: Vec<f64>, s_grid: Vec<f64>) -> Result<Self> {
        let sum: f64 = generator.iter().sum();
        let scale: f64 = generator.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if sum.abs() > TRACE_TOL * scale {
            return Err(Error::NotTraceless(sum));
        }
        Ok(GeodesicSpec {
            k,
            generator,
            s_grid,
            rotation: None,
        })
    }

    /// Subtracts the mean from `generator`.
    pub fn centered(k: usize, mut generator: Vec<f64>, s_grid: Vec<f64>) -> Self {
        let mean = generator.iter().sum::<f64>() / generator.len().max(1) as f64;
        generator.iter_mut().for_each(|v| *v -= mean);
        GeodesicSpec {
            k,
            generator,
            s_grid,
            rotation: None,
        }
    }

    pub fn with_rotation(mut self, u: DMatrix<Complex64>) -> Result<Self> {
        let n = u.nrows();
        let defect = (&u * u.adjoint() - DMatrix::<Complex64>::identity(n, n)).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if u.ncols() != n || defect > 1e-10 {
            return Err(Error::InvalidParameter("rotation is not unitary".into()));
        }
        self.rotation = Some(u);
        Ok(self)
    }

    /// `n` equally spaced points on [lo, hi].
    pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n < 2 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

/// f_k sampled along the geodesic, with the integral formula for f_k′(0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicProfile {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime0_integral: f64,
}

impl GeodesicProfile {
    /// min_i f(s_{i-1}) - 2 f(s_i) + f(s_{i+1}); assumes a uniform grid.
    pub fn min_second_difference(&self) -> f64 {
        self.f
            .windows(3)
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .fold(f64::INFINITY, f64::min)
    }
}

struct Geodesic<'a> {
    model: &'a ManifoldModel,
    basis: SectionBasis,
    base: &'a GramMatrix,
    frame: DMatrix<Complex64>,
    rotation_adjoint: Option<DMatrix<Complex64>>,
    generator: Vec<f64>,
}

impl<'a> Geodesic<'a> {
    fn new(model: &'a ManifoldModel, base: &'a GramMatrix, spec: &GeodesicSpec) -> Result<Self> {
        if base.k() != spec.k {
            return Err(Error::LevelMismatch {
                expected: spec.k,
                got: base.k(),
            });
        }
        if spec.generator.len() != base.dim() {
            return Err(Error::InvalidParameter(format!(
                "generator has {} entries, expected {}",
                spec.generator.len(),
                base.dim()
            )));
        }
        GeodesicSpec::new(spec.k, spec.generator.clone(), Vec::new())?;
        let frame = match &spec.rotation {
            Some(u) if u.nrows() == base.dim() => base.lower() * u,
            Some(_) => return Err(Error::InvalidParameter("rotation has the wrong size".into())),
            None => base.lower(),
        };
        Ok(Geodesic {
            model,
            basis: section_basis(model, spec.k)?,
            base,
            frame,
            rotation_adjoint: spec.rotation.as_ref().map(|u| u.adjoint()),
            generator: spec.generator.clone(),
        })
    }

    fn gram(&self, s: f64) -> Result<GramMatrix> {
        let n = self.generator.len();
        let mut scaled = self.frame.clone();
        for j in 0..n {
            let e = (0.5 * GROUP_ACTION_SIGN * s * self.generator[j]).exp();
            scaled.column_mut(j).scale_mut(e);
        }
        GramMatrix::new(self.base.k(), &scaled * scaled.adjoint())
    }

    /// V k^n P̃_k(FS(G(s)), G(s)).
    fn value(&self, s: f64) -> Result<f64> {
        let g = self.gram(s)?;
        let m = fs_with(self.model, &self.basis, &g)?;
        let degree = self.model.volume() * (self.base.k() as f64).powi(self.model.dim() as i32);
        Ok(degree * p_tilde(self.model, &m, &g, self.base.k())?)
    }

    /// ∫ (Σ Λ_α |τ_α|² / Σ |τ_α|²) c1(L^k, FS(G(0)))^n for the frame τ.
    fn derivative_integral(&self) -> Result<f64> {
        let m = fs_with(self.model, &self.basis, self.base)?;
        let ratios = m.top_ratios(self.model)?;
        let n = self.generator.len();
        let nodes = self.model.node_count();
        let weights: Vec<f64> = (0..nodes)
            .into_par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); n],
                |y, q| {
                    self.base.solve_lower(self.basis.node_values(q), y);
                    let tau = self.rotated(y);
                    let total: f64 = tau.iter().map(|v| v.norm_sqr()).sum();
                    let moment: f64 = tau.iter().zip(&self.generator).map(|(v, l)| l * v.norm_sqr()).sum();
                    moment / total * ratios[q]
                },
            )
            .collect();
        Ok(self.model.integrate(&weights))
    }

    /// Coordinates in the rotated frame: U† y.
    fn rotated(&self, y: &[Complex64]) -> Vec<Complex64> {
        match &self.rotation_adjoint {
            Some(ua) => (ua * DMatrix::from_column_slice(y.len(), 1, y)).iter().copied().collect(),
            None => y.to_vec(),
        }
    }
}

/// f_k along the geodesic through the k-th Bergman Gram H_k* of φ∞.
pub fn f_geodesic(model: &ManifoldModel, phi_inf: &Potential, spec: &GeodesicSpec) -> Result<GeodesicProfile> {
    let seq = bergman_sequence(model, phi_inf, spec.k)?;
    f_geodesic_from(model, &seq.gram_star, spec)
}

/// f_k along the geodesic through an arbitrary base Gram.
pub fn f_geodesic_from(model: &ManifoldModel, base: &GramMatrix, spec: &GeodesicSpec) -> Result<GeodesicProfile> {
    let geo = Geodesic::new(model, base, spec)?;
    let f = spec.s_grid.iter().map(|&s| geo.value(s)).collect::<Result<Vec<_>>>()?;
    Ok(GeodesicProfile {
        s: spec.s_grid.clone(),
        f,
        fprime0_integral: geo.derivative_integral()?,
    })
}

/// f_k′(0) by Richardson-extrapolated central differences of f_k.
pub fn f_prime_surrogate(model: &ManifoldModel, base: &GramMatrix, spec: &GeodesicSpec) -> Result<f64> {
    const LEVELS: usize = 4;
    let geo = Geodesic::new(model, base, spec)?;
    let mut table = vec![vec![0.0; LEVELS]; LEVELS];
    let mut h = 0.1;
    for i in 0..LEVELS {
        table[i][0] = (geo.value(h)? - geo.value(-h)?) / (2.0 * h);
        for j in 1..=i {
            let f = 4f64.powi(j as i32);
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (f - 1.0);
        }
        h *= 0.5;
    }
    Ok(table[LEVELS - 1][LEVELS - 1])
}

/// Simultaneous diagonalization of a target Gram against a base Gram.
#[derive(Clone, Debug)]
pub struct LambdaCoefficients {
    /// e^{-2λ_α} are the target norms of a base-orthonormal frame that is
    /// also target-orthogonal.
    pub lambda: Vec<f64>,
    pub mean: f64,
    pub lambda_hat: Vec<f64>,
    /// Unitary U: the common frame is L U with L the base Cholesky factor.
    pub rotation: DMatrix<Complex64>,
}

impl LambdaCoefficients {
    pub fn max_abs(&self) -> f64 {
        self.lambda_hat.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Geodesic from the base reaching e^{2λ̄}·target at s = 1.
    pub fn geodesic(&self, k: usize, s_grid: Vec<f64>) -> Result<GeodesicSpec> {
        let generator: Vec<f64> = self.lambda_hat.iter().map(|l| 2.0 * l).collect();
        GeodesicSpec::centered(k, generator, s_grid).with_rotation(self.rotation.clone())
    }
}

pub fn lambda_coefficients(base: &GramMatrix, target: &GramMatrix) -> Result<LambdaCoefficients> {
    if base.k() != target.k() {
        return Err(Error::LevelMismatch {
            expected: base.k(),
            got: target.k(),
        });
    }
    let l = base.lower();
    let x = l
        .solve_lower_triangular(target.matrix())
        .ok_or_else(|| Error::NotPositiveDefinite("singular base factor".into()))?;
    let m = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::NotPositiveDefinite("singular base factor".into()))?;
    let m = (&m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(m);
    let lambda: Vec<f64> = eig.eigenvalues.iter().map(|mu| -0.5 * mu.ln()).collect();
    if lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite("relative eigenvalue is not positive".into()));
    }
    let mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
    let lambda_hat = lambda.iter().map(|v| v - mean).collect();
    Ok(LambdaCoefficients {
        lambda,
        mean,
        lambda_hat,
        rotation: eig.eigenvectors,
    })
}
