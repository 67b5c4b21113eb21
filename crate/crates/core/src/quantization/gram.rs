use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible eigenvalue ratio of the diagonally equilibrated Gram.
pub const PD_RATIO_TOL: f64 = 1e-12;

/// An element of ℋ_k: a Hermitian positive-definite inner product on
/// H⁰(X, L^k), stored as G_{αβ} = H(s_α, s_β) in the monomial basis.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    k: usize,
    mat: DMatrix<Complex64>,
    /// Cholesky factor G = L L†, row-major lower triangle.
    lower: Vec<Complex64>,
    log_det: f64,
}

impl PartialEq for GramMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.mat == other.mat
    }
}

impl GramMatrix {
    /// Validates and stores `mat`. The Hermitian part is taken so that
    /// G = G† holds exactly.
    pub fn new(k: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "Gram matrix must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(mat[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = 0.5 * (mat[(i, j)] + mat[(j, i)].conj());
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        let diag: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        if let Some(i) = diag.iter().position(|d| *d <= 0.0) {
            return Err(Error::NotPositiveDefinite(format!("diagonal entry {i} is {}", diag[i])));
        }
        // equilibrate so the test is insensitive to the basis scaling
        let scale: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        let eq = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * (scale[i] * scale[j]));
        let eig = SymmetricEigen::new(eq).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(lo > PD_RATIO_TOL * hi) {
            return Err(Error::NotPositiveDefinite(format!(
                "equilibrated eigenvalue ratio {:e} below {PD_RATIO_TOL:e}",
                lo / hi
            )));
        }
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        let l = chol.l();
        let mut lower = vec![Complex64::new(0.0, 0.0); n * n];
        let mut log_det = 0.0;
        for i in 0..n {
            for j in 0..=i {
                lower[i * n + j] = l[(i, j)];
            }
            log_det += 2.0 * l[(i, i)].re.ln();
        }
        Ok(GramMatrix { k, mat: h, lower, log_det })
    }

    pub fn from_diagonal(k: usize, diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        GramMatrix::new(k, m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// log det G in the monomial basis.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Lower Cholesky factor as a matrix.
    pub fn lower(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.lower[i * n + j])
    }

    /// Solves L x = b (forward substitution), i.e. x = coordinates of the
    /// section-value vector in a G-orthonormal frame.
    pub fn solve_lower(&self, b: &[Complex64], x: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let mut acc = b[i];
            for (lij, xj) in row.iter().zip(x.iter()) {
                acc -= lij * xj;
            }
            x[i] = acc / self.lower[i * n + i];
        }
    }

    /// e^c G.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        GramMatrix::new(self.k, self.mat.map(|v| v * c.exp()))
    }

    /// G / det(G)^{1/N}, so that det = 1.
    pub fn det_normalized(&self) -> Result<Self> {
        self.scaled(-self.log_det / self.dim() as f64)
    }

    /// A G A† for an invertible A.
    pub fn congruence(&self, a: &DMatrix<Complex64>) -> Result<Self> {
        GramMatrix::new(self.k, a * &self.mat * a.adjoint())
    }

    /// Off-diagonal entries small relative to the geometric mean of the
    /// corresponding diagonal entries.
    pub fn is_diagonal(&self, rel_tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| i == j || self.mat[(i, j)].norm() <= rel_tol * (self.mat[(i, i)].re * self.mat[(j, j)].re).sqrt())
        })
    }

    /// Sup over entries of |A - B| / sqrt(A_ii A_jj).
    pub fn relative_distance(&self, other: &GramMatrix) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s = (self.mat[(i, i)].re * self.mat[(j, j)].re).sqrt();
                worst = worst.max((self.mat[(i, j)] - other.mat[(i, j)]).norm() / s);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_and_near_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).map(|v| Complex64::new(v, 0.0));
        assert!(GramMatrix::new(1, m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0]).map(|v| Complex64::new(v, 0.0));
        assert!(matches!(GramMatrix::new(1, m), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn enforces_hermitian_storage() {
        let mut m = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        m[(0, 0)] = Complex64::new(2.0, 1e-9);
        m[(1, 1)] = Complex64::new(3.0, 0.0);
        m[(0, 1)] = Complex64::new(0.5, 0.25);
        m[(1, 0)] = Complex64::new(0.5, -0.25);
        let g = GramMatrix::new(1, m).unwrap();
        assert_eq!(g.matrix().adjoint(), *g.matrix());
        assert!((g.log_det() - (6.0f64 - 0.3125).ln()).abs() < 1e-14);
    }

    #[test]
    fn badly_scaled_diagonal_is_accepted() {
        // eigenvalue ratio 1e-20, but perfectly conditioned after equilibration
        let g = GramMatrix::from_diagonal(1, &[1e-10, 1e10]).unwrap();
        assert!(g.log_det().abs() < 1e-12);
    }
}
