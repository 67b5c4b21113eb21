//! Spherical-harmonic transform on the Gauss–Legendre × uniform grid.
//!
//! Used for spectral second derivatives of sampled fields on CP1. The
//! Laplacian here is the unit-round-sphere Laplace–Beltrami operator, which
//! coincides with f ↦ ((√-1/2π)∂∂̄f)/ω_FS.

use num_complex::Complex64;

/// Orthonormal associated Legendre functions P̄_l^m(u), l = m..=lmax, with
/// ∫_{-1}^{1} P̄_l^m(u)² du = 1. The Condon–Shortley phase is omitted.
pub fn assoc_legendre_normalized(lmax: usize, m: usize, u: f64) -> Vec<f64> {
    if m > lmax {
        return Vec::new();
    }
    let sin_t = (1.0 - u * u).max(0.0).sqrt();
    // P̄_m^m = sqrt((2m+1)/2 * prod_{i=1}^m (2i-1)/(2i)) sin^m
    let mut pmm = (0.5f64).sqrt();
    for i in 1..=m {
        let fi = i as f64;
        pmm *= ((2.0 * fi + 1.0) / (2.0 * fi)).sqrt() * sin_t;
    }
    let mut out = Vec::with_capacity(lmax - m + 1);
    out.push(pmm);
    if m == lmax {
        return out;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p_cur = (2.0 * mf + 3.0).sqrt() * u * pmm;
    out.push(p_cur);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let p_next = a * (u * p_cur - b * p_prev);
        p_prev = p_cur;
        p_cur = p_next;
        out.push(p_cur);
    }
    out
}

/// Precomputed tables for analysis/synthesis on one sphere grid.
#[derive(Debug)]
pub struct SphericalTransform {
    n_theta: usize,
    n_phi: usize,
    lmax: usize,
    mmax: usize,
    polar_weights: Vec<f64>,
    /// plm[m][(l - m) * n_theta + i] = P̄_l^m(u_i)
    plm: Vec<Vec<f64>>,
    /// e^{-i m φ_j}, indexed m * n_phi + j
    twiddle: Vec<Complex64>,
}

impl SphericalTransform {
    pub fn new(polar_nodes: &[f64], polar_weights: &[f64], n_phi: usize) -> Self {
        let n_theta = polar_nodes.len();
        let lmax = n_theta - 1;
        let mmax = lmax.min((n_phi - 1) / 2);
        let mut plm = Vec::with_capacity(mmax + 1);
        for m in 0..=mmax {
            let mut table = vec![0.0; (lmax - m + 1) * n_theta];
            for (i, &u) in polar_nodes.iter().enumerate() {
                for (dl, v) in assoc_legendre_normalized(lmax, m, u).into_iter().enumerate() {
                    table[dl * n_theta + i] = v;
                }
            }
            plm.push(table);
        }
        let mut twiddle = Vec::with_capacity((mmax + 1) * n_phi);
        for m in 0..=mmax {
            for j in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                twiddle.push(Complex64::from_polar(1.0, -(m as f64) * phi));
            }
        }
        SphericalTransform {
            n_theta,
            n_phi,
            lmax,
            mmax,
            polar_weights: polar_weights.to_vec(),
            plm,
            twiddle,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn mmax(&self) -> usize {
        self.mmax
    }

    /// Coefficients a[m][l - m] of a real field sampled on the grid.
    pub fn analyze(&self, field: &[f64]) -> Vec<Vec<Complex64>> {
        assert_eq!(field.len(), self.n_theta * self.n_phi);
        let nphi = self.n_phi as f64;
        let mut coeffs = Vec::with_capacity(self.mmax + 1);
        for m in 0..=self.mmax {
            // azimuthal Fourier coefficient on every ring
            let tw = &self.twiddle[m * self.n_phi..(m + 1) * self.n_phi];
            let ring: Vec<Complex64> = (0..self.n_theta)
                .map(|i| {
                    let row = &field[i * self.n_phi..(i + 1) * self.n_phi];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (f, t) in row.iter().zip(tw) {
                        acc += t * f;
                    }
                    acc / nphi
                })
                .collect();
            let table = &self.plm[m];
            let mut row = Vec::with_capacity(self.lmax - m + 1);
            for dl in 0..=(self.lmax - m) {
                let p = &table[dl * self.n_theta..(dl + 1) * self.n_theta];
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.n_theta {
                    acc += ring[i] * (self.polar_weights[i] * p[i]);
                }
                row.push(acc);
            }
            coeffs.push(row);
        }
        coeffs
    }

    pub fn synthesize(&self, coeffs: &[Vec<Complex64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_theta * self.n_phi];
        for m in 0..=self.mmax {
            let table = &self.plm[m];
            let ring: Vec<Complex64> = (0..self.n_theta)
                .map(|i| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (dl, c) in coeffs[m].iter().enumerate() {
                        acc += c * table[dl * self.n_theta + i];
                    }
                    acc
                })
                .collect();
            let tw = &self.twiddle[m * self.n_phi..(m + 1) * self.n_phi];
            let factor = if m == 0 { 1.0 } else { 2.0 };
            for i in 0..self.n_theta {
                for j in 0..self.n_phi {
                    // e^{+imφ} = conj(twiddle)
                    out[i * self.n_phi + j] += factor * (ring[i] * tw[j].conj()).re;
                }
            }
        }
        out
    }

    fn mean(&self, field: &[f64]) -> f64 {
        let ring_means: Vec<f64> = (0..self.n_theta)
            .map(|i| crate::numeric::pairwise_sum(&field[i * self.n_phi..(i + 1) * self.n_phi]) / self.n_phi as f64)
            .collect();
        0.5 * crate::numeric::weighted_sum(&self.polar_weights, &ring_means)
    }

    /// Spectral Laplace–Beltrami of the unit round sphere.
    pub fn laplacian(&self, field: &[f64]) -> Vec<f64> {
        // the constant mode is annihilated; removing it first keeps its
        // roundoff out of the high-l coefficients
        let mean = self.mean(field);
        let centered: Vec<f64> = field.iter().map(|v| v - mean).collect();
        let mut c = self.analyze(&centered);
        for (m, row) in c.iter_mut().enumerate() {
            for (dl, v) in row.iter_mut().enumerate() {
                let l = (m + dl) as f64;
                *v *= -l * (l + 1.0);
            }
        }
        self.synthesize(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gauss_legendre;

    #[test]
    fn normalized_legendre_is_orthonormal() {
        let (u, w) = gauss_legendre(40);
        for m in [0usize, 1, 3, 7] {
            let tables: Vec<Vec<f64>> = u.iter().map(|&x| assoc_legendre_normalized(20, m, x)).collect();
            for a in 0..=(20 - m) {
                for b in 0..=(20 - m) {
                    let s: f64 = (0..40).map(|i| w[i] * tables[i][a] * tables[i][b]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-12, "m={m} a={a} b={b} s={s}");
                }
            }
        }
    }

    #[test]
    fn round_trip_band_limited() {
        let (u, w) = gauss_legendre(12);
        let tr = SphericalTransform::new(&u, &w, 24);
        let field: Vec<f64> = u
            .iter()
            .flat_map(|&x| {
                (0..24).map(move |j| {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / 24.0;
                    x * x + (1.0 - x * x) * (2.0 * phi).cos() + x.powi(3) * (1.0 - x * x).sqrt() * phi.sin()
                })
            })
            .collect();
        let back = tr.synthesize(&tr.analyze(&field));
        for (a, b) in field.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_eigenvalues() {
        let (u, w) = gauss_legendre(16);
        let tr = SphericalTransform::new(&u, &w, 20);
        for l in 0..6usize {
            let field: Vec<f64> = u
                .iter()
                .flat_map(|&x| std::iter::repeat(crate::numeric::legendre(l, x)).take(20))
                .collect();
            let lap = tr.laplacian(&field);
            let ev = -((l * (l + 1)) as f64);
            for (f, g) in field.iter().zip(&lap) {
                assert!((g - ev * f).abs() < 1e-11);
            }
        }
    }
}
