//! Quadrature rules realizing ∫_X f ω_ref^n on the two model varieties.

use serde::{Deserialize, Serialize};

use crate::numeric::{gauss_legendre, pairwise_sum};

use super::ModelKind;

/// Identifies a grid: two models with the same signature share nodes and
/// weights bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSignature {
    pub kind: ModelKind,
    /// Polar (CP1) or first simplex coordinate (CP2) node count.
    pub n_a: usize,
    /// Azimuthal (CP1) or second simplex coordinate (CP2) node count.
    pub n_b: usize,
}

impl GridSignature {
    pub fn node_count(&self) -> usize {
        self.n_a * self.n_b
    }
}

/// Product quadrature rule. Node `i * n_b + j` sits at `(a_i, b_j)`.
///
/// * CP1: `a = u = cos θ` at Gauss–Legendre nodes, `b = φ` uniform; the
///   weights integrate against ω_FS = du dφ / 4π.
/// * CP2_toric: moment coordinates `p1 = s`, `p2 = (1 - s) t` with `s`,
///   `t` Gauss–Legendre on (0, 1); the weights integrate torus-invariant
///   functions against ω_FS² = 2 dp1 dp2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub signature: GridSignature,
    /// Per-node chart coordinates: (u, φ) on CP1, (p1, p2) on CP2.
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Largest level whose reference-metric section products are
    /// integrated exactly.
    pub capability_k: usize,
    /// Polar Gauss–Legendre nodes/weights on [-1, 1] (CP1), kept for the
    /// spherical transform.
    pub polar_nodes: Vec<f64>,
    pub polar_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn sphere(n_theta: usize, n_phi: usize) -> Self {
        let (u, wu) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (ui, wi) in u.iter().zip(&wu) {
            for j in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                nodes.push([*ui, phi]);
                weights.push(0.5 * wi / n_phi as f64);
            }
        }
        // u^d exact for d <= 2 n_theta - 1; e^{imφ} annihilated for 0 < |m| < n_phi.
        let capability_k = (n_phi - 1).min(2 * n_theta - 1);
        QuadratureRule {
            signature: GridSignature {
                kind: ModelKind::Cp1,
                n_a: n_theta,
                n_b: n_phi,
            },
            nodes,
            weights,
            capability_k,
            polar_nodes: u,
            polar_weights: wu,
        }
    }

    pub fn simplex(n: usize) -> Self {
        let (x, wx) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (xs, ws) in x.iter().zip(&wx) {
            let s = 0.5 * (xs + 1.0);
            for (xt, wt) in x.iter().zip(&wx) {
                let t = 0.5 * (xt + 1.0);
                nodes.push([s, (1.0 - s) * t]);
                weights.push(2.0 * (1.0 - s) * 0.25 * ws * wt);
            }
        }
        // p1^a p2^b p0^c (1 - s) has s-degree k + 1 and t-degree k.
        let capability_k = 2 * n - 2;
        QuadratureRule {
            signature: GridSignature {
                kind: ModelKind::Cp2Toric,
                n_a: n,
                n_b: n,
            },
            nodes,
            weights,
            capability_k,
            polar_nodes: Vec::new(),
            polar_weights: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{binomial, weighted_sum};

    #[test]
    fn weights_sum_to_volume() {
        assert!((QuadratureRule::sphere(30, 28).total_weight() - 1.0).abs() < 1e-13);
        assert!((QuadratureRule::simplex(14).total_weight() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_beta_integrals_exact() {
        let rule = QuadratureRule::sphere(24, 40);
        let k = rule.capability_k.min(30);
        for a in 0..=k {
            // |z|^{2a} / (1+|z|^2)^k = ((1-u)/2)^a ((1+u)/2)^{k-a}
            let vals: Vec<f64> = rule
                .nodes
                .iter()
                .map(|[u, _]| ((1.0 - u) / 2.0).powi(a as i32) * ((1.0 + u) / 2.0).powi((k - a) as i32))
                .collect();
            let got = weighted_sum(&rule.weights, &vals);
            let exact = 1.0 / ((k as f64 + 1.0) * binomial(k, a));
            assert!(((got - exact) / exact).abs() < 1e-12, "a={a}: {got} vs {exact}");
        }
    }

    #[test]
    fn sphere_annihilates_azimuthal_modes() {
        let rule = QuadratureRule::sphere(10, 21);
        for m in 1..=20 {
            let vals: Vec<f64> = rule.nodes.iter().map(|[_, p]| (m as f64 * p).cos()).collect();
            assert!(weighted_sum(&rule.weights, &vals).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_dirichlet_integrals_exact() {
        let rule = QuadratureRule::simplex(10);
        let k = 12;
        for a in 0..=k {
            for b in 0..=(k - a) {
                let c = k - a - b;
                let vals: Vec<f64> = rule
                    .nodes
                    .iter()
                    .map(|[p1, p2]| p1.powi(a as i32) * p2.powi(b as i32) * (1.0 - p1 - p2).powi(c as i32))
                    .collect();
                let got = weighted_sum(&rule.weights, &vals);
                // 2 a! b! c! / (k+2)!
                let exact = 2.0 / (crate::numeric::multinomial(k, a, b) * (k as f64 + 1.0) * (k as f64 + 2.0));
                assert!(((got - exact) / exact).abs() < 1e-12);
            }
        }
    }
}
