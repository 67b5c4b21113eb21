//! Small numerical kernels shared by every module: deterministic
//! summation, Gauss–Legendre rules and binomials.

use num_complex::Complex64;

/// Pairwise (cascade) summation. The recursion order depends only on the
/// slice length, so results are reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Dot product of weights and values with pairwise reduction.
pub fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), values.len());
    let terms: Vec<f64> = weights.iter().zip(values).map(|(w, v)| w * v).collect();
    pairwise_sum(&terms)
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending nodes.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps
/// for the orders used here (up to a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n(x) and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

/// Binomial coefficient as f64 (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Multinomial coefficient k! / (a! b! c!) with c = k - a - b.
pub fn multinomial(k: usize, a: usize, b: usize) -> f64 {
    binomial(k, a) * binomial(k - a, b)
}

/// Composite Gauss–Legendre rule on [lo, hi] with `panels` equal panels of
/// `order` points each.
pub fn composite_gauss(lo: f64, hi: f64, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((a + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}
