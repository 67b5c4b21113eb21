use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kquant::asymptotics::{fit_decay, FitOutcome};
use kquant::functionals::{aubin_yau_between, p_tilde, PathSpec};
use kquant::quantization::{fs, hilb, MetricLevelK};
use kquant::{build_model, Potential};

fn small_potential(l: usize, eps: f64) -> Potential {
    // |l(l+1) eps| < 1 keeps ω_φ positive
    Potential::legendre(l, eps / (l * (l + 1)) as f64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fit_is_scale_equivariant(p in -3.0f64..-0.2, c in 0.01f64..100.0, s in 0.01f64..100.0) {
        let pts: Vec<(usize, f64)> = (4..12).map(|k| (k, c * (k as f64).powf(p))).collect();
        let a = fit_decay(&pts).unwrap();
        let scaled: Vec<(usize, f64)> = pts.iter().map(|&(k, v)| (k, s * v)).collect();
        let b = fit_decay(&scaled).unwrap();
        match (a, b) {
            (FitOutcome::Fit(a), FitOutcome::Fit(b)) => {
                prop_assert!((a.p - p).abs() < 1e-9);
                prop_assert!((a.p - b.p).abs() < 1e-9);
                prop_assert!((b.c / a.c - s).abs() < 1e-8 * s);
                prop_assert!(a.r2 > 1.0 - 1e-12);
            }
            other => prop_assert!(false, "unexpected outcome {:?}", other),
        }
    }

    #[test]
    fn laplacian_is_self_adjoint(seed in any::<u64>()) {
        let m = build_model("CP1", 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..m.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..m.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lf = m.reference_laplacian(&f).unwrap();
        let lg = m.reference_laplacian(&g).unwrap();
        let a = m.integrate(&f.iter().zip(&lg).map(|(x, y)| x * y).collect::<Vec<_>>());
        let b = m.integrate(&g.iter().zip(&lf).map(|(x, y)| x * y).collect::<Vec<_>>());
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn p_tilde_is_scale_invariant(l in 1usize..4, eps in -0.8f64..0.8, c in -5.0f64..5.0, k in 2usize..8) {
        let m = build_model("CP1", 8).unwrap();
        let h = MetricLevelK::from_potential(&m, &small_potential(l, eps), k).unwrap();
        let g = hilb(&m, &h).unwrap();
        let base = p_tilde(&m, &h, &g, k).unwrap();
        let moved = p_tilde(&m, &h.scaled(c), &g.scaled(c).unwrap(), k).unwrap();
        prop_assert!((base - moved).abs() < 1e-10, "{} vs {}", base, moved);
    }

    #[test]
    fn fs_shifts_by_the_scale(eps in -0.8f64..0.8, c in -5.0f64..5.0, k in 1usize..8) {
        let m = build_model("CP1", 8).unwrap();
        let g = hilb(&m, &MetricLevelK::from_potential(&m, &small_potential(2, eps), k).unwrap()).unwrap();
        let a = fs(&m, &g).unwrap();
        let b = fs(&m, &g.scaled(c).unwrap()).unwrap();
        for (x, y) in a.psi.iter().zip(&b.psi) {
            prop_assert!((x - c - y).abs() < 1e-10);
        }
    }

    #[test]
    fn aubin_yau_is_convex_along_lines(
        la in 1usize..4, ea in -0.8f64..0.8,
        lb in 1usize..4, eb in -0.8f64..0.8,
        k in 2usize..8,
    ) {
        let m = build_model("CP1", 8).unwrap();
        let a = MetricLevelK::from_potential(&m, &small_potential(la, ea), k).unwrap();
        let b = MetricLevelK::from_potential(&m, &small_potential(lb, eb), k).unwrap();
        let nodes = PathSpec::linear().t_nodes();
        let at = |t: f64| aubin_yau_between(&m, &a, &a.lerp(&b, t), &nodes).unwrap();
        let h = 0.25;
        let values: Vec<f64> = (0..=4).map(|i| at(i as f64 * h)).collect();
        let scale = 1.0 + values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for w in values.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8 * scale, "{:?}", values);
        }
    }
}
