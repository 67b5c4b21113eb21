//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use kquant::asymptotics::{bergman_metric_rate, expansion_residual, fit_decay, FitOutcome};
use kquant::functionals::{
    aubin_yau, f_geodesic_from, f_prime_surrogate, k_energy, l_difference, lemma_conv1_check, lemma_step1_gap,
    lemma_step3_gap, GeodesicSpec, PathSpec,
};
use kquant::harness::{run, ExperimentConfig};
use kquant::numeric::binomial;
use kquant::quantization::{almost_balanced_defect, bergman_kernel, bergman_sequence, hilb, t_iterate, GramMatrix, MetricLevelK};
use kquant::{build_model, ManifoldModel, Potential};

const SEED: u64 = 20240611;

type Outcome = Result<String, String>;

fn cp1(r: usize) -> ManifoldModel {
    build_model("CP1", r).unwrap()
}

fn suite() -> Vec<Potential> {
    vec![
        Potential::constant(0.0),
        Potential::mobius(2.0).unwrap(),
        Potential::legendre(2, 0.075).unwrap(),
        Potential::legendre(3, 0.0375).unwrap(),
        Potential::legendre(1, 0.025).unwrap(),
        Potential::legendre(2, 0.05).unwrap(),
    ]
}

fn fit(points: &[(usize, f64)]) -> Result<FitOutcome, String> {
    fit_decay(points).map_err(|e| e.to_string())
}

fn random_generator(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GeodesicSpec::centered(0, v, vec![]).generator
}

/// Collects failed conditions; `finish` turns them into the criterion outcome.
#[derive(Default)]
struct Ledger {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Ledger {
    fn require(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(self.failures.join("; "))
        }
    }
}

fn closed_form_quantization() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let (mut gram_err, mut rho_err) = (0.0f64, 0.0f64);
    for k in 1..=40usize {
        let g = hilb(&m, &MetricLevelK::reference(&m, k)).unwrap();
        for i in 0..=k {
            for j in 0..=k {
                let want = if i == j { 1.0 / binomial(k, i) } else { 0.0 };
                gram_err = gram_err.max((g.matrix()[(i, j)].re - want).abs().max(g.matrix()[(i, j)].im.abs()));
            }
        }
        let rho = bergman_kernel(&m, &Potential::constant(0.0), k).unwrap();
        let want = (k + 1) as f64 / k as f64;
        rho_err = rho_err.max(rho.values.iter().map(|r| (r - want).abs()).fold(0.0, f64::max));
    }
    l.require(gram_err <= 1e-10, format!("CP1 Gram error {gram_err:.2e}"));
    l.require(rho_err <= 1e-10, format!("CP1 rho error {rho_err:.2e}"));
    let m2 = build_model("CP2_toric", 12).unwrap();
    let mut err2 = 0.0f64;
    for k in 1..=12usize {
        let rho = bergman_kernel(&m2, &Potential::constant(0.0), k).unwrap();
        let want = ((k + 1) * (k + 2)) as f64 / (k * k) as f64;
        err2 = err2.max(rho.values.iter().map(|r| (r - want).abs()).fold(0.0, f64::max));
    }
    l.require(err2 <= 1e-10, format!("CP2_toric rho error {err2:.2e}"));
    l.finish()
}

fn rate_potentials() -> [Potential; 2] {
    [Potential::legendre(2, 0.075).unwrap(), Potential::legendre(3, 0.0375).unwrap()]
}

fn bergman_expansion_rates() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let ks: Vec<usize> = (10..=40).collect();
    for phi in rate_potentials() {
        for (order, max_p) in [(0usize, -0.8), (1, -1.7)] {
            let pts = expansion_residual(&m, &phi, &ks, order).unwrap();
            match fit(&pts) {
                Ok(o) => l.require(
                    o.exponent() <= max_p && o.r2() >= 0.98,
                    format!("{} order {order}: p = {:.3} (<= {max_p}), r2 = {:.4}", phi.label(), o.exponent(), o.r2()),
                ),
                Err(e) => l.require(false, format!("{} order {order}: {e}", phi.label())),
            }
        }
    }
    l.finish()
}

fn bergman_metric_convergence() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let ks: Vec<usize> = (10..=40).collect();
    for phi in rate_potentials() {
        let rates = bergman_metric_rate(&m, &phi, &ks).unwrap();
        let pts: Vec<(usize, f64)> = rates.iter().map(|r| (r.k, r.potential_sup)).collect();
        match fit(&pts) {
            Ok(o) => l.require(o.exponent() <= -1.7, format!("{}: p = {:.3} (<= -1.7)", phi.label(), o.exponent())),
            Err(e) => l.require(false, format!("{}: {e}", phi.label())),
        }
    }
    l.finish()
}

fn aubin_yau_sandwich() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(12);
    let s = suite();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let draws: Vec<(usize, usize, usize, usize, f64)> = [4usize, 8, 12]
        .iter()
        .flat_map(|&k| {
            (0..20)
                .map(|_| (k, rng.gen_range(0..s.len()), rng.gen_range(0..s.len()), rng.gen_range(0..s.len()), rng.gen_range(-2.0..2.0)))
                .collect::<Vec<_>>()
        })
        .collect();
    let rows: Vec<[f64; 4]> = draws
        .par_iter()
        .map(|&(k, a, b, via, c)| {
            let ma = MetricLevelK::from_potential(&m, &s[a], k).unwrap();
            let mb = MetricLevelK::from_potential(&m, &s[b], k).unwrap();
            let (lo, hi) = lemma_conv1_check(&m, k, &ma, &mb).unwrap();
            let direct = aubin_yau(&m, k, &mb, &PathSpec::linear()).unwrap();
            let two_leg = aubin_yau(&m, k, &mb, &PathSpec::two_leg(s[via].clone())).unwrap();
            let base = aubin_yau(&m, k, &ma, &PathSpec::linear()).unwrap();
            let scaled = aubin_yau(&m, k, &ma.scaled(c), &PathSpec::linear()).unwrap();
            [lo, hi, (direct - two_leg).abs(), (scaled - base - c * k as f64).abs()]
        })
        .collect();
    let min_slack = rows.iter().map(|r| r[0].min(r[1])).fold(f64::INFINITY, f64::min);
    let path = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let scaling = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    l.require(min_slack >= -1e-8, format!("min slack {min_slack:.2e} over 60 pairs"));
    l.require(path <= 1e-8, format!("path dependence {path:.2e}"));
    l.require(scaling <= 1e-10, format!("scaling error {scaling:.2e}"));
    l.finish()
}

fn step1_gap() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(20);
    let s = suite();
    let jobs: Vec<(usize, usize)> = (0..s.len()).flat_map(|i| (4..=20).map(move |k| (i, k))).collect();
    let gaps: Vec<f64> = jobs.par_iter().map(|&(i, k)| lemma_step1_gap(&m, &s[i], k).unwrap()).collect();
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let at_zero = jobs
        .iter()
        .zip(&gaps)
        .filter(|((i, _), _)| *i == 0)
        .map(|(_, g)| g.abs())
        .fold(0.0, f64::max);
    l.require(min >= -1e-8, format!("min gap {min:.2e}"));
    l.require(at_zero <= 1e-10, format!("|gap| at phi = 0: {at_zero:.2e}"));
    l.finish()
}

fn geodesic_convexity() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(15);
    let s = suite();
    let grid = GeodesicSpec::uniform_grid(-1.0, 1.0, 21);
    let jobs: Vec<(usize, usize)> = (0..s.len()).flat_map(|i| [5usize, 10, 15].into_iter().map(move |k| (i, k))).collect();
    let rows: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let base = bergman_sequence(&m, &s[i], k).unwrap().gram_star;
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + (i * 100 + k) as u64);
            let mut min_d2 = f64::INFINITY;
            let mut max_stat = 0.0f64;
            for _ in 0..10 {
                let spec = GeodesicSpec::new(k, random_generator(&mut rng, k + 1), grid.clone()).unwrap();
                let p = f_geodesic_from(&m, &base, &spec).unwrap();
                min_d2 = min_d2.min(p.min_second_difference());
                if i == 0 {
                    max_stat = max_stat.max(p.fprime0_integral.abs());
                }
            }
            (min_d2, max_stat)
        })
        .collect();
    let min_d2 = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let stat = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    l.require(min_d2 >= -1e-6, format!("min second difference {min_d2:.2e}"));
    l.require(stat <= 1e-10, format!("f'(0) at phi = 0: {stat:.2e}"));

    // calibration case
    let m10 = cp1(10);
    let base = bergman_sequence(&m10, &Potential::legendre(2, 0.05).unwrap(), 8).unwrap().gram_star;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = GeodesicSpec::new(8, random_generator(&mut rng, 9), vec![]).unwrap();
    let integral = f_geodesic_from(&m10, &base, &spec).unwrap().fprime0_integral;
    let surrogate = f_prime_surrogate(&m10, &base, &spec).unwrap();
    let rel = (surrogate - integral).abs() / integral.abs();
    l.require(rel <= 1e-6, format!("surrogate vs integral relative {rel:.2e}"));
    l.finish()
}

fn step3_gap() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(20);
    let ks: Vec<usize> = (4..=20).collect();
    for phi in [Potential::constant(0.0), Potential::mobius(2.0).unwrap()] {
        let worst = ks
            .par_iter()
            .map(|&k| lemma_step3_gap(&m, &phi, k).unwrap().abs())
            .reduce(|| 0.0, f64::max);
        l.require(worst <= 1e-10, format!("{}: |gap| {worst:.2e}", phi.label()));
    }
    let phi = Potential::legendre(2, 0.05).unwrap();
    let pts: Vec<(usize, f64)> = ks.par_iter().map(|&k| (k, lemma_step3_gap(&m, &phi, k).unwrap())).collect();
    match fit(&pts) {
        Ok(o) => l.require(
            o.exponent() <= -1.0 && o.r2() >= 0.95,
            format!("{}: p = {:.3}, r2 = {:.4}", phi.label(), o.exponent(), o.r2()),
        ),
        Err(e) => l.require(false, e),
    }
    l.finish()
}

fn functional_approximation() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let phi = Potential::legendre(2, 0.075).unwrap();
    let nu = k_energy(&m, &phi, &PathSpec::linear()).unwrap();
    let ks: Vec<usize> = (8..=40).collect();
    let pts: Vec<(usize, f64)> = ks
        .par_iter()
        .map(|&k| (k, (2.0 * l_difference(&m, &phi, k).unwrap() - nu).abs()))
        .collect();
    match fit(&pts) {
        Ok(o) => l.require(
            (-1.4..=-0.6).contains(&o.exponent()) && o.r2() >= 0.95,
            format!("{}: p = {:.3} (in [-1.4, -0.6]), r2 = {:.4}", phi.label(), o.exponent(), o.r2()),
        ),
        Err(e) => l.require(false, e),
    }
    l.finish()
}

fn k_energy_lower_bound() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let mut targets = suite();
    targets.extend([0.5, 3.0].map(|lam| Potential::mobius(lam).unwrap()));
    let rows: Vec<(f64, f64)> = targets
        .par_iter()
        .enumerate()
        .map(|(i, phi)| {
            let linear = k_energy(&m, phi, &PathSpec::linear()).unwrap();
            let via = targets[(i + 2) % targets.len()].clone();
            let mut vals = vec![linear, k_energy(&m, phi, &PathSpec::two_leg(via)).unwrap()];
            if matches!(phi, Potential::Mobius { .. }) {
                vals.push(k_energy(&m, phi, &PathSpec::mobius()).unwrap());
            } else {
                vals.push(k_energy(&m, phi, &PathSpec::linear().refined()).unwrap());
            }
            let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min);
            (linear, spread)
        })
        .collect();
    let min_nu = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let mobius_nu = targets
        .iter()
        .zip(&rows)
        .filter(|(p, _)| matches!(p, Potential::Mobius { .. }))
        .map(|(_, r)| r.0.abs())
        .fold(0.0, f64::max);
    let spread = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    l.require(min_nu >= -1e-6, format!("min nu {min_nu:.2e}"));
    l.require(mobius_nu <= 1e-6, format!("|nu| on Mobius family {mobius_nu:.2e}"));
    l.require(spread <= 1e-8, format!("path spread {spread:.2e}"));
    l.finish()
}

fn almost_balanced() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(40);
    let ks: Vec<usize> = (10..=40).step_by(2).collect();
    for phi in [Potential::constant(0.0), Potential::mobius(2.0).unwrap()] {
        let worst = ks
            .par_iter()
            .map(|&k| almost_balanced_defect(&m, &phi, k).unwrap())
            .reduce(|| 0.0, f64::max);
        l.require(worst <= 1e-10, format!("{}: defect {worst:.2e}", phi.label()));
    }
    let phi = Potential::legendre(2, 0.05).unwrap();
    let pts: Vec<(usize, f64)> = ks.par_iter().map(|&k| (k, almost_balanced_defect(&m, &phi, k).unwrap())).collect();
    match fit(&pts) {
        Ok(o) => l.require(o.exponent() < 0.0, format!("{}: p = {:.3}", phi.label(), o.exponent())),
        Err(e) => l.require(false, e),
    }
    l.finish()
}

fn t_iteration() -> Outcome {
    let mut l = Ledger::default();
    let m = cp1(10);
    for k in [5usize, 10] {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + k as u64);
        let gen = random_generator(&mut rng, k + 1);
        let d: Vec<f64> = (0..=k).map(|a| (0.1 * gen[a]).exp() / binomial(k, a)).collect();
        let g0 = GramMatrix::from_diagonal(k, &d).unwrap();
        let it = t_iterate(&m, &g0, k, 50, 0.0).unwrap();
        let ratio = it.defect_history[50] / it.defect_history[0];
        let det = it.log_det_history.iter().map(|v| v.exp_m1().abs()).fold(0.0, f64::max);
        l.require(ratio < 0.1, format!("k = {k}: defect ratio {ratio:.2e}"));
        l.require(det <= 1e-10, format!("k = {k}: |det - 1| {det:.2e}"));
    }
    l.finish()
}

fn determinism() -> Outcome {
    let mut l = Ledger::default();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quick.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let mut c = ExperimentConfig::load(&root).unwrap();
        c.output_dir = d.path().to_path_buf();
        c.cache.policy = kquant::harness::CachePolicy::Off;
        c.experiments.clear();
        files.push(run(&c).unwrap().tables);
    }
    let mut names: Vec<String> = files[0].iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    names.push(kquant::harness::SUMMARY_FILE.into());
    for n in &names {
        let a = std::fs::read(dirs[0].path().join(n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(n)).unwrap();
        l.require(a == b, format!("{n} identical"));
    }
    l.finish()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form quantization", closed_form_quantization),
        ("Bergman expansion rates", bergman_expansion_rates),
        ("Bergman metric convergence rate", bergman_metric_convergence),
        ("Aubin-Yau sandwich, path independence, scaling", aubin_yau_sandwich),
        ("Bergman-metric step gap", step1_gap),
        ("geodesic convexity and derivative formula", geodesic_convexity),
        ("balanced-pair step gap", step3_gap),
        ("quantized functional approximates K-energy", functional_approximation),
        ("K-energy lower bound and path independence", k_energy_lower_bound),
        ("almost-balanced defect", almost_balanced),
        ("T-iteration contraction", t_iteration),
        ("determinism of reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
