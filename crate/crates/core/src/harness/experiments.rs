use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cache::GramCache;
use super::config::{Experiment, ExperimentConfig};
use super::table::{Cell, Table};
use super::{job_rng, Check, Relation, SummaryFit};
use crate::asymptotics::{fit_decay, metric_rate, FitOutcome};
use crate::error::{Error, Result};
use crate::functionals::{
    aubin_yau, f_geodesic_from, f_prime_surrogate, k_energy, lemma_conv1_check, lemma_step1_gap, lemma_step3_gap,
    theorem1_evaluate, ChainTolerances, GeodesicSpec, PathSpec, GROUP_ACTION_SIGN,
};
use crate::manifold::{ManifoldModel, ModelKind, Potential};
use crate::quantization::{
    balance_defect, bergman_sequence, fs_with, hilb, hilb_with, orthonormal_density, section_basis, t_iterate,
    GramMatrix, MetricLevelK,
};

pub(crate) struct Context<'a> {
    pub model: &'a ManifoldModel,
    pub config: &'a ExperimentConfig,
    pub cache: &'a GramCache,
    pub levels: &'a [usize],
    pub seed: u64,
}

#[derive(Default)]
pub(crate) struct Output {
    pub tables: Vec<(String, Table)>,
    pub checks: Vec<Check>,
    pub fits: Vec<SummaryFit>,
}

impl Output {
    fn fit(&mut self, e: Experiment, potential: &str, name: &str, points: &[(usize, f64)]) -> Result<FitOutcome> {
        let r = fit_decay(points);
        let (outcome, note) = match &r {
            Ok(o) => (Some(*o), None),
            Err(err) => (None, Some(err.to_string())),
        };
        self.fits.push(SummaryFit {
            experiment: e,
            potential: potential.to_string(),
            name: name.to_string(),
            outcome,
            note,
        });
        r
    }

    /// Exponent ≤ `max_p` (and r² ≥ `min_r2` when given) for a fitted series.
    fn decay_checks(
        &mut self,
        e: Experiment,
        potential: &str,
        name: &str,
        points: &[(usize, f64)],
        max_p: f64,
        min_r2: Option<f64>,
    ) {
        match self.fit(e, potential, name, points) {
            Ok(o) => {
                self.checks.push(Check::new(e, format!("{potential} {name} exponent"), o.exponent(), Relation::AtMost, max_p));
                if let Some(r2) = min_r2 {
                    self.checks.push(Check::new(e, format!("{potential} {name} r2"), o.r2(), Relation::AtLeast, r2));
                }
            }
            Err(err) => self.checks.push(Check::failed(
                e,
                format!("{potential} {name} exponent"),
                Relation::AtMost,
                max_p,
                err.to_string(),
            )),
        }
    }
}

pub(crate) fn run_one(e: Experiment, ctx: &Context) -> Result<Output> {
    match e {
        Experiment::Bergman => bergman(ctx),
        Experiment::Rates => rates(ctx),
        Experiment::Lemmas => lemmas(ctx),
        Experiment::Geodesic => geodesic(ctx),
        Experiment::Titerate => titerate(ctx),
        Experiment::Kenergy => kenergy(ctx),
        Experiment::Theorem1 => theorem1(ctx),
    }
}

fn jobs(ctx: &Context) -> Vec<(usize, usize)> {
    (0..ctx.config.suite.len())
        .flat_map(|i| ctx.levels.iter().map(move |&k| (i, k)))
        .collect()
}

fn sup(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

fn centered(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, amplitude: f64) -> Vec<f64> {
    (0..n).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect()
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let raw = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    raw.qr().q()
}

/// Level-k data shared by the bergman and rates experiments, built from the
/// (possibly cached) Hilb Gram of h_ref^k e^{-kφ}.
struct Level {
    rho: Vec<f64>,
    gram: GramMatrix,
    metric: MetricLevelK,
}

fn level(ctx: &Context, phi: &Potential, k: usize) -> Result<Level> {
    let model = ctx.model;
    let basis = section_basis(model, k)?;
    let gram = ctx.cache.cache_gram(model, phi, k)?;
    let metric = MetricLevelK::from_potential(model, phi, k)?;
    let q = orthonormal_density(model, &basis, &gram)?;
    let c = expected_rho(model, k);
    let rho = q.iter().zip(&metric.psi).map(|(q, p)| c * q * (-p).exp()).collect();
    Ok(Level { rho, gram, metric })
}

/// N_k n!/(V k^n), the value of ρ_k at a balanced metric.
fn expected_rho(model: &ManifoldModel, k: usize) -> f64 {
    let n = model.dim();
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    model.kind().section_count(k) as f64 * fact / (model.volume() * (k as f64).powi(n as i32))
}

fn bergman(ctx: &Context) -> Result<Output> {
    let e = Experiment::Bergman;
    let model = ctx.model;
    let suite = &ctx.config.suite;
    let tol = &ctx.config.tolerances;
    let rows = jobs(ctx)
        .par_iter()
        .map(|&(i, k)| -> Result<[f64; 4]> {
            let phi = &suite[i];
            let lv = level(ctx, phi, k)?;
            let ratio = model.ma_ratio(phi)?;
            let weighted: Vec<f64> = lv.rho.iter().zip(&ratio.values).map(|(r, f)| r * f).collect();
            let mass = model.integrate(&weighted) / model.volume();
            let basis = section_basis(model, k)?;
            let h_star = fs_with(model, &basis, &lv.gram)?;
            let gram_star = hilb_with(model, &basis, &h_star)?;
            let defect = balance_defect(model, &basis, &h_star, &gram_star)?;
            let lo = lv.rho.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = lv.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok([lo, hi, mass, defect])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&["potential", "k", "n_sections", "rho_expected", "rho_min", "rho_max", "mass", "defect"]);
    for (&(i, k), r) in jobs(ctx).iter().zip(&rows) {
        let label = suite[i].label();
        let want = expected_rho(model, k);
        t.push(vec![
            label.as_str().into(),
            k.into(),
            model.kind().section_count(k).into(),
            want.into(),
            r[0].into(),
            r[1].into(),
            r[2].into(),
            r[3].into(),
        ]);
        out.checks.push(Check::new(
            e,
            format!("{label} k={k} mass"),
            (r[2] - want) / want,
            Relation::AbsAtMost,
            tol.identity,
        ));
        if suite[i].is_csck() {
            // automorphism pullbacks have non-polynomial integrands
            let t = if matches!(suite[i], Potential::Constant { .. }) { tol.identity } else { tol.quadrature };
            let dev = (r[0] - want).abs().max((r[1] - want).abs()) / want;
            out.checks.push(Check::new(e, format!("{label} k={k} rho constant"), dev, Relation::AtMost, t));
            out.checks.push(Check::new(e, format!("{label} k={k} defect"), r[3], Relation::AtMost, t));
        }
    }
    for (i, phi) in suite.iter().enumerate() {
        if phi.is_csck() {
            continue;
        }
        let label = phi.label();
        let pts: Vec<(usize, f64)> = ctx.levels.iter().zip(&rows[i * ctx.levels.len()..]).map(|(&k, r)| (k, r[3])).collect();
        match out.fit(e, &label, "defect", &pts) {
            Ok(o) => out.checks.push(Check::new(e, format!("{label} defect exponent"), o.exponent(), Relation::Below, 0.0)),
            Err(err) => out.checks.push(Check::failed(e, format!("{label} defect exponent"), Relation::Below, 0.0, err.to_string())),
        }
    }
    out.tables.push(("bergman.csv".into(), t));
    Ok(out)
}

fn rates(ctx: &Context) -> Result<Output> {
    let e = Experiment::Rates;
    let model = ctx.model;
    let suite = &ctx.config.suite;
    let tol = &ctx.config.tolerances;
    let rows = jobs(ctx)
        .par_iter()
        .map(|&(i, k)| -> Result<[f64; 4]> {
            let phi = &suite[i];
            let sp = phi.sample(model)?;
            let lv = level(ctx, phi, k)?;
            let s = model.scalar_curvature_sampled(&sp)?;
            let kf = k as f64;
            let r0 = sup(lv.rho.iter().map(|r| (r - 1.0).abs()));
            let r1 = sup(lv.rho.iter().zip(&s).map(|(r, s)| (r - 1.0 - s / (2.0 * kf)).abs()));
            let basis = section_basis(model, k)?;
            let hk = fs_with(model, &basis, &lv.gram)?;
            let mr = metric_rate(model, &sp, &hk)?;
            debug_assert_eq!(lv.metric.k, k);
            Ok([r0, r1, mr.potential_sup, mr.form_sup])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&["potential", "k", "residual0", "residual1", "potential_sup", "form_sup"]);
    for (&(i, k), r) in jobs(ctx).iter().zip(&rows) {
        let mut row: Vec<Cell> = vec![suite[i].label().into(), k.into()];
        row.extend(r.iter().map(|v| Cell::from(*v)));
        t.push(row);
    }
    let n = ctx.levels.len();
    for (i, phi) in suite.iter().enumerate() {
        let label = phi.label();
        let series = |j: usize| -> Vec<(usize, f64)> {
            ctx.levels.iter().zip(&rows[i * n..(i + 1) * n]).map(|(&k, r)| (k, r[j])).collect()
        };
        if phi.is_csck() {
            // ρ_k is exactly (k+1)/k and h_k = h: only quadrature error remains
            for (j, name) in [(1, "residual1"), (2, "potential_sup"), (3, "form_sup")] {
                let worst = sup(series(j).into_iter().map(|p| p.1));
                out.checks.push(Check::new(e, format!("{label} {name}"), worst, Relation::AtMost, tol.quadrature));
            }
            continue;
        }
        out.decay_checks(e, &label, "residual0", &series(0), tol.rho_exponent, Some(tol.rates_r2));
        out.decay_checks(e, &label, "residual1", &series(1), tol.rho_first_order_exponent, Some(tol.rates_r2));
        out.decay_checks(e, &label, "potential_sup", &series(2), tol.metric_exponent, None);
        let _ = out.fit(e, &label, "form_sup", &series(3));
    }
    out.tables.push(("rates.csv".into(), t));
    Ok(out)
}

fn lemmas(ctx: &Context) -> Result<Output> {
    let e = Experiment::Lemmas;
    let model = ctx.model;
    let suite = &ctx.config.suite;
    let tol = &ctx.config.tolerances;
    let rows = jobs(ctx)
        .par_iter()
        .map(|&(i, k)| Ok((lemma_step1_gap(model, &suite[i], k)?, lemma_step3_gap(model, &suite[i], k)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&["potential", "k", "step1_gap", "step3_gap"]);
    for (&(i, k), &(s1, s3)) in jobs(ctx).iter().zip(&rows) {
        let phi = &suite[i];
        let label = phi.label();
        t.push(vec![label.as_str().into(), k.into(), s1.into(), s3.into()]);
        out.checks.push(Check::new(e, format!("{label} k={k} step1 gap"), s1, Relation::AtLeast, -tol.quadrature));
        if matches!(phi, Potential::Constant { .. }) {
            out.checks.push(Check::new(e, format!("{label} k={k} step1 gap zero"), s1, Relation::AbsAtMost, tol.identity));
        }
        if phi.is_csck() {
            out.checks.push(Check::new(e, format!("{label} k={k} step3 gap"), s3, Relation::AbsAtMost, tol.identity));
        }
    }
    let n = ctx.levels.len();
    for (i, phi) in suite.iter().enumerate() {
        if phi.is_csck() {
            continue;
        }
        let pts: Vec<(usize, f64)> = ctx.levels.iter().zip(&rows[i * n..(i + 1) * n]).map(|(&k, r)| (k, r.1)).collect();
        out.decay_checks(e, &phi.label(), "step3_gap", &pts, tol.step3_exponent, Some(tol.step3_r2));
    }
    out.tables.push(("lemmas.csv".into(), t));

    // I_k sandwich, path independence and scaling on random suite pairs
    let pairs = ctx.config.lemmas.pairs;
    let draws: Vec<(usize, usize, usize, usize, f64)> = ctx
        .levels
        .iter()
        .flat_map(|&k| {
            let mut rng = job_rng(ctx.seed, &format!("lemmas/conv1/{k}"));
            (0..pairs)
                .map(|p| {
                    let a = rng.gen_range(0..suite.len());
                    let b = rng.gen_range(0..suite.len());
                    let c = rng.gen_range(-2.0..2.0);
                    (k, p, a, b, c)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let conv = draws
        .par_iter()
        .map(|&(k, _, a, b, c)| -> Result<[f64; 4]> {
            let ma = MetricLevelK::from_potential(model, &suite[a], k)?;
            let mb = MetricLevelK::from_potential(model, &suite[b], k)?;
            let (lower, upper) = lemma_conv1_check(model, k, &ma, &mb)?;
            let direct = aubin_yau(model, k, &mb, &PathSpec::linear())?;
            let via = aubin_yau(model, k, &mb, &PathSpec::two_leg(suite[a].clone()))?;
            let base = aubin_yau(model, k, &ma, &PathSpec::linear())?;
            let scaled = aubin_yau(model, k, &ma.scaled(c), &PathSpec::linear())?;
            let degree = model.volume() * (k as f64).powi(model.dim() as i32);
            Ok([lower, upper, (direct - via).abs(), (scaled - base - c * degree).abs()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["k", "pair", "a", "b", "lower_slack", "upper_slack", "path_gap", "scaling_error"]);
    for (&(k, p, a, b, _), r) in draws.iter().zip(&conv) {
        t.push(vec![
            k.into(),
            p.into(),
            suite[a].label().into(),
            suite[b].label().into(),
            r[0].into(),
            r[1].into(),
            r[2].into(),
            r[3].into(),
        ]);
    }
    if !conv.is_empty() {
        let min_slack = conv.iter().map(|r| r[0].min(r[1])).fold(f64::INFINITY, f64::min);
        out.checks.push(Check::new(e, "conv1 min slack", min_slack, Relation::AtLeast, -tol.quadrature));
        out.checks.push(Check::new(e, "I_k path independence", sup(conv.iter().map(|r| r[2])), Relation::AtMost, tol.quadrature));
        out.checks.push(Check::new(e, "I_k scaling law", sup(conv.iter().map(|r| r[3])), Relation::AtMost, tol.identity));
    }
    out.tables.push(("lemmas_conv1.csv".into(), t));
    Ok(out)
}

struct GeoRow {
    min_second_difference: f64,
    integral: f64,
    surrogate: f64,
}

fn geodesic(ctx: &Context) -> Result<Output> {
    let e = Experiment::Geodesic;
    let model = ctx.model;
    let suite = &ctx.config.suite;
    let tol = &ctx.config.tolerances;
    let opts = &ctx.config.geodesic;
    let grid = GeodesicSpec::uniform_grid(-opts.s_max, opts.s_max, opts.s_points);
    let rows = jobs(ctx)
        .par_iter()
        .map(|&(i, k)| -> Result<Vec<GeoRow>> {
            let base = bergman_sequence(model, &suite[i], k)?.gram_star;
            let mut rng = job_rng(ctx.seed, &format!("geodesic/{i}/{k}"));
            (0..opts.samples)
                .map(|_| {
                    let gen = centered(uniform_vec(&mut rng, base.dim(), opts.amplitude));
                    let spec = GeodesicSpec::new(k, gen, grid.clone())?;
                    let profile = f_geodesic_from(model, &base, &spec)?;
                    Ok(GeoRow {
                        min_second_difference: profile.min_second_difference(),
                        integral: profile.fprime0_integral,
                        surrogate: f_prime_surrogate(model, &base, &spec)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&[
        "potential",
        "k",
        "sample",
        "min_second_difference",
        "fprime0_integral",
        "fprime0_surrogate",
        "relative_error",
    ]);
    let mut min_d2 = f64::INFINITY;
    for (&(i, k), samples) in jobs(ctx).iter().zip(&rows) {
        let phi = &suite[i];
        let label = phi.label();
        for (j, r) in samples.iter().enumerate() {
            let rel = (r.surrogate - r.integral).abs() / r.integral.abs();
            t.push(vec![
                label.as_str().into(),
                k.into(),
                j.into(),
                r.min_second_difference.into(),
                r.integral.into(),
                r.surrogate.into(),
                rel.into(),
            ]);
            min_d2 = min_d2.min(r.min_second_difference);
            if phi.is_csck() {
                out.checks.push(Check::new(
                    e,
                    format!("{label} k={k} sample {j} stationarity"),
                    r.integral,
                    Relation::AbsAtMost,
                    tol.identity,
                ));
            } else {
                out.checks.push(Check::new(
                    e,
                    format!("{label} k={k} sample {j} surrogate"),
                    rel,
                    Relation::AtMost,
                    tol.surrogate_relative,
                ));
            }
        }
    }
    out.checks.push(
        Check::new(e, "min second difference", min_d2, Relation::AtLeast, -tol.asymptotic)
            .with_detail(Some(format!("group action sign {GROUP_ACTION_SIGN}"))),
    );
    out.tables.push(("geodesic.csv".into(), t));
    Ok(out)
}

fn titerate(ctx: &Context) -> Result<Output> {
    let e = Experiment::Titerate;
    let model = ctx.model;
    let tol = &ctx.config.tolerances;
    let opts = &ctx.config.titerate;
    let runs = ctx
        .levels
        .par_iter()
        .map(|&k| -> Result<_> {
            let balanced = hilb(model, &MetricLevelK::reference(model, k))?;
            let n = balanced.dim();
            let mut rng = job_rng(ctx.seed, &format!("titerate/{k}"));
            let gen = centered(uniform_vec(&mut rng, n, 1.0));
            let mut frame = balanced.lower();
            if model.kind() == ModelKind::Cp1 {
                frame *= random_unitary(&mut rng, n);
            }
            for (j, g) in gen.iter().enumerate() {
                frame.column_mut(j).scale_mut((0.5 * GROUP_ACTION_SIGN * opts.perturbation * g).exp());
            }
            let g0 = GramMatrix::new(k, &frame * frame.adjoint())?;
            Ok(t_iterate(model, &g0, k, opts.max_iter, opts.tol))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&["k", "iteration", "defect", "log_det"]);
    for (&k, r) in ctx.levels.iter().zip(runs) {
        match r {
            Ok(it) => {
                for (j, (d, l)) in it.defect_history.iter().zip(&it.log_det_history).enumerate() {
                    t.push(vec![k.into(), j.into(), (*d).into(), (*l).into()]);
                }
                let first = it.defect_history[0];
                let last = *it.defect_history.last().expect("non-empty history");
                out.checks.push(Check::new(
                    e,
                    format!("k={k} defect reduction"),
                    last / first,
                    Relation::Below,
                    tol.titerate_reduction,
                ));
                let det_err = sup(it.log_det_history.iter().map(|l| l.exp_m1().abs()));
                out.checks.push(Check::new(e, format!("k={k} det"), det_err, Relation::AtMost, tol.identity));
            }
            Err(err @ Error::IterationFailure { .. }) => {
                out.checks.push(Check::failed(
                    e,
                    format!("k={k} iterates positive definite"),
                    Relation::AtMost,
                    0.0,
                    err.to_string(),
                ));
            }
            Err(err) => return Err(err),
        }
    }
    out.tables.push(("titerate.csv".into(), t));
    Ok(out)
}

fn kenergy(ctx: &Context) -> Result<Output> {
    let e = Experiment::Kenergy;
    let model = ctx.model;
    let suite = &ctx.config.suite;
    let tol = &ctx.config.tolerances;
    let rows = (0..suite.len())
        .into_par_iter()
        .map(|i| -> Result<[Option<f64>; 4]> {
            let phi = &suite[i];
            let via = if suite.len() > 1 {
                suite[(i + 1) % suite.len()].clone()
            } else {
                Potential::constant(1.0)
            };
            let linear = k_energy(model, phi, &PathSpec::linear())?;
            let two_leg = k_energy(model, phi, &PathSpec::two_leg(via))?;
            let family = match phi {
                Potential::Mobius { .. } => Some(k_energy(model, phi, &PathSpec::mobius())?),
                _ => None,
            };
            let fine = k_energy(model, phi, &PathSpec::linear().refined().refined())?;
            Ok([Some(linear), Some(two_leg), family, Some(fine)])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Output::default();
    let mut t = Table::new(&["potential", "linear", "two_leg", "family", "fine", "path_spread"]);
    for (phi, r) in suite.iter().zip(&rows) {
        let label = phi.label();
        let vals: Vec<f64> = r.iter().flatten().copied().collect();
        let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut row: Vec<Cell> = vec![label.as_str().into()];
        row.extend(r.iter().map(|v| Cell::from(*v)));
        row.push(spread.into());
        t.push(row);
        let nu = r[0].expect("linear path");
        out.checks.push(Check::new(e, format!("{label} nu"), nu, Relation::AtLeast, -tol.asymptotic));
        if phi.is_csck() {
            out.checks.push(Check::new(e, format!("{label} nu zero"), nu, Relation::AbsAtMost, tol.asymptotic));
        }
        out.checks.push(Check::new(e, format!("{label} path independence"), spread, Relation::AtMost, tol.quadrature));
    }
    out.tables.push(("kenergy.csv".into(), t));
    Ok(out)
}

fn theorem1(ctx: &Context) -> Result<Output> {
    let e = Experiment::Theorem1;
    let tol = &ctx.config.tolerances;
    let chain = ChainTolerances {
        nu_floor: tol.asymptotic,
        csck_nu: tol.asymptotic,
        inequality: tol.quadrature,
    };
    let report = theorem1_evaluate(ctx.model, &ctx.config.suite, ctx.levels, &chain)?;
    let mut out = Output::default();
    let mut t = Table::new(&["potential", "k", "name", "value"]);
    for r in &report.entries {
        t.push(vec![
            r.potential.as_str().into(),
            r.k.map_or(Cell::Empty, Cell::from),
            r.name.as_str().into(),
            r.value.into(),
        ]);
    }
    out.checks.push(
        Check::new(e, "inequality chain violations", report.violations.len() as f64, Relation::AtMost, 0.0)
            .with_detail((!report.violations.is_empty()).then(|| report.violations.join("; "))),
    );
    for f in &report.fits {
        out.fits.push(SummaryFit {
            experiment: e,
            potential: f.potential.clone(),
            name: f.name.clone(),
            outcome: f.outcome,
            note: f.note.clone(),
        });
    }
    for phi in ctx.config.suite.iter().filter(|p| !p.is_csck()) {
        let label = phi.label();
        let name = format!("{label} approx_error exponent");
        match report.fit(&label, "approx_error").and_then(|f| f.outcome) {
            Some(o) => {
                out.checks.push(Check::new(e, name.clone(), o.exponent(), Relation::AtLeast, tol.approx_exponent_min));
                out.checks.push(Check::new(e, name, o.exponent(), Relation::AtMost, tol.approx_exponent_max));
                out.checks.push(Check::new(e, format!("{label} approx_error r2"), o.r2(), Relation::AtLeast, tol.approx_r2));
            }
            None => out.checks.push(Check::failed(
                e,
                name,
                Relation::AtMost,
                tol.approx_exponent_max,
                "no fit".into(),
            )),
        }
    }
    out.tables.push(("theorem1.csv".into(), t));
    Ok(out)
}
