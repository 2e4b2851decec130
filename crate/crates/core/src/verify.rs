//! Named invariant checks over randomly drawn configurations.
//!
//! Every check is deterministic given the seed. A failing check reports the
//! worst observed error and the case that produced it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corrstruct::{a_to_b, b_to_a, CorrelationStructure, MixtureComponent, ServiceDistribution, TimeGrid};
use crate::error::Result;
use crate::fidi::GcidProcess;
use crate::levy::{LevyExponent, LevyMeasure, MarkDistribution, PowerDensity};
use crate::onoff::{
    algebraic_identity_check, appendix_bounds_check, espc_weights, remainder_bound_check, OnOffArraySpec,
    OnOffSource, TripleBounds,
};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random configurations per algebraic check.
    pub cases: usize,
    /// Monte-Carlo replications for the increment-moment bounds.
    pub mc_reps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            cases: 100,
            mc_reps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Tracks the largest error and the case that caused it.
struct Worst {
    value: f64,
    detail: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            detail: String::new(),
        }
    }

    fn update(&mut self, err: f64, detail: impl FnOnce() -> String) {
        // NaN counts as worst so it cannot hide.
        if err.is_nan() || err > self.value || self.detail.is_empty() {
            self.value = if err.is_nan() { f64::INFINITY } else { err };
            self.detail = detail();
        }
    }

    fn finish(self, name: &str, cases: usize, tolerance: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            cases,
            worst: self.value,
            tolerance,
            pass: self.value <= tolerance,
            detail: self.detail,
        }
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub(crate) fn random_grid<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> TimeGrid {
    let n = rng.random_range(min_n..=max_n);
    let mut t = vec![uniform(rng, -5.0, 5.0)];
    for _ in 1..n {
        let g = uniform(rng, 0.01, 3.0);
        t.push(t[t.len() - 1] + g);
    }
    TimeGrid::new(t).expect("increasing by construction")
}

fn random_service<R: Rng>(rng: &mut R) -> ServiceDistribution {
    match rng.random_range(0..4) {
        0 => ServiceDistribution::Exponential {
            rate: uniform(rng, 0.1, 5.0),
        },
        1 => ServiceDistribution::Deterministic {
            value: uniform(rng, 0.1, 3.0),
        },
        2 => ServiceDistribution::ParetoTruncated {
            shape: uniform(rng, 2.1, 6.0),
            scale: uniform(rng, 0.1, 2.0),
        },
        _ => {
            let k = rng.random_range(1..4);
            let values: Vec<f64> = (0..k).map(|_| uniform(rng, 0.05, 3.0)).collect();
            let w: Vec<f64> = (0..k).map(|_| uniform(rng, 0.1, 1.0)).collect();
            let total: f64 = w.iter().sum();
            ServiceDistribution::Discrete {
                values,
                probs: w.iter().map(|p| p / total).collect(),
            }
        }
    }
}

fn random_leaf<R: Rng>(rng: &mut R) -> CorrelationStructure {
    match rng.random_range(0..3) {
        0 => CorrelationStructure::Exponential {
            rate: uniform(rng, 0.1, 5.0),
        },
        1 => CorrelationStructure::Power {
            alpha: uniform(rng, 0.05, 1.0),
        },
        _ => CorrelationStructure::IntegratedTail {
            service: random_service(rng),
        },
    }
}

pub(crate) fn random_structure<R: Rng>(rng: &mut R) -> CorrelationStructure {
    if rng.random_range(0..4) == 0 {
        let c = uniform(rng, 0.01, 10.0);
        CorrelationStructure::Mixture {
            components: vec![
                MixtureComponent {
                    weight: 1.0 / (1.0 + c),
                    structure: random_leaf(rng),
                },
                MixtureComponent {
                    weight: c / (1.0 + c),
                    structure: random_leaf(rng),
                },
            ],
        }
    } else {
        random_leaf(rng)
    }
}

pub(crate) fn random_law<R: Rng>(rng: &mut R) -> LevyExponent {
    match rng.random_range(0..5) {
        0 => LevyExponent::Gaussian {
            drift: uniform(rng, -2.0, 2.0),
            variance: uniform(rng, 0.0, 3.0),
        },
        1 => LevyExponent::Poisson {
            rate: uniform(rng, 0.1, 5.0),
        },
        2 => LevyExponent::CompoundPoisson {
            rate: uniform(rng, 0.1, 3.0),
            mark: MarkDistribution::Normal {
                mean: uniform(rng, -1.0, 2.0),
                variance: uniform(rng, 0.1, 2.0),
            },
        },
        3 => LevyExponent::Gamma,
        _ => LevyExponent::SpectrallyPositive {
            measure: LevyMeasure::Density(PowerDensity::log_uniform(uniform(rng, 0.1, 0.9))),
        },
    }
}

fn random_theta<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| uniform(rng, -3.0, 3.0)).collect()
}

fn consistency(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let p = GcidProcess::new(random_law(rng), random_structure(rng))?;
        let grid = random_grid(rng, 2, 6);
        let theta = random_theta(rng, grid.len());
        let k = rng.random_range(0..grid.len());
        let (lhs, rhs) = p.consistency_check(&grid, &theta, k)?;
        worst.update(rel_err(lhs, rhs), || {
            format!("case {case}: law {:?}, structure {:?}, grid {:?}, k={k}: {lhs} vs {rhs}", p.law, p.structure, grid.epochs())
        });
    }
    Ok(worst.finish("consistency", opts.cases, 1e-10))
}

fn drift_identity(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let s = random_structure(rng);
        let grid = random_grid(rng, 1, 6);
        let th = random_theta(rng, grid.len());
        let w = s.weights(&grid)?;
        let lhs: f64 = w.iter().map(|(i, j, v)| th[i..=j].iter().sum::<f64>() * v).sum();
        let rhs: f64 = th.iter().sum();
        let err = (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()));
        worst.update(err, || format!("case {case}: {s:?} on {:?}: {lhs} vs {rhs}", grid.epochs()));
    }
    Ok(worst.finish("drift-identity", opts.cases, 1e-10))
}

fn quadratic_identity(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        // Alternate between weights from a structure and an arbitrary symmetric b.
        let (w, b) = if case % 2 == 0 {
            let grid = random_grid(rng, 1, 6);
            let w = random_structure(rng).weights(&grid)?;
            let b = a_to_b(&w);
            (w, b)
        } else {
            let n = rng.random_range(1..=6);
            let mut b = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = uniform(rng, -2.0, 2.0);
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
            }
            (b_to_a(&b)?, b)
        };
        let n = w.n();
        let th = random_theta(rng, n);
        let lhs: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| b[(i, j)] * th[i] * th[j])
            .sum();
        let rhs: f64 = w
            .iter()
            .map(|(i, j, v)| {
                let s: f64 = th[i..=j].iter().sum();
                s * s * v
            })
            .sum();
        let err = (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()));
        worst.update(err, || format!("case {case}: n={n}: {lhs} vs {rhs}"));
    }
    Ok(worst.finish("quadratic-identity", opts.cases, 1e-10))
}

fn weight_round_trip(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let grid = random_grid(rng, 1, 6);
        let s = random_structure(rng);
        let w = s.weights(&grid)?;
        let back = b_to_a(&a_to_b(&w))?;
        worst.update(back.max_abs_diff(&w), || format!("case {case}: {s:?} on {:?}", grid.epochs()));
    }
    Ok(worst.finish("weight-round-trip", opts.cases, 1e-10))
}

fn espc_equivalence(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let mu = uniform(rng, 0.1, 5.0);
        let grid = random_grid(rng, 1, 6);
        let a = espc_weights(mu, &grid)?;
        let b = CorrelationStructure::exponential(mu)?.weights(&grid)?;
        worst.update(a.max_abs_diff(&b), || format!("case {case}: mu={mu} on {:?}", grid.epochs()));
    }
    Ok(worst.finish("espc-weight-equivalence", opts.cases, 1e-12))
}

fn gaussian_reduction(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let (drift, var) = (uniform(rng, -1.0, 1.0), uniform(rng, 0.1, 3.0));
        let s = random_structure(rng);
        let grid = random_grid(rng, 1, 6);
        let th = random_theta(rng, grid.len());
        let p = GcidProcess::new(LevyExponent::Gaussian { drift, variance: var }, s.clone())?;
        let got = p.log_cf(&grid, &th)?.exp();
        let t = grid.epochs();
        let mut quad = 0.0;
        for i in 0..t.len() {
            for j in 0..t.len() {
                quad += th[i] * th[j] * var * (1.0 - s.eval((t[j] - t[i]).abs()));
            }
        }
        let want = Complex64::new(-0.5 * quad, drift * th.iter().sum::<f64>()).exp();
        worst.update((got - want).norm(), || format!("case {case}: {s:?} on {:?}", grid.epochs()));
    }
    Ok(worst.finish("gaussian-reduction", opts.cases, 1e-12))
}

fn algebraic_identity(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    for case in 0..opts.cases {
        let grid = random_grid(rng, 2, 6);
        let th = random_theta(rng, grid.len());
        let (alpha, r) = (uniform(rng, 0.05, 3.0), uniform(rng, 0.0, 2.0));
        let (lhs, rhs) = algebraic_identity_check(grid.len(), &th, &grid, alpha, r)?;
        worst.update(rel_err(lhs, rhs), || {
            format!("case {case}: alpha={alpha}, r={r}, grid {:?}: {lhs} vs {rhs}", grid.epochs())
        });
    }
    Ok(worst.finish("algebraic-identity", opts.cases, 1e-10))
}

/// The three increment-moment inequalities on random parameters, in closed form,
/// plus Monte-Carlo confirmation at three fixed triples.
fn appendix_bounds(opts: &VerifyOptions, rng: &mut SeededRng) -> Result<CheckResult> {
    let mut worst = Worst::new();
    let mut failures = Vec::new();
    for case in 0..opts.cases {
        let src = OnOffSource::new(uniform(rng, 0.01, 5.0), uniform(rng, 0.01, 5.0), uniform(rng, 0.1, 3.0))?;
        let u = uniform(rng, -2.0, 2.0);
        let t = u + uniform(rng, 1e-3, 4.0);
        let s = t + uniform(rng, 1e-3, 4.0);
        let tb = TripleBounds::closed_form(&src, u, t, s)?;
        for k in 0..3 {
            let ratio = tb.closed[k].abs() / tb.bound[k];
            worst.update(ratio, || format!("case {case}: {src:?} ({u}, {t}, {s}) inequality {k}"));
        }
        failures.extend(tb.violations);
    }
    let mut cases = opts.cases;
    if opts.mc_reps > 0 {
        let src = OnOffSource::new(0.5, 1.5, 2.0)?;
        let rep = appendix_bounds_check(&src, &[(0.0, 0.3, 1.0), (0.0, 1.0, 1.2), (0.0, 1.0, 2.0)], opts.mc_reps, rng.random())?;
        failures.extend(rep.violations().cloned());
        cases += rep.triples.len();
    }
    // The worst ratio is at most one when every inequality holds.
    let mut out = worst.finish("appendix-bounds", cases, 1.0);
    if !failures.is_empty() {
        out.pass = false;
        out.detail = failures.join("; ");
    }
    Ok(out)
}

fn remainder_scaling(_opts: &VerifyOptions, _rng: &mut SeededRng) -> Result<CheckResult> {
    let row = OnOffArraySpec::power_example(0.5, 0.5, 1.0)?.row(100)?;
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.0])?;
    let rep = remainder_bound_check(&row, &grid, &[1.0, 0.5, -0.7])?;
    let dev = (rep.slope_l_lambda - 2.0)
        .abs()
        .max((rep.slope_r_lambda - 2.0).abs())
        .max((rep.slope_r_r - 1.0).abs());
    Ok(CheckResult {
        name: "remainder-scaling".into(),
        cases: 3,
        worst: dev,
        tolerance: 0.1,
        pass: dev <= 0.1,
        detail: format!(
            "slopes: L in lambda {:.4}, R in lambda {:.4}, R in r {:.4}; fitted M {:.4}, K {:.4}",
            rep.slope_l_lambda, rep.slope_r_lambda, rep.slope_r_r, rep.fitted_m, rep.fitted_k
        ),
    })
}

type Check = fn(&VerifyOptions, &mut SeededRng) -> Result<CheckResult>;

const CHECKS: [(&str, Check); 9] = [
    ("consistency", consistency),
    ("drift-identity", drift_identity),
    ("quadratic-identity", quadratic_identity),
    ("weight-round-trip", weight_round_trip),
    ("espc-weight-equivalence", espc_equivalence),
    ("gaussian-reduction", gaussian_reduction),
    ("algebraic-identity", algebraic_identity),
    ("appendix-bounds", appendix_bounds),
    ("remainder-scaling", remainder_scaling),
];

/// Names of all checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check. Check `i` draws from `SeededRng::new(seed).split(i)`.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let root = SeededRng::new(opts.seed);
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (_, f))| f(opts, &mut root.split(i as u64)))
        .collect::<Result<_>>()?;
    Ok(VerifyReport { options: *opts, checks })
}
