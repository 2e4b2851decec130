//! Limit laws of ON/OFF superpositions and the assumptions behind them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::array::OnOffArraySpec;
use crate::corrstruct::{CorrelationStructure, TimeGrid, WeightMatrix};
use crate::error::{ensure_positive, invalid, Result};
use crate::fidi::GcidProcess;
use crate::levy::{LevyExponent, LevyMeasure};
use crate::rng::SeededRng;
use crate::stats::{cf_distance, empirical_cf, ThetaGrid};

/// Marginal limit law `ψ(θ) = μ^{-1} ∫ (e^{iθx} - 1) ν(dx)`.
pub fn limit_exponent(nu: &LevyMeasure, mu: f64) -> Result<LevyExponent> {
    ensure_positive("mu", mu)?;
    LevyExponent::spectrally_positive(nu.scaled(1.0 / mu))
}

/// ESPC weights in product form:
/// `(1 - e^{-μ(t_i - t_{i-1})}) e^{-μ(t_j - t_i)} (1 - e^{-μ(t_{j+1} - t_j)})`,
/// with the outer factors equal to one at the ends of the grid.
pub fn espc_weights(mu: f64, grid: &TimeGrid) -> Result<WeightMatrix> {
    ensure_positive("mu", mu)?;
    Ok(product_weights(mu, grid))
}

/// Product-form weights for any real rate.
pub(crate) fn product_weights(mu: f64, grid: &TimeGrid) -> WeightMatrix {
    let t = grid.epochs();
    let n = t.len();
    let mut w = WeightMatrix::zeros(n);
    for i in 0..n {
        let left = if i == 0 { 1.0 } else { -(-mu * (t[i] - t[i - 1])).exp_m1() };
        for j in i..n {
            let right = if j == n - 1 { 1.0 } else { -(-mu * (t[j + 1] - t[j])).exp_m1() };
            w.set(i, j, left * (-mu * (t[j] - t[i])).exp() * right);
        }
    }
    w
}

/// Joint log-CF of the ESPC limit: the GCID process with law `limit_exponent(ν, μ)`
/// and exponential correlation at rate `μ`.
pub fn espc_log_cf(nu: &LevyMeasure, mu: f64, grid: &TimeGrid, theta: &[f64]) -> Result<Complex64> {
    espc_process(nu, mu)?.log_cf(grid, theta)
}

fn espc_process(nu: &LevyMeasure, mu: f64) -> Result<GcidProcess> {
    GcidProcess::new(limit_exponent(nu, mu)?, CorrelationStructure::exponential(mu)?)
}

/// Probe points and tolerances for [`check_assumptions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSettings {
    pub moment_orders: Vec<u32>,
    pub moment_rel_tol: f64,
    pub tail_rel_tol: f64,
    pub small_jump_rel_tol: f64,
    /// θ-grid `[-theta_max, theta_max]` for the CF-exponent and u.a.n. checks.
    pub theta_max: f64,
    pub theta_points: usize,
    pub exponent_abs_tol: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            moment_orders: vec![1, 2, 3, 4],
            moment_rel_tol: 0.01,
            tail_rel_tol: 0.01,
            small_jump_rel_tol: 0.10,
            theta_max: 5.0,
            theta_points: 101,
            exponent_abs_tol: 0.01,
        }
    }
}

impl ProbeSettings {
    fn thetas(&self) -> Vec<f64> {
        let k = self.theta_points.max(2);
        (0..k)
            .map(|i| -self.theta_max + 2.0 * self.theta_max * i as f64 / (k - 1) as f64)
            .collect()
    }
}

/// One numerical check: a sequence along `axis` and how it was judged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub observed: Vec<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    /// Relative (or absolute, for CF exponents) error of the last observation.
    pub final_error: Option<f64>,
    pub pass: bool,
}

impl AssumptionCheck {
    fn over_n(name: String, n_list: &[usize], observed: Vec<f64>) -> Self {
        Self {
            name,
            axis_name: "n".into(),
            axis: n_list.iter().map(|&n| n as f64).collect(),
            observed,
            target: None,
            tolerance: None,
            final_error: None,
            pass: false,
        }
    }

    /// Passes when the last observation is within `tol` relative error of `target`.
    fn relative(mut self, target: f64, tol: f64) -> Self {
        let last = self.observed.last().copied().unwrap_or(f64::NAN);
        let err = (last - target).abs() / target.abs();
        self.target = Some(target);
        self.tolerance = Some(tol);
        self.final_error = Some(err);
        self.pass = err <= tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n_list: Vec<usize>,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

/// Evaluates the array moment, tail and small-jump conditions, the CF-exponent convergence they
/// imply, the small-jump sums and the u.a.n. bound against a limit `ν`.
///
/// Convergence checks compare the largest `n` in `n_list` with the limit.
pub fn check_assumptions(
    spec: &OnOffArraySpec,
    nu: &LevyMeasure,
    n_list: &[usize],
    x_probe: &[f64],
    eps_list: &[f64],
    settings: &ProbeSettings,
) -> Result<AssumptionReport> {
    nu.validate()?;
    if n_list.is_empty() {
        return Err(invalid("n_list", "must name at least one row"));
    }
    let mu = spec.mu;
    let rows = n_list.iter().map(|&n| spec.row(n)).collect::<Result<Vec<_>>>()?;
    let measures: Vec<_> = rows.iter().map(|r| r.empirical_measure()).collect();
    let thetas = settings.thetas();
    let mut checks = Vec::new();

    let max_lambda: Vec<f64> = measures.iter().map(|m| m.max_mass()).collect();
    let mut a1 = AssumptionCheck::over_n("max lambda".into(), n_list, max_lambda.clone());
    a1.target = Some(0.0);
    a1.pass = non_increasing(&max_lambda) && max_lambda.last() < max_lambda.first();
    checks.push(a1);

    for &eps in eps_list {
        let obs = measures.iter().map(|m| m.small_jump_moment(eps)).collect();
        let target = nu.small_jump_mean(eps)?;
        checks.push(
            AssumptionCheck::over_n(format!("small-jump moment eps={eps}"), n_list, obs)
                .relative(target, settings.small_jump_rel_tol),
        );
    }
    if eps_list.len() > 1 {
        // The ε ↓ 0 limit: the largest-n sums must shrink with ε.
        let mut eps_sorted = eps_list.to_vec();
        eps_sorted.sort_by(|a, b| b.total_cmp(a));
        let last = measures.last().expect("nonempty n_list");
        let obs: Vec<f64> = eps_sorted.iter().map(|&e| last.small_jump_moment(e)).collect();
        checks.push(AssumptionCheck {
            name: "small-jump moment decreasing in eps".into(),
            axis_name: "eps".into(),
            pass: non_increasing(&obs),
            axis: eps_sorted,
            observed: obs,
            target: Some(0.0),
            tolerance: None,
            final_error: None,
        });
    }

    for &p in &settings.moment_orders {
        let obs = measures.iter().map(|m| m.moment(p as f64)).collect();
        let target = nu.moment(p)?;
        checks.push(
            AssumptionCheck::over_n(format!("moment p={p}"), n_list, obs)
                .relative(target, settings.moment_rel_tol),
        );
    }

    for &x in x_probe {
        let obs = measures.iter().map(|m| m.tail(x)).collect();
        checks.push(
            AssumptionCheck::over_n(format!("tail x={x}"), n_list, obs).relative(nu.tail(x)?, settings.tail_rel_tol),
        );
    }

    for q in [1u32, 2] {
        let v = nu.moment(q);
        let value = v.as_ref().copied().unwrap_or(f64::INFINITY);
        checks.push(AssumptionCheck {
            name: format!("limit moment q={q}"),
            axis_name: "q".into(),
            axis: vec![q as f64],
            observed: vec![value],
            target: None,
            tolerance: None,
            final_error: None,
            pass: value.is_finite(),
        });
    }

    for &x in x_probe {
        let obs = measures.iter().map(|m| m.first_moment_tail(x)).collect();
        checks.push(
            AssumptionCheck::over_n(format!("first-moment tail x={x}"), n_list, obs)
                .relative(nu.first_moment_tail(x)?, settings.tail_rel_tol),
        );
    }

    let limit: Vec<Complex64> = thetas.iter().map(|&t| nu.char_exponent(t)).collect::<Result<_>>()?;
    let sup_dist: Vec<f64> = measures
        .iter()
        .map(|m| {
            thetas
                .iter()
                .zip(&limit)
                .map(|(&t, l)| (m.char_exponent(t) - l).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut a6b = AssumptionCheck::over_n(format!("exponent sup |theta|<={}", settings.theta_max), n_list, sup_dist);
    let last = *a6b.observed.last().expect("nonempty n_list");
    a6b.target = Some(0.0);
    a6b.tolerance = Some(settings.exponent_abs_tol);
    a6b.final_error = Some(last);
    a6b.pass = last <= settings.exponent_abs_tol;
    checks.push(a6b);

    for &eps in eps_list {
        let obs = rows.iter().map(|r| r.small_jump_sum(eps)).collect();
        let target = nu.small_jump_mean(eps)? / mu;
        checks.push(
            AssumptionCheck::over_n(format!("small-jump sum eps={eps}"), n_list, obs)
                .relative(target, settings.small_jump_rel_tol),
        );
    }
    if eps_list.len() > 1 {
        let mut eps_sorted = eps_list.to_vec();
        eps_sorted.sort_by(|a, b| b.total_cmp(a));
        let last = rows.last().expect("nonempty n_list");
        let obs: Vec<f64> = eps_sorted.iter().map(|&e| last.small_jump_sum(e)).collect();
        checks.push(AssumptionCheck {
            name: "small-jump sum decreasing in eps".into(),
            axis_name: "eps".into(),
            pass: non_increasing(&obs),
            axis: eps_sorted,
            observed: obs,
            target: Some(0.0),
            tolerance: None,
            final_error: None,
        });
    }

    // u.a.n.: the observed deviation must respect 2 max λ / μ for every row and θ.
    let mut uan_ok = true;
    let mut bounds = Vec::new();
    let dev: Vec<f64> = rows
        .iter()
        .map(|r| {
            let mut worst: f64 = 0.0;
            let mut bound = 0.0;
            for &t in &thetas {
                let (d, b) = r.uan(t);
                uan_ok &= d <= b;
                worst = worst.max(d);
                bound = b;
            }
            bounds.push(bound);
            worst
        })
        .collect();
    let mut uan = AssumptionCheck::over_n("u.a.n. max |phi-1|".into(), n_list, dev);
    uan.target = Some(0.0);
    uan.tolerance = bounds.last().copied();
    uan.pass = uan_ok && non_increasing(&bounds);
    checks.push(uan);

    Ok(AssumptionReport {
        n_list: n_list.to_vec(),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Sup over the θ-grid of |empirical CF - limit CF|.
    pub sup_distance: f64,
    pub l2_distance: f64,
    /// Sup over the θ-grid of |exact finite-n CF - limit CF|: the bias part.
    pub exact_bias: f64,
    pub max_stderr: f64,
    pub noise_allowance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mu: f64,
    pub reps: usize,
    pub bias_allowance: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Sup distances never increase with `n`.
    pub non_increasing: bool,
    /// Sup distances never increase by more than the Monte-Carlo allowance.
    pub non_increasing_within_noise: bool,
}

impl ConvergenceReport {
    pub fn final_pass(&self) -> bool {
        self.rows.last().is_some_and(|r| r.pass)
    }
}

/// Empirical joint CF of row sums against the ESPC limit for each `n`.
///
/// The tolerance at each `n` is `4/√N + bias_allowance`. Row `i` of `n_list`
/// draws replication `k` from `SeededRng::new(seed).split(i).split(k)`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    spec: &OnOffArraySpec,
    nu: &LevyMeasure,
    grid: &TimeGrid,
    thetas: &ThetaGrid,
    n_list: &[usize],
    reps: usize,
    seed: u64,
    bias_allowance: f64,
) -> Result<ConvergenceReport> {
    let process = espc_process(nu, spec.mu)?;
    let points = thetas.points();
    let limit: Vec<Complex64> = points
        .iter()
        .map(|th| process.log_cf(grid, th).map(Complex64::exp))
        .collect::<Result<_>>()?;
    let root = SeededRng::new(seed);
    let noise = 4.0 / (reps as f64).sqrt();
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let row = spec.row(n)?;
        let samples = row.sampler(grid).sample_many_from(reps, &root.split(i as u64))?;
        let emp = empirical_cf(&samples, thetas)?;
        let d = cf_distance(&emp, &limit)?;
        let mut bias: f64 = 0.0;
        for (th, l) in points.iter().zip(&limit) {
            bias = bias.max((row.exact_cf(grid, th)? - l).norm());
        }
        let tolerance = noise + bias_allowance;
        rows.push(ConvergenceRow {
            n,
            sup_distance: d.sup,
            l2_distance: d.l2,
            exact_bias: bias,
            max_stderr: emp.max_stderr(),
            noise_allowance: noise,
            tolerance,
            pass: d.sup <= tolerance,
        });
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    Ok(ConvergenceReport {
        mu: spec.mu,
        reps,
        bias_allowance,
        non_increasing: non_increasing(&sups),
        non_increasing_within_noise: sups.windows(2).all(|w| w[1] <= w[0] + noise),
        rows,
    })
}
