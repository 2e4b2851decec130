//! Moment bounds and identities used in the tightness and convergence proofs
//! for ON/OFF superpositions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::array::ArrayRow;
use super::limit::product_weights;
use super::OnOffSource;
use crate::corrstruct::TimeGrid;
use crate::error::{invalid, Error, Result};
use crate::levy::expm1_i;
use crate::rng::SeededRng;
use crate::stats::{column_means, ols_slope, Estimate, SampleMatrix};

/// Names of the three increment-moment inequalities, in report order.
pub const INEQUALITY_NAMES: [&str; 3] = [
    "E[(z_t-z_u)^2 (z_s-z_t)^2] <= r^4 lambda mu (s-u)^2 / 4",
    "|E[(z_u-z_t)(z_t-z_s)]| <= r^2 lambda mu (s-u)^2 / 4",
    "E[(z_t-z_u)^2] <= 2 lambda mu r^2 (t-u) / (lambda+mu)",
];

/// Largest grid accepted by the brute-force subset sums.
pub const MAX_SUBSET_EPOCHS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleBounds {
    pub u: f64,
    pub t: f64,
    pub s: f64,
    /// Closed-form moments; the middle entry is signed.
    pub closed: [f64; 3],
    pub bound: [f64; 3],
    /// Monte-Carlo estimates of the same moments, when requested.
    pub monte_carlo: Option<[Estimate; 3]>,
    pub violations: Vec<String>,
}

impl TripleBounds {
    /// Closed forms and bounds for one source and `u < t < s`.
    pub fn closed_form(src: &OnOffSource, u: f64, t: f64, s: f64) -> Result<Self> {
        if !(u < t && t < s) {
            return Err(invalid("triple", format!("need u < t < s, got ({u}, {t}, {s})")));
        }
        let (l, m, r) = (src.lambda, src.mu, src.r);
        let a = src.alpha();
        let d1 = -(-a * (t - u)).exp_m1();
        let d2 = -(-a * (s - t)).exp_m1();
        let c = l * m / (a * a);
        let closed = [c * r.powi(4) * d1 * d2, -c * r * r * d1 * d2, 2.0 * c * r * r * d1];
        let bound = [
            r.powi(4) * l * m * (s - u).powi(2) / 4.0,
            r * r * l * m * (s - u).powi(2) / 4.0,
            2.0 * l * m * r * r * (t - u) / a,
        ];
        let mut out = Self {
            u,
            t,
            s,
            closed,
            bound,
            monte_carlo: None,
            violations: Vec::new(),
        };
        for k in 0..3 {
            // Rounding slack relative to the bound's own size.
            if out.closed[k].abs() > out.bound[k] * (1.0 + 1e-12) {
                out.violations
                    .push(format!("{} (closed form {} > {})", INEQUALITY_NAMES[k], out.closed[k].abs(), out.bound[k]));
            }
        }
        Ok(out)
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub source: OnOffSource,
    pub reps: usize,
    pub triples: Vec<TripleBounds>,
}

impl BoundsReport {
    pub fn pass(&self) -> bool {
        self.triples.iter().all(TripleBounds::pass)
    }

    pub fn violations(&self) -> impl Iterator<Item = &String> {
        self.triples.iter().flat_map(|t| &t.violations)
    }
}

/// Closed forms, bounds and Monte-Carlo estimates of the three increment moments.
///
/// A Monte-Carlo estimate above its bound by more than three standard errors
/// is reported as a violation, as is a closed form above its bound.
/// Replication `k` of triple `i` draws from `SeededRng::new(seed).split(i).split(k)`.
pub fn appendix_bounds_check(
    src: &OnOffSource,
    triples: &[(f64, f64, f64)],
    reps: usize,
    seed: u64,
) -> Result<BoundsReport> {
    let root = SeededRng::new(seed);
    let mut out = Vec::with_capacity(triples.len());
    for (i, &(u, t, s)) in triples.iter().enumerate() {
        let mut tb = TripleBounds::closed_form(src, u, t, s)?;
        if reps > 0 {
            let grid = TimeGrid::new(vec![u, t, s])?;
            let base = root.split(i as u64);
            let samples = SampleMatrix::generate(reps, 3, |k| {
                let z = src.simulate_path(&grid, &mut base.split(k));
                let (d1, d2) = (z[1] - z[0], z[2] - z[1]);
                Ok(vec![d1 * d1 * d2 * d2, d1 * d2, d1 * d1])
            })?;
            let est = column_means(&samples);
            for k in 0..3 {
                let e = est[k];
                if e.value.abs() > tb.bound[k] + 3.0 * e.stderr {
                    tb.violations.push(format!(
                        "{} (Monte Carlo {} ± {} > {})",
                        INEQUALITY_NAMES[k],
                        e.value.abs(),
                        e.stderr,
                        tb.bound[k]
                    ));
                }
            }
            tb.monte_carlo = Some([est[0], est[1], est[2]]);
        }
        out.push(tb);
    }
    Ok(BoundsReport {
        source: *src,
        reps,
        triples: out,
    })
}

fn check_subset_inputs(grid: &TimeGrid, theta: &[f64]) -> Result<()> {
    if theta.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: theta.len(),
        });
    }
    if grid.len() > MAX_SUBSET_EPOCHS {
        return Err(invalid("grid", format!("at most {MAX_SUBSET_EPOCHS} epochs for subset sums")));
    }
    Ok(())
}

/// Index lists of every subset of `0..m` with at least two elements, in increasing order.
fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << m))
        .filter(|mask| mask.count_ones() >= 2)
        .map(move |mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
}

/// Both sides of the inclusion–exclusion identity for exponential weights.
///
/// Left: `Σ_{|S|>=2} e^{-α(t_last - t_first)} Π_{l∈S} (e^{irθ_l} - 1)` by brute force.
/// Right: `Σ_{u<=v} a_uv (e^{ir(θ_u+…+θ_v)} - 1) - Σ_u (e^{irθ_u} - 1)` with the
/// product-form weights `a_uv` at rate `α`, which is O(m²).
pub fn algebraic_identity_check(
    m: usize,
    theta: &[f64],
    grid: &TimeGrid,
    alpha: f64,
    r: f64,
) -> Result<(Complex64, Complex64)> {
    if m < 2 || m != grid.len() {
        return Err(invalid("m", format!("must be at least 2 and equal the grid length {}", grid.len())));
    }
    check_subset_inputs(grid, theta)?;
    let t = grid.epochs();
    let x: Vec<Complex64> = theta.iter().map(|&th| expm1_i(r * th)).collect();
    let lhs: Complex64 = subsets(m)
        .map(|s| {
            let first = s[0];
            let last = s[s.len() - 1];
            s.iter().map(|&l| x[l]).product::<Complex64>() * (-alpha * (t[last] - t[first])).exp()
        })
        .sum();
    let w = product_weights(alpha, grid);
    let mut rhs: Complex64 = w
        .iter()
        .map(|(i, j, a)| expm1_i(r * theta[i..=j].iter().sum::<f64>()) * a)
        .sum();
    rhs -= x.iter().sum::<Complex64>();
    Ok((lhs, rhs))
}

/// `L(S) = E[ξ(t_{l_1})⋯ξ(t_{l_k})] - (λ/μ) e^{-μ(t_{l_k} - t_{l_1})}` for one source and subset.
pub fn l_term(src: &OnOffSource, epochs: &[f64]) -> f64 {
    let span = epochs[epochs.len() - 1] - epochs[0];
    src.joint_on_probability(epochs) - src.lambda / src.mu * (-src.mu * span).exp()
}

/// The CF remainder `R` of one source:
/// `Σ_{|S|>=2} L(S) Π_{l∈S}(e^{irθ_l} - 1) + (π - λ/μ) Σ_l (e^{irθ_l} - 1)`.
pub fn r_term(src: &OnOffSource, grid: &TimeGrid, theta: &[f64]) -> Result<Complex64> {
    check_subset_inputs(grid, theta)?;
    let t = grid.epochs();
    let x: Vec<Complex64> = theta.iter().map(|&th| expm1_i(src.r * th)).collect();
    let mut total: Complex64 = subsets(t.len())
        .map(|s| {
            let ep: Vec<f64> = s.iter().map(|&l| t[l]).collect();
            s.iter().map(|&l| x[l]).product::<Complex64>() * l_term(src, &ep)
        })
        .sum();
    total += x.iter().sum::<Complex64>() * (src.pi() - src.lambda / src.mu);
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub mu: f64,
    pub epochs: Vec<f64>,
    pub theta: Vec<f64>,
    /// Number of (source, subset) pairs evaluated.
    pub l_terms: usize,
    pub min_l: f64,
    pub sign_violations: usize,
    /// `max |L| / λ²` over the row.
    pub fitted_m: f64,
    /// `max |R| / (λ² r)` over the row.
    pub fitted_k: f64,
    /// Log-log slope of `max_S |L(S)|` against `λ` (predicted 2).
    pub slope_l_lambda: f64,
    /// Log-log slope of `|R|` against `λ` at fixed `r` (predicted 2).
    pub slope_r_lambda: f64,
    /// Log-log slope of `|R|` against `r` at fixed `λ` (predicted 1).
    pub slope_r_r: f64,
}

impl RemainderReport {
    pub fn nonnegative(&self) -> bool {
        self.sign_violations == 0
    }

    pub fn slopes_within(&self, tol: f64) -> bool {
        (self.slope_l_lambda - 2.0).abs() <= tol
            && (self.slope_r_lambda - 2.0).abs() <= tol
            && (self.slope_r_r - 1.0).abs() <= tol
    }
}

fn log_space(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

/// `L` over every source of the row and every subset of the grid, and `R` per source.
///
/// The sign of `L` is checked with a tolerance of `1e-15`. Scaling slopes come
/// from sweeping `λ ∈ [1e-4, 1e-2]` at the first source's `r`, and
/// `r ∈ [1e-4, 1e-2]` at the first source's `λ`.
pub fn remainder_bound_check(row: &ArrayRow, grid: &TimeGrid, theta: &[f64]) -> Result<RemainderReport> {
    check_subset_inputs(grid, theta)?;
    if row.is_empty() {
        return Err(invalid("row", "needs at least one source"));
    }
    let t = grid.epochs();
    let subs: Vec<Vec<f64>> = subsets(t.len()).map(|s| s.iter().map(|&l| t[l]).collect()).collect();
    let mut min_l = f64::INFINITY;
    let mut sign_violations = 0;
    let mut fitted_m: f64 = 0.0;
    let mut fitted_k: f64 = 0.0;
    for src in row.sources() {
        for ep in &subs {
            let l = l_term(&src, ep);
            min_l = min_l.min(l);
            if l < -1e-15 {
                sign_violations += 1;
            }
            fitted_m = fitted_m.max(l.abs() / (src.lambda * src.lambda));
        }
        let r = r_term(&src, grid, theta)?.norm();
        fitted_k = fitted_k.max(r / (src.lambda * src.lambda * src.r));
    }

    let first = row.source(0);
    let lambdas = log_space(1e-4, 1e-2, 9);
    let rs = log_space(1e-4, 1e-2, 9);
    let with = |lambda: f64, r: f64| OnOffSource { lambda, mu: row.mu, r };
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();

    let max_l: Vec<f64> = lambdas
        .iter()
        .map(|&l| subs.iter().map(|ep| l_term(&with(l, first.r), ep).abs()).fold(0.0, f64::max))
        .collect();
    let r_lambda: Vec<f64> = lambdas
        .iter()
        .map(|&l| r_term(&with(l, first.r), grid, theta).map(|z| z.norm()))
        .collect::<Result<_>>()?;
    let r_r: Vec<f64> = rs
        .iter()
        .map(|&r| r_term(&with(first.lambda, r), grid, theta).map(|z| z.norm()))
        .collect::<Result<_>>()?;

    Ok(RemainderReport {
        mu: row.mu,
        epochs: t.to_vec(),
        theta: theta.to_vec(),
        l_terms: row.len() * subs.len(),
        min_l,
        sign_violations,
        fitted_m,
        fitted_k,
        slope_l_lambda: ols_slope(&ln(&lambdas), &ln(&max_l)),
        slope_r_lambda: ols_slope(&ln(&lambdas), &ln(&r_lambda)),
        slope_r_r: ols_slope(&ln(&rs), &ln(&r_r)),
    })
}
