//! Triangular arrays of ON/OFF sources and their row superpositions.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::{switch_probs, OnOffSource};
use crate::corrstruct::TimeGrid;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::levy::{expm1_i, LevyMeasure};
use crate::rng::SeededRng;
use crate::stats::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub lambda: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayKind {
    /// Row `n` is the listed row of length `n`.
    Explicit { rows: Vec<Vec<SourceParams>> },
    /// `λ_nj = n^{-alpha}`, `r_nj = b^{j n^{-alpha}}`.
    PowerExample { alpha: f64, b: f64 },
    /// `λ_nj = c/n`, `r_nj = r`: Bernoulli sums with a Poisson limit.
    Uniform { c: f64, r: f64 },
}

/// Triangular array of sources sharing the ON→OFF rate `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnOffArraySpec {
    pub mu: f64,
    #[serde(flatten)]
    pub kind: ArrayKind,
}

impl OnOffArraySpec {
    pub fn power_example(alpha: f64, b: f64, mu: f64) -> Result<Self> {
        let s = Self {
            mu,
            kind: ArrayKind::PowerExample { alpha, b },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("mu", self.mu)?;
        match &self.kind {
            ArrayKind::Explicit { rows } => {
                for row in rows {
                    for s in row {
                        ensure_positive("lambda", s.lambda)?;
                        ensure_positive("r", s.r)?;
                    }
                }
                Ok(())
            }
            ArrayKind::PowerExample { alpha, b } => {
                for (name, v) in [("alpha", *alpha), ("b", *b)] {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(invalid(name, format!("must lie in (0, 1), got {v}")));
                    }
                }
                Ok(())
            }
            ArrayKind::Uniform { c, r } => {
                ensure_positive("c", *c)?;
                ensure_positive("r", *r)
            }
        }
    }

    /// Row `n` of the array.
    pub fn row(&self, n: usize) -> Result<ArrayRow> {
        self.validate()?;
        if n == 0 {
            return Err(invalid("n", "rows have at least one source"));
        }
        let (lambdas, rs): (Vec<f64>, Vec<f64>) = match &self.kind {
            ArrayKind::Explicit { rows } => {
                let row = rows
                    .iter()
                    .find(|r| r.len() == n)
                    .ok_or_else(|| Error::Precondition(format!("no explicit row of length {n}")))?;
                row.iter().map(|s| (s.lambda, s.r)).unzip()
            }
            ArrayKind::PowerExample { alpha, b } => {
                let h = (n as f64).powf(-alpha);
                (1..=n).map(|j| (h, b.powf(j as f64 * h))).unzip()
            }
            ArrayKind::Uniform { c, r } => (vec![c / n as f64; n], vec![*r; n]),
        };
        Ok(ArrayRow {
            mu: self.mu,
            lambdas,
            rs,
        })
    }
}

/// One row `(λ_nj, r_nj)_{j <= n}` of an array, with common `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayRow {
    pub mu: f64,
    pub lambdas: Vec<f64>,
    pub rs: Vec<f64>,
}

impl ArrayRow {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn source(&self, j: usize) -> OnOffSource {
        OnOffSource {
            lambda: self.lambdas[j],
            mu: self.mu,
            r: self.rs[j],
        }
    }

    pub fn sources(&self) -> impl Iterator<Item = OnOffSource> + '_ {
        (0..self.len()).map(|j| self.source(j))
    }

    pub fn empirical_measure(&self) -> EmpiricalLevyMeasure {
        EmpiricalLevyMeasure {
            locations: self.rs.clone(),
            masses: self.lambdas.clone(),
        }
    }

    /// `E X_n(t) = Σ_j π_nj r_nj`.
    pub fn mean(&self) -> f64 {
        self.sources().map(|s| s.pi() * s.r).sum()
    }

    /// `Σ_j E[ζ_nj 1(ζ_nj <= ε)] = Σ_j π_nj r_nj 1(r_nj <= ε)`.
    pub fn small_jump_sum(&self, eps: f64) -> f64 {
        self.sources().filter(|s| s.r <= eps).map(|s| s.pi() * s.r).sum()
    }

    /// `max_j |φ_nj(θ) - 1|` and its bound `2 max_j λ_nj / μ`.
    pub fn uan(&self, theta: f64) -> (f64, f64) {
        let max_dev = self
            .sources()
            .map(|s| s.pi() * expm1_i(theta * s.r).norm())
            .fold(0.0, f64::max);
        let max_lambda = self.lambdas.iter().copied().fold(0.0, f64::max);
        (max_dev, 2.0 * max_lambda / self.mu)
    }

    /// Exact joint CF `E exp(i Σ θ_k X_n(t_k))` by a two-state forward pass per source.
    pub fn exact_cf(&self, grid: &TimeGrid, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: theta.len(),
            });
        }
        let gaps: Vec<f64> = grid.epochs().windows(2).map(|w| w[1] - w[0]).collect();
        let mut total = Complex64::new(1.0, 0.0);
        for s in self.sources() {
            let pi = s.pi();
            let mut off = Complex64::new(1.0 - pi, 0.0);
            let mut on = Complex64::new(0.0, theta[0] * s.r).exp() * pi;
            for (k, &d) in gaps.iter().enumerate() {
                let (p01, p10) = s.switch_probs(d);
                let next_off = off * (1.0 - p01) + on * p10;
                let next_on = (off * p01 + on * (1.0 - p10)) * Complex64::new(0.0, theta[k + 1] * s.r).exp();
                off = next_off;
                on = next_on;
            }
            total *= off + on;
        }
        Ok(total)
    }

    pub fn sampler(&self, grid: &TimeGrid) -> SuperpositionSampler {
        SuperpositionSampler::new(self, grid)
    }
}

/// Atomic measure `ν_n = Σ_j λ_nj δ_{r_nj}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLevyMeasure {
    pub locations: Vec<f64>,
    pub masses: Vec<f64>,
}

impl EmpiricalLevyMeasure {
    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations.iter().copied().zip(self.masses.iter().copied())
    }

    /// `ν_n[x, ∞)`.
    pub fn tail(&self, x: f64) -> f64 {
        self.pairs().filter(|(r, _)| *r >= x).map(|(_, m)| m).sum()
    }

    /// `Σ_j λ_nj r_nj 1(r_nj >= x)`.
    pub fn first_moment_tail(&self, x: f64) -> f64 {
        self.pairs().filter(|(r, _)| *r >= x).map(|(r, m)| r * m).sum()
    }

    /// `Σ_j λ_nj r_nj^p`.
    pub fn moment(&self, p: f64) -> f64 {
        self.pairs().map(|(r, m)| m * r.powf(p)).sum()
    }

    /// `Σ_j λ_nj r_nj 1(r_nj <= ε)`.
    pub fn small_jump_moment(&self, eps: f64) -> f64 {
        self.pairs().filter(|(r, _)| *r <= eps).map(|(r, m)| r * m).sum()
    }

    /// `Σ_j λ_nj (e^{iθ r_nj} - 1)`.
    pub fn char_exponent(&self, theta: f64) -> Complex64 {
        self.pairs().map(|(r, m)| expm1_i(theta * r) * m).sum()
    }

    pub fn max_mass(&self) -> f64 {
        self.masses.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_levy_measure(&self) -> LevyMeasure {
        LevyMeasure::Atomic {
            locations: self.locations.clone(),
            masses: self.masses.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct Group {
    rs: Vec<f64>,
    /// Per gap: (P_01, P_10).
    switches: Vec<(f64, f64)>,
    initial: Option<Geometric>,
    switch_on: Vec<Option<Geometric>>,
}

/// Draws `X_n(t_k) = Σ_j ζ_nj(t_k)` at the grid epochs.
///
/// Sources with equal `λ` are handled together: the ON set is drawn by
/// geometric skipping, ON sources survive each gap independently, and OFF
/// sources switch on through a second geometric skip over the whole group.
/// Expected cost per replication is proportional to the number of ON sources.
#[derive(Debug, Clone)]
pub struct SuperpositionSampler {
    groups: Vec<Group>,
    m: usize,
}

fn skipper(p: f64) -> Option<Geometric> {
    (p > 0.0).then(|| Geometric::new(p.min(1.0)).expect("probability in (0, 1]"))
}

/// Calls `f` on each index in `0..len` selected by independent Bernoulli(p) trials.
fn for_each_success<R: Rng + ?Sized>(len: usize, geo: &Option<Geometric>, rng: &mut R, mut f: impl FnMut(usize)) {
    let Some(geo) = geo else { return };
    let mut i: u64 = 0;
    loop {
        i = i.saturating_add(geo.sample(rng));
        if i >= len as u64 {
            return;
        }
        f(i as usize);
        i += 1;
    }
}

impl SuperpositionSampler {
    pub fn new(row: &ArrayRow, grid: &TimeGrid) -> Self {
        let gaps: Vec<f64> = grid.epochs().windows(2).map(|w| w[1] - w[0]).collect();
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for (&lambda, &r) in row.lambdas.iter().zip(&row.rs) {
            let g = *index.entry(lambda.to_bits()).or_insert_with(|| {
                let pi = lambda / (lambda + row.mu);
                let switches: Vec<(f64, f64)> = gaps.iter().map(|&d| switch_probs(lambda, row.mu, d)).collect();
                groups.push(Group {
                    rs: Vec::new(),
                    initial: skipper(pi),
                    switch_on: switches.iter().map(|s| skipper(s.0)).collect(),
                    switches,
                });
                groups.len() - 1
            });
            groups[g].rs.push(r);
        }
        Self { groups, m: grid.len() }
    }

    pub fn sample(&self, rng: &mut SeededRng) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        let mut on: Vec<usize> = Vec::new();
        let mut next: Vec<usize> = Vec::new();
        let mut fresh: Vec<usize> = Vec::new();
        for g in &self.groups {
            let len = g.rs.len();
            on.clear();
            for_each_success(len, &g.initial, rng, |i| on.push(i));
            out[0] += on.iter().map(|&i| g.rs[i]).sum::<f64>();
            for k in 1..self.m {
                let p10 = g.switches[k - 1].1;
                next.clear();
                for &i in &on {
                    if rng.random::<f64>() >= p10 {
                        next.push(i);
                    }
                }
                // Candidates landing on sources that were ON are discarded.
                fresh.clear();
                let mut cursor = 0;
                for_each_success(len, &g.switch_on[k - 1], rng, |i| {
                    while cursor < on.len() && on[cursor] < i {
                        cursor += 1;
                    }
                    if cursor >= on.len() || on[cursor] != i {
                        fresh.push(i);
                    }
                });
                on.clear();
                merge_sorted(&next, &fresh, &mut on);
                out[k] += on.iter().map(|&i| g.rs[i]).sum::<f64>();
            }
        }
        out
    }

    /// `reps` replications; replication `k` uses `SeededRng::new(seed).split(k)`.
    pub fn sample_many(&self, reps: usize, seed: u64) -> Result<SampleMatrix> {
        self.sample_many_from(reps, &SeededRng::new(seed))
    }

    /// Replication `k` draws from `root.split(k)`.
    pub fn sample_many_from(&self, reps: usize, root: &SeededRng) -> Result<SampleMatrix> {
        SampleMatrix::generate(reps, self.m, |k| Ok(self.sample(&mut root.split(k))))
    }
}

fn merge_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{cf_distance, column_means, empirical_cf, empirical_cov, ThetaGrid};

    fn grid(t: &[f64]) -> TimeGrid {
        TimeGrid::new(t.to_vec()).unwrap()
    }

    #[test]
    fn power_example_rows() {
        let spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap();
        let row = spec.row(100).unwrap();
        assert_eq!(row.len(), 100);
        assert!(row.lambdas.iter().all(|&l| (l - 0.1).abs() < 1e-15));
        assert!((row.rs[9] - 0.5).abs() < 1e-15);
        assert!(OnOffArraySpec::power_example(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn explicit_rows_by_length() {
        let spec: OnOffArraySpec = serde_json::from_str(
            r#"{"mu": 2.0, "kind": "explicit", "rows": [[{"lambda": 0.5, "r": 1.0}],
                [{"lambda": 0.2, "r": 1.0}, {"lambda": 0.3, "r": 0.5}]]}"#,
        )
        .unwrap();
        assert_eq!(spec.row(2).unwrap().rs, vec![1.0, 0.5]);
        assert!(spec.row(3).is_err());
    }

    #[test]
    fn exact_cf_reduces_to_marginal_product() {
        let row = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap().row(50).unwrap();
        let th = 1.3;
        let v = row.exact_cf(&grid(&[0.0]), &[th]).unwrap();
        let prod: Complex64 = row
            .sources()
            .map(|s| Complex64::new(1.0 - s.pi(), 0.0) + Complex64::new(0.0, th * s.r).exp() * s.pi())
            .product();
        assert!((v - prod).norm() < 1e-14);
        // θ_2 = 0 on a two-point grid leaves the first marginal.
        let w = row.exact_cf(&grid(&[0.0, 0.7]), &[th, 0.0]).unwrap();
        assert!((w - prod).norm() < 1e-13);
    }

    #[test]
    fn exact_cf_matches_brute_force_for_one_source() {
        let s = OnOffSource::new(0.4, 1.2, 0.8).unwrap();
        let row = ArrayRow {
            mu: s.mu,
            lambdas: vec![s.lambda],
            rs: vec![s.r],
        };
        let t = [0.0, 0.3, 1.0];
        let th = [0.5, -1.0, 2.0];
        // Sum over all 2^3 state paths.
        let mut brute = Complex64::new(0.0, 0.0);
        for mask in 0..8u32 {
            let states: Vec<usize> = (0..3).map(|k| ((mask >> k) & 1) as usize).collect();
            let mut p = if states[0] == 1 { s.pi() } else { 1.0 - s.pi() };
            for k in 1..3 {
                p *= s.transition_matrix(t[k] - t[k - 1])[states[k - 1]][states[k]];
            }
            let phase: f64 = (0..3).map(|k| th[k] * s.r * states[k] as f64).sum();
            brute += Complex64::new(0.0, phase).exp() * p;
        }
        let v = row.exact_cf(&grid(&t), &th).unwrap();
        assert!((v - brute).norm() < 1e-14);
    }

    #[test]
    fn superposition_mean_and_cf() {
        let row = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap().row(10_000).unwrap();
        let g = grid(&[0.0]);
        let n = 200_000;
        let m = row.sampler(&g).sample_many(n, 77).unwrap();
        let mean = column_means(&m)[0];
        assert!(mean.within(row.mean(), 3.0), "{mean:?} vs {}", row.mean());
        let tg = ThetaGrid::Points(vec![vec![1.0]]);
        let emp = empirical_cf(&m, &tg).unwrap();
        let exact = row.exact_cf(&g, &[1.0]).unwrap();
        let d = cf_distance(&emp, &[exact]).unwrap();
        assert!(d.sup <= 4.0 / (n as f64).sqrt(), "{d:?}");
    }

    #[test]
    fn sparse_sampler_matches_exact_joint_cf() {
        // Mixed λ values exercise grouping; λ large enough that many sources are ON.
        let row = ArrayRow {
            mu: 1.0,
            lambdas: (0..60).map(|j| if j % 3 == 0 { 0.5 } else { 0.05 }).collect(),
            rs: (0..60).map(|j| 0.02 * (j + 1) as f64).collect(),
        };
        let g = grid(&[0.0, 0.4, 1.5]);
        let n = 300_000;
        let m = row.sampler(&g).sample_many(n, 9).unwrap();
        let tg = ThetaGrid::standard(3);
        let emp = empirical_cf(&m, &tg).unwrap();
        let exact: Vec<Complex64> = tg.points().iter().map(|th| row.exact_cf(&g, th).unwrap()).collect();
        let d = cf_distance(&emp, &exact).unwrap();
        assert!(d.sup <= 4.0 / (n as f64).sqrt(), "{d:?}");
    }

    #[test]
    fn single_source_row_matches_path_law() {
        let s = OnOffSource::new(0.3, 0.9, 1.5).unwrap();
        let row = ArrayRow {
            mu: s.mu,
            lambdas: vec![s.lambda],
            rs: vec![s.r],
        };
        let g = grid(&[0.0, 1.0]);
        let m = row.sampler(&g).sample_many(400_000, 2).unwrap();
        let c = empirical_cov(&m, &[(0, 1)]).unwrap()[0];
        let pi = s.pi();
        let exact = s.r * s.r * (s.joint_on_probability(&[0.0, 1.0]) - pi * pi);
        assert!((c.value - exact).abs() <= 3.0 * c.stderr, "{c:?} vs {exact}");
    }

    #[test]
    fn uan_bound_holds() {
        let spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap();
        for n in [10, 100, 1000] {
            let row = spec.row(n).unwrap();
            for k in -20..=20 {
                let (dev, bound) = row.uan(k as f64 * 0.25);
                assert!(dev <= bound);
            }
        }
    }

    #[test]
    fn empirical_measure_queries() {
        let e = EmpiricalLevyMeasure {
            locations: vec![0.2, 0.5, 1.0],
            masses: vec![1.0, 2.0, 0.5],
        };
        assert_eq!(e.tail(0.5), 2.5);
        assert_eq!(e.first_moment_tail(0.5), 1.5);
        assert!((e.moment(2.0) - (0.04 + 0.5 + 0.5)).abs() < 1e-15);
        assert!((e.small_jump_moment(0.5) - 1.2).abs() < 1e-15);
    }
}
