//! Correlation structures `H`, rectangle weights `a_ij`, and the equivalent
//! symmetric coefficients `b_kl`.
//!
//! Indices in the public API are zero-based: `a(i, j)` with `i <= j < n`
//! corresponds to the rectangle bounded by epochs `t_{i-1}, t_i` on one axis
//! and `t_j, t_{j+1}` on the other, with `t_{-1} = -∞` and `t_n = +∞`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, ensure_positive, invalid, Error, Result};

/// Service-time law of an M/GI/∞ system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceDistribution {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    /// Pareto law `P(σ > x) = (scale/x)^shape` for `x >= scale`. Finite variance
    /// of the induced process needs `shape > 2`.
    ParetoTruncated { shape: f64, scale: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl ServiceDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            ServiceDistribution::Exponential { rate } => ensure_positive("service.rate", *rate),
            ServiceDistribution::Deterministic { value } => ensure_positive("service.value", *value),
            ServiceDistribution::ParetoTruncated { shape, scale } => {
                ensure_positive("service.scale", *scale)?;
                if !(shape.is_finite() && *shape > 2.0) {
                    return Err(invalid("service.shape", format!("must exceed 2, got {shape}")));
                }
                Ok(())
            }
            ServiceDistribution::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(invalid(
                        "service.probs",
                        "values and probs must be nonempty and of equal length",
                    ));
                }
                for &v in values {
                    ensure_nonneg("service.values", v)?;
                }
                for &p in probs {
                    ensure_nonneg("service.probs", p)?;
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid("service.probs", format!("must sum to 1, got {total}")));
                }
                if self.mean() <= 0.0 {
                    return Err(invalid("service", "mean service time must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ServiceDistribution::Exponential { rate } => 1.0 / rate,
            ServiceDistribution::Deterministic { value } => *value,
            ServiceDistribution::ParetoTruncated { shape, scale } => shape * scale / (shape - 1.0),
            ServiceDistribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// `P(σ > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self {
            ServiceDistribution::Exponential { rate } => (-rate * x).exp(),
            ServiceDistribution::Deterministic { value } => f64::from(u8::from(x < *value)),
            ServiceDistribution::ParetoTruncated { shape, scale } => {
                if x < *scale {
                    1.0
                } else {
                    (scale / x).powf(*shape)
                }
            }
            ServiceDistribution::Discrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v > x)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// Integrated tail `G_I(x) = m^{-1} ∫_0^x P(σ > y) dy`, in closed form.
    pub fn integrated_tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let v = match self {
            ServiceDistribution::Exponential { rate } => -(-rate * x).exp_m1(),
            ServiceDistribution::Deterministic { value } => x.min(*value) / value,
            ServiceDistribution::ParetoTruncated { shape, scale } => {
                let area = if x <= *scale {
                    x
                } else {
                    scale + scale / (shape - 1.0) * (1.0 - (scale / x).powf(shape - 1.0))
                };
                area / self.mean()
            }
            ServiceDistribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| p * x.min(*v)).sum::<f64>() / self.mean()
            }
        };
        v.min(1.0)
    }

    /// Smallest `x` with `P(σ > x) <= 1 - p`.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            ServiceDistribution::Exponential { rate } => -(-p).ln_1p() / rate,
            ServiceDistribution::Deterministic { value } => *value,
            ServiceDistribution::ParetoTruncated { shape, scale } => scale * (1.0 - p).powf(-1.0 / shape),
            ServiceDistribution::Discrete { values, probs } => {
                let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                for (v, q) in &pairs {
                    acc += q;
                    if acc >= p - 1e-15 {
                        return *v;
                    }
                }
                pairs.last().map_or(0.0, |x| x.0)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ServiceDistribution::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            ServiceDistribution::Deterministic { value } => *value,
            ServiceDistribution::ParetoTruncated { shape, scale } => {
                let u: f64 = rng.random();
                scale * (1.0 - u).powf(-1.0 / shape)
            }
            ServiceDistribution::Discrete { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated nonempty")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub structure: CorrelationStructure,
}

/// A concave distribution function `H` on `[0, ∞)` with `H(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationStructure {
    /// `1 - e^{-rate·t}`
    Exponential { rate: f64 },
    /// `min(t^alpha, 1)`, `alpha` in `(0, 1]`.
    Power { alpha: f64 },
    /// Integrated tail `G_I` of a service law.
    IntegratedTail { service: ServiceDistribution },
    /// Convex combination.
    Mixture { components: Vec<MixtureComponent> },
}

impl CorrelationStructure {
    pub fn exponential(rate: f64) -> Result<Self> {
        let s = CorrelationStructure::Exponential { rate };
        s.validate()?;
        Ok(s)
    }

    pub fn power(alpha: f64) -> Result<Self> {
        let s = CorrelationStructure::Power { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn integrated_tail(service: ServiceDistribution) -> Result<Self> {
        let s = CorrelationStructure::IntegratedTail { service };
        s.validate()?;
        Ok(s)
    }

    pub fn mixture(components: Vec<(f64, CorrelationStructure)>) -> Result<Self> {
        let s = CorrelationStructure::Mixture {
            components: components
                .into_iter()
                .map(|(weight, structure)| MixtureComponent { weight, structure })
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationStructure::Exponential { rate } => ensure_positive("structure.rate", *rate),
            CorrelationStructure::Power { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(invalid("structure.alpha", format!("must lie in (0, 1], got {alpha}")));
                }
                Ok(())
            }
            CorrelationStructure::IntegratedTail { service } => service.validate(),
            CorrelationStructure::Mixture { components } => {
                if components.is_empty() {
                    return Err(invalid("structure.components", "mixture needs at least one component"));
                }
                for c in components {
                    ensure_positive("structure.weight", c.weight)?;
                    c.structure.validate()?;
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid("structure.weight", format!("weights must sum to 1, got {total}")));
                }
                Ok(())
            }
        }
    }

    /// `H(t)`; zero for `t <= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            CorrelationStructure::Exponential { rate } => -(-rate * t).exp_m1(),
            CorrelationStructure::Power { alpha } => t.powf(*alpha).min(1.0),
            CorrelationStructure::IntegratedTail { service } => service.integrated_tail(t),
            CorrelationStructure::Mixture { components } => {
                // Weights sum to one only up to rounding.
                components.iter().map(|c| c.weight * c.structure.eval(t)).sum::<f64>().min(1.0)
            }
        }
    }

    /// `a_ij` on `grid`.
    pub fn weights(&self, grid: &TimeGrid) -> Result<WeightMatrix> {
        weights_from_fn(|t| self.eval(t), grid)
    }
}

/// Strictly increasing observation epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    epochs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(epochs: Vec<f64>) -> Result<Self> {
        TimeGrid::new(epochs)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.epochs
    }
}

impl TimeGrid {
    pub fn new(epochs: Vec<f64>) -> Result<Self> {
        if epochs.is_empty() {
            return Err(invalid("grid", "needs at least one epoch"));
        }
        if epochs.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid", "epochs must be finite"));
        }
        if epochs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "epochs must be strictly increasing"));
        }
        Ok(Self { epochs })
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn first(&self) -> f64 {
        self.epochs[0]
    }

    pub fn last(&self) -> f64 {
        self.epochs[self.epochs.len() - 1]
    }

    pub fn shifted(&self, tau: f64) -> Result<Self> {
        Self::new(self.epochs.iter().map(|t| t + tau).collect())
    }

    /// The grid with epoch `k` removed; fails if that would leave it empty.
    pub fn without(&self, k: usize) -> Result<Self> {
        if k >= self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: k + 1,
            });
        }
        let mut epochs = self.epochs.clone();
        epochs.remove(k);
        Self::new(epochs)
    }
}

/// Upper-triangular weights `a_ij`, `0 <= i <= j < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j < self.n);
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i <= j && j < self.n);
        self.data[i * self.n + j] = value;
    }

    /// `(i, j, a_ij)` for `i <= j`, row by row.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// `Σ_{i<=k<=j} a_ij` for each `k`.
    pub fn covering_sums(&self) -> Vec<f64> {
        let b = a_to_b(self);
        (0..self.n).map(|k| b[(k, k)]).collect()
    }

    pub fn max_abs_diff(&self, other: &WeightMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `i,j,value` and one-based indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,j,value")?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{},{},{}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

const CLAMP_TOL: f64 = 1e-9;

/// Rectangle weights for an arbitrary `H` given as a function. `H(+∞) = 1` is
/// substituted symbolically at the boundary indices.
pub fn weights_from_fn<F: Fn(f64) -> f64>(h: F, grid: &TimeGrid) -> Result<WeightMatrix> {
    let t = grid.epochs();
    let n = t.len();
    let mut w = WeightMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let first = i == 0;
            let last = j == n - 1;
            let h1 = if first { 1.0 } else { h(t[j] - t[i - 1]) };
            let h2 = h(t[j] - t[i]);
            let h3 = if first || last { 1.0 } else { h(t[j + 1] - t[i - 1]) };
            let h4 = if last { 1.0 } else { h(t[j + 1] - t[i]) };
            let v = (h1 - h2) - (h3 - h4);
            if v < -CLAMP_TOL {
                return Err(Error::ConcavityViolation {
                    i: i + 1,
                    j: j + 1,
                    value: v,
                });
            }
            w.set(i, j, v.max(0.0));
        }
    }
    Ok(w)
}

/// `b_kl = Σ_{i<=k<=l<=j} a_ij`, symmetrized.
pub fn a_to_b(w: &WeightMatrix) -> DMatrix<f64> {
    let n = w.n();
    // c[k][l] = Σ_{i<=k, j>=l} a_ij, built from the lower-left corner.
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in (k..n).rev() {
            let above = if k > 0 { b[(k - 1, l)] } else { 0.0 };
            let right = if l + 1 < n { b[(k, l + 1)] } else { 0.0 };
            let diag = if k > 0 && l + 1 < n { b[(k - 1, l + 1)] } else { 0.0 };
            b[(k, l)] = w.get(k, l) + above + right - diag;
        }
    }
    // The recursion reads b[(k-1, l)] only for l >= k, so fill the lower half last.
    for k in 0..n {
        for l in 0..k {
            b[(k, l)] = b[(l, k)];
        }
    }
    b
}

/// Inverse of [`a_to_b`]: `a_ij = b_ij - b_{i,j+1} - b_{i-1,j} + b_{i-1,j+1}`.
pub fn b_to_a(b: &DMatrix<f64>) -> Result<WeightMatrix> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.ncols(),
        });
    }
    let at = |i: Option<usize>, j: usize| match i {
        Some(i) if j < n => b[(i, j)],
        _ => 0.0,
    };
    let mut w = WeightMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let prev = i.checked_sub(1);
            let v = at(Some(i), j) - at(Some(i), j + 1) - at(prev, j) + at(prev, j + 1);
            w.set(i, j, v);
        }
    }
    Ok(w)
}
