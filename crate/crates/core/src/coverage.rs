//! M/GI/∞ coverage processes, optionally marked.
//!
//! Customers arrive as a Poisson process of rate `λ` and stay for i.i.d.
//! service times; `X_t` counts (or sums the marks of) the customers present
//! at time `t`. The process is GCID with exponent `ρ(χ(θ) - 1)`,
//! `ρ = λ E σ`, and `H = G_I`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corrstruct::{CorrelationStructure, ServiceDistribution, TimeGrid, WeightMatrix};
use crate::error::{ensure_positive, Error, Result};
use crate::fidi::GcidProcess;
use crate::levy::{expm1_i, poisson_count, LevyExponent, MarkDistribution};
use crate::rng::SeededRng;
use crate::stats::SampleMatrix;

/// Service times beyond this quantile are ignored when choosing the
/// simulation window.
pub const WINDOW_QUANTILE: f64 = 1.0 - 1e-9;

fn default_max_window() -> f64 {
    1e5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageModel {
    pub arrival_rate: f64,
    pub service: ServiceDistribution,
    #[serde(default)]
    pub marks: Option<MarkDistribution>,
    /// Upper limit on the warm-up window; longer windows are refused.
    #[serde(default = "default_max_window")]
    pub max_window: f64,
}

/// One replication of a coverage process at the grid epochs.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverageSample {
    Counts(Vec<i64>),
    Marked(Vec<f64>),
}

impl CoverageSample {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            CoverageSample::Counts(c) => c.iter().map(|&v| v as f64).collect(),
            CoverageSample::Marked(m) => m.clone(),
        }
    }
}

impl CoverageModel {
    pub fn new(arrival_rate: f64, service: ServiceDistribution, marks: Option<MarkDistribution>) -> Result<Self> {
        let m = Self {
            arrival_rate,
            service,
            marks,
            max_window: default_max_window(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("arrival_rate", self.arrival_rate)?;
        ensure_positive("max_window", self.max_window)?;
        self.service.validate()?;
        if let Some(mark) = &self.marks {
            mark.validate()?;
        }
        Ok(())
    }

    /// `ρ = λ m`.
    pub fn rho(&self) -> f64 {
        self.arrival_rate * self.service.mean()
    }

    pub fn structure(&self) -> CorrelationStructure {
        CorrelationStructure::IntegratedTail {
            service: self.service.clone(),
        }
    }

    /// The marginal law: Poisson(ρ), or compound Poisson with the marks.
    pub fn law(&self) -> LevyExponent {
        match &self.marks {
            None => LevyExponent::Poisson { rate: self.rho() },
            Some(mark) => LevyExponent::CompoundPoisson {
                rate: self.rho(),
                mark: mark.clone(),
            },
        }
    }

    pub fn process(&self) -> Result<GcidProcess> {
        GcidProcess::new(self.law(), self.structure())
    }

    /// Intensity-measure masses `μ(A_ij) = ρ a_ij` with `H = G_I`.
    pub fn mu_rect(&self, grid: &TimeGrid) -> Result<WeightMatrix> {
        Ok(self.structure().weights(grid)?.scaled(self.rho()))
    }

    /// `Σ_{i<=j} μ(A_ij)(χ(θ_i + … + θ_j) - 1)`.
    pub fn joint_cf_analytic(&self, grid: &TimeGrid, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: theta.len(),
            });
        }
        let mu = self.mu_rect(grid)?;
        let chi_m1 = |u: f64| match &self.marks {
            None => expm1_i(u),
            Some(mark) => mark.cf(u) - 1.0,
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (i, j, m) in mu.iter() {
            let s: f64 = theta[i..=j].iter().sum();
            total += chi_m1(s) * m;
        }
        Ok(total)
    }

    /// Length `W` of the warm-up window before the first epoch.
    pub fn window(&self) -> Result<f64> {
        let w = self.service.quantile(WINDOW_QUANTILE);
        if !(w <= self.max_window) {
            return Err(Error::WindowTooLarge {
                required: w,
                max: self.max_window,
            });
        }
        Ok(w)
    }

    pub fn simulator(&self, grid: &TimeGrid) -> Result<CoverageSimulator> {
        self.validate()?;
        Ok(CoverageSimulator {
            model: self.clone(),
            epochs: grid.epochs().to_vec(),
            start: grid.first() - self.window()?,
        })
    }

    pub fn simulate_counts(&self, grid: &TimeGrid, rng: &mut SeededRng) -> Result<CoverageSample> {
        Ok(self.simulator(grid)?.sample(rng))
    }
}

/// Simulator bound to a model and grid.
#[derive(Debug, Clone)]
pub struct CoverageSimulator {
    model: CoverageModel,
    epochs: Vec<f64>,
    start: f64,
}

impl CoverageSimulator {
    pub fn sample(&self, rng: &mut SeededRng) -> CoverageSample {
        let n = self.epochs.len();
        let end = self.epochs[n - 1];
        let span = end - self.start;
        let k = poisson_count(self.model.arrival_rate * span, rng) as u64;
        let mut counts = vec![0i64; n + 1];
        let mut sums = self.model.marks.as_ref().map(|_| vec![0.0f64; n + 1]);
        for _ in 0..k {
            let arrival = self.start + span * rng.random::<f64>();
            let departure = arrival + self.model.service.sample(rng);
            // Present at t_k iff arrival <= t_k < departure.
            let lo = self.epochs.partition_point(|&t| t < arrival);
            let hi = self.epochs.partition_point(|&t| t < departure);
            let mark = self.model.marks.as_ref().map(|m| m.sample(rng));
            if lo >= hi {
                continue;
            }
            match (&mut sums, mark) {
                (Some(s), Some(eta)) => {
                    s[lo] += eta;
                    s[hi] -= eta;
                }
                _ => {
                    counts[lo] += 1;
                    counts[hi] -= 1;
                }
            }
        }
        match sums {
            Some(s) => {
                let mut acc = 0.0;
                CoverageSample::Marked(
                    s[..n]
                        .iter()
                        .map(|x| {
                            acc += x;
                            acc
                        })
                        .collect(),
                )
            }
            None => {
                let mut acc = 0i64;
                CoverageSample::Counts(
                    counts[..n]
                        .iter()
                        .map(|x| {
                            acc += x;
                            acc
                        })
                        .collect(),
                )
            }
        }
    }

    /// `reps` replications; replication `k` uses `SeededRng::new(seed).split(k)`.
    pub fn sample_many(&self, reps: usize, seed: u64) -> Result<SampleMatrix> {
        let root = SeededRng::new(seed);
        SampleMatrix::generate(reps, self.epochs.len(), |k| Ok(self.sample(&mut root.split(k)).to_f64()))
    }
}
