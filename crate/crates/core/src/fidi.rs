//! Finite-dimensional laws of a GCID process `(ψ, H)`.
//!
//! The joint log characteristic function on epochs `t_1 < … < t_n` is
//! `Σ_{i<=j} ψ(θ_i + … + θ_j) a_ij`, and an exact draw is
//! `Y_k = Σ_{i<=k<=j} Z_ij(a_ij)` with independent Lévy increments `Z_ij`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corrstruct::{a_to_b, CorrelationStructure, MixtureComponent, TimeGrid, WeightMatrix};
use crate::error::{ensure_positive, Error, Result};
use crate::levy::{IncrementSampler, LevyExponent, SamplerOptions};
use crate::rng::SeededRng;
use crate::stats::SampleMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcidProcess {
    pub law: LevyExponent,
    pub structure: CorrelationStructure,
}

/// One ray `u_ij = e_i + … + e_j` of the fidi Lévy measure with its weight `a_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub start: usize,
    pub end: usize,
    pub weight: f64,
}

impl Ray {
    /// Direction as a 0/1 vector of length `n`.
    pub fn direction(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| f64::from(u8::from(self.start <= k && k <= self.end))).collect()
    }
}

/// Lévy triplet of `(X_{t_1}, …, X_{t_n})`: drift vector, Gaussian covariance,
/// and the law's Lévy measure pushed onto the rays `u_ij` with weights `a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct FidiTriplet {
    pub beta: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub rays: Vec<Ray>,
}

impl FidiTriplet {
    pub fn min_eigenvalue(&self) -> f64 {
        if self.sigma.nrows() == 0 {
            return 0.0;
        }
        self.sigma
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-10
    }
}

fn check_len(grid: &TimeGrid, theta: &[f64]) -> Result<()> {
    if theta.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// `Σ_{i<=j} ψ(θ_i + … + θ_j) a_ij` for precomputed weights.
pub fn log_cf_with_weights(law: &LevyExponent, w: &WeightMatrix, theta: &[f64]) -> Result<Complex64> {
    if theta.len() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            found: theta.len(),
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..w.n() {
        let mut s = 0.0;
        for (j, th) in theta.iter().enumerate().skip(i) {
            s += th;
            let a = w.get(i, j);
            if a != 0.0 {
                total += law.eval(s)? * a;
            }
        }
    }
    Ok(total)
}

impl GcidProcess {
    pub fn new(law: LevyExponent, structure: CorrelationStructure) -> Result<Self> {
        law.validate()?;
        structure.validate()?;
        Ok(Self { law, structure })
    }

    pub fn weights(&self, grid: &TimeGrid) -> Result<WeightMatrix> {
        self.structure.weights(grid)
    }

    /// `log E exp(i Σ θ_k X_{t_k})`.
    pub fn log_cf(&self, grid: &TimeGrid, theta: &[f64]) -> Result<Complex64> {
        check_len(grid, theta)?;
        log_cf_with_weights(&self.law, &self.weights(grid)?, theta)
    }

    /// Returns `(lhs, rhs)`: the log CF with `θ_k = 0` on the full grid, and the
    /// log CF on the grid without epoch `k`. Consistency means they agree.
    pub fn consistency_check(&self, grid: &TimeGrid, theta: &[f64], k: usize) -> Result<(Complex64, Complex64)> {
        check_len(grid, theta)?;
        if grid.len() < 2 {
            return Err(Error::Precondition("consistency needs at least two epochs".into()));
        }
        let reduced = grid.without(k)?;
        let mut zeroed = theta.to_vec();
        zeroed[k] = 0.0;
        let mut dropped = theta.to_vec();
        dropped.remove(k);
        Ok((self.log_cf(grid, &zeroed)?, self.log_cf(&reduced, &dropped)?))
    }

    pub fn triplet(&self, grid: &TimeGrid) -> Result<FidiTriplet> {
        let w = self.weights(grid)?;
        let b = a_to_b(&w);
        let drift = self.law.triplet_drift()?;
        let var = self.law.gaussian_variance();
        let n = grid.len();
        Ok(FidiTriplet {
            beta: (0..n).map(|k| drift * b[(k, k)]).collect(),
            sigma: b * var,
            rays: w
                .iter()
                .filter(|&(_, _, a)| a > 0.0)
                .map(|(start, end, weight)| Ray { start, end, weight })
                .collect(),
        })
    }

    pub fn sampler(&self, grid: &TimeGrid, opts: SamplerOptions) -> Result<FidiSampler> {
        let w = self.weights(grid)?;
        Ok(FidiSampler {
            n: grid.len(),
            rays: w
                .iter()
                .filter(|&(_, _, a)| a > 0.0)
                .map(|(start, end, weight)| Ray { start, end, weight })
                .collect(),
            increments: self.law.sampler(opts)?,
        })
    }

    /// One exact draw of `(X_{t_1}, …, X_{t_n})`.
    pub fn sample_fidi(&self, grid: &TimeGrid, rng: &mut SeededRng) -> Result<Vec<f64>> {
        self.sampler(grid, SamplerOptions::default())?.sample(rng)
    }

    /// `Cov(X_t, X_{t+h}) = Var(X_0)(1 - H(|h|))`.
    pub fn covariance(&self, h: f64) -> Result<f64> {
        let (_, var) = self.law.exponent_moments()?;
        Ok(var * (1.0 - self.structure.eval(h.abs())))
    }

    /// CF of `X_{t+h} - X_t`: `exp(H(h)(ψ(θ) + ψ(-θ)))`.
    pub fn increment_cf(&self, h: f64, theta: f64) -> Result<Complex64> {
        ensure_positive("h", h)?;
        let s = self.law.eval(theta)? + self.law.eval(-theta)?;
        Ok((s * self.structure.eval(h)).exp())
    }

    /// `E[(X_{t2} - X_{t1})² (X_{t3} - X_{t2})²]` for a zero-mean law.
    pub fn fourth_moment_increment_product(&self, t1: f64, t2: f64, t3: f64) -> Result<f64> {
        if !(t1 < t2 && t2 < t3) {
            return Err(Error::Precondition("need t1 < t2 < t3".into()));
        }
        let mean = self.law.cumulant(1)?;
        if mean.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "fourth-moment formula assumes a zero-mean law, mean is {mean}"
            )));
        }
        let k2 = self.law.cumulant(2)?;
        let k4 = self.law.cumulant(4)?;
        let h = |x: f64| self.structure.eval(x);
        let (h21, h32, h31) = (h(t2 - t1), h(t3 - t2), h(t3 - t1));
        let a0 = h21 + h32 - h31;
        // ψ''(0)² = κ2², ψ''''(0) = κ4.
        Ok(k4 * a0 + k2 * k2 * (4.0 * h21 * h32 + 2.0 * a0 * a0))
    }

    /// The process `X + Y` where `Y` is independent GCID with exponent `c ψ` and
    /// structure `other`: exponent `(1 + c)ψ`, structure `(H + c H_other)/(1 + c)`.
    pub fn superpose(&self, other: &CorrelationStructure, c: f64) -> Result<GcidProcess> {
        ensure_positive("c", c)?;
        GcidProcess::new(
            self.law.scaled(1.0 + c)?,
            CorrelationStructure::Mixture {
                components: vec![
                    MixtureComponent {
                        weight: 1.0 / (1.0 + c),
                        structure: self.structure.clone(),
                    },
                    MixtureComponent {
                        weight: c / (1.0 + c),
                        structure: other.clone(),
                    },
                ],
            },
        )
    }
}

/// Precomputed exact fidi sampler for one process and grid.
#[derive(Debug, Clone)]
pub struct FidiSampler {
    n: usize,
    rays: Vec<Ray>,
    increments: IncrementSampler,
}

impl FidiSampler {
    pub fn sample(&self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        // Difference array: add Z_ij on [i, j].
        let mut d = vec![0.0; self.n + 1];
        for ray in &self.rays {
            let z = self.increments.sample(ray.weight, rng)?;
            d[ray.start] += z;
            d[ray.end + 1] -= z;
        }
        let mut acc = 0.0;
        Ok(d[..self.n]
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect())
    }

    /// `reps` replications; replication `k` uses `SeededRng::new(seed).split(k)`.
    pub fn sample_many(&self, reps: usize, seed: u64) -> Result<SampleMatrix> {
        let root = SeededRng::new(seed);
        SampleMatrix::generate(reps, self.n, |k| self.sample(&mut root.split(k)))
    }
}
