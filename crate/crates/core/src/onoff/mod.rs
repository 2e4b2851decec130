//! Markov ON/OFF sources and their superpositions.
//!
//! A source switches OFF→ON at rate `λ` and ON→OFF at rate `μ`, and emits
//! `r` while ON. Sampling is done on the observation skeleton with exact
//! transition matrices, so there is no discretization error at the epochs.

mod appendix;
mod array;
mod limit;

pub use appendix::{
    algebraic_identity_check, appendix_bounds_check, l_term, r_term, remainder_bound_check, BoundsReport,
    RemainderReport, TripleBounds, INEQUALITY_NAMES, MAX_SUBSET_EPOCHS,
};
pub use array::{ArrayKind, ArrayRow, EmpiricalLevyMeasure, OnOffArraySpec, SourceParams, SuperpositionSampler};
pub use limit::{
    check_assumptions, convergence_study, espc_log_cf, espc_weights, limit_exponent, AssumptionCheck,
    AssumptionReport, ConvergenceReport, ConvergenceRow, ProbeSettings,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corrstruct::TimeGrid;
use crate::error::{ensure_positive, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffSource {
    /// OFF→ON rate.
    pub lambda: f64,
    /// ON→OFF rate.
    pub mu: f64,
    /// Intensity while ON.
    pub r: f64,
}

impl OnOffSource {
    pub fn new(lambda: f64, mu: f64, r: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        ensure_positive("mu", mu)?;
        ensure_positive("r", r)?;
        Ok(Self { lambda, mu, r })
    }

    /// Stationary probability of being ON, `λ/(λ+μ)`.
    pub fn pi(&self) -> f64 {
        self.lambda / (self.lambda + self.mu)
    }

    /// Relaxation rate `λ+μ`.
    pub fn alpha(&self) -> f64 {
        self.lambda + self.mu
    }

    /// `P(t)` with state order (OFF, ON); rows sum to one.
    pub fn transition_matrix(&self, t: f64) -> [[f64; 2]; 2] {
        transition_matrix(self.lambda, self.mu, t)
    }

    /// `(P_01(t), P_10(t))`: switch-on and switch-off probabilities over `t`.
    pub fn switch_probs(&self, t: f64) -> (f64, f64) {
        switch_probs(self.lambda, self.mu, t)
    }

    /// Values `ζ(t_k) ∈ {0, r}` at the grid epochs, started from stationarity.
    pub fn simulate_path(&self, grid: &TimeGrid, rng: &mut SeededRng) -> Vec<f64> {
        let mut on = rng.random::<f64>() < self.pi();
        let t = grid.epochs();
        let mut out = Vec::with_capacity(t.len());
        out.push(if on { self.r } else { 0.0 });
        for w in t.windows(2) {
            let (p01, p10) = self.switch_probs(w[1] - w[0]);
            let u: f64 = rng.random();
            on = if on { u >= p10 } else { u < p01 };
            out.push(if on { self.r } else { 0.0 });
        }
        out
    }

    /// `E[ξ(t_{l_1}) ⋯ ξ(t_{l_k})]` for the 0/1 indicator `ξ = ζ/r` at the given epochs.
    pub fn joint_on_probability(&self, epochs: &[f64]) -> f64 {
        let pi = self.pi();
        let alpha = self.alpha();
        epochs.windows(2).fold(pi, |acc, w| {
            let e = (-alpha * (w[1] - w[0])).exp();
            acc * (e + pi * (1.0 - e))
        })
    }
}

pub(crate) fn transition_matrix(lambda: f64, mu: f64, t: f64) -> [[f64; 2]; 2] {
    let (p01, p10) = switch_probs(lambda, mu, t);
    [[1.0 - p01, p01], [p10, 1.0 - p10]]
}

pub(crate) fn switch_probs(lambda: f64, mu: f64, t: f64) -> (f64, f64) {
    let alpha = lambda + mu;
    let decay = -(-alpha * t).exp_m1();
    (lambda / alpha * decay, mu / alpha * decay)
}

/// Simulate an ON/OFF path on the grid. Free-function form of [`OnOffSource::simulate_path`].
pub fn simulate_source_path(src: &OnOffSource, grid: &TimeGrid, rng: &mut SeededRng) -> Vec<f64> {
    src.simulate_path(grid, rng)
}
