//! Run configuration: one JSON file per run, overridden field by field from flags.

use std::fmt;
use std::fs;
use std::path::Path;

use gcid_core::levy::SamplerOptions;
use gcid_core::onoff::ProbeSettings;
use gcid_core::stats::ThetaGrid;
use gcid_core::{CorrelationStructure, CoverageModel, LevyExponent, LevyMeasure, OnOffArraySpec, TimeGrid};
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when present.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub law: Option<LevyExponent>,
    pub structure: Option<CorrelationStructure>,
    pub sampler: Option<SamplerOptions>,
    pub model: Option<CoverageModel>,
    pub array: Option<OnOffArraySpec>,
    pub limit_measure: Option<LevyMeasure>,
    pub grid: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub theta_grid: Option<ThetaGrid>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub x_probe: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub probe: Option<ProbeSettings>,
    pub bias_allowance: Option<f64>,
    pub cases: Option<usize>,
    pub mc_reps: Option<usize>,
    pub out: Option<String>,
    pub report: Option<String>,
    pub csv: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(usage(format!("config `command` is `{c}` but the subcommand is `{command}`")));
            }
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn reps(&self) -> anyhow::Result<usize> {
        let reps = self.reps.ok_or_else(|| missing("reps", "--reps"))?;
        if reps == 0 {
            return Err(usage("field `reps`: must be at least 1"));
        }
        Ok(reps)
    }

    pub fn grid(&self) -> anyhow::Result<TimeGrid> {
        let g = self.grid.clone().ok_or_else(|| missing("grid", "--grid"))?;
        TimeGrid::new(g).map_err(|e| usage(format!("field `grid`: {e}")))
    }

    /// θ-grid from `theta_grid`, else the single vector `theta`, else the default
    /// `{-2, -1, -0.5, 0.5, 1, 2}` on every coordinate.
    pub fn thetas(&self, dim: usize) -> anyhow::Result<ThetaGrid> {
        let g = match (&self.theta_grid, &self.theta) {
            (Some(g), _) => g.clone(),
            (None, Some(t)) => ThetaGrid::Points(vec![t.clone()]),
            (None, None) => ThetaGrid::standard(dim),
        };
        if g.dim() != dim || g.is_empty() {
            return Err(usage(format!(
                "field `theta`/`theta_grid`: need nonempty vectors of length {dim}, got dimension {}",
                g.dim()
            )));
        }
        Ok(g)
    }
}

pub fn missing(field: &str, flag: &str) -> anyhow::Error {
    usage(format!("missing field `{field}` (set it in --config or with {flag})"))
}

/// Parses a JSON flag value into `T`, naming the flag on failure.
pub fn parse_json<T: DeserializeOwned>(flag: &str, text: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).map_err(|e| usage(format!("{flag}: {e}")))
}

/// Validates a value and names the field on failure.
pub fn checked<T>(field: &str, r: gcid_core::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| usage(format!("field `{field}`: {e}")))
}
