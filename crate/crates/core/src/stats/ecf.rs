use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tree_sum, SampleMatrix};
use crate::error::{Error, Result};

/// Evaluation points for a joint characteristic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaGrid {
    /// Cartesian product of one real grid per coordinate (last coordinate varies fastest).
    Cartesian(Vec<Vec<f64>>),
    /// Explicit list of θ vectors.
    Points(Vec<Vec<f64>>),
}

impl ThetaGrid {
    /// The same 1-D grid repeated for `dim` coordinates.
    pub fn uniform(axis: &[f64], dim: usize) -> Self {
        ThetaGrid::Cartesian(vec![axis.to_vec(); dim])
    }

    /// `{-2, -1, -0.5, 0.5, 1, 2}` on every coordinate.
    pub fn standard(dim: usize) -> Self {
        Self::uniform(&[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], dim)
    }

    pub fn dim(&self) -> usize {
        match self {
            ThetaGrid::Cartesian(axes) => axes.len(),
            ThetaGrid::Points(p) => p.first().map_or(0, Vec::len),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ThetaGrid::Cartesian(axes) => {
                if axes.is_empty() {
                    0
                } else {
                    axes.iter().map(Vec::len).product()
                }
            }
            ThetaGrid::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            ThetaGrid::Points(p) => p.clone(),
            ThetaGrid::Cartesian(axes) => {
                let mut out: Vec<Vec<f64>> = vec![Vec::new()];
                for axis in axes {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            axis.iter().map(move |&v| {
                                let mut p = prefix.clone();
                                p.push(v);
                                p
                            })
                        })
                        .collect();
                }
                if axes.is_empty() {
                    Vec::new()
                } else {
                    out
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfEstimate {
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
}

impl CfEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCf {
    pub points: Vec<Vec<f64>>,
    pub estimates: Vec<CfEstimate>,
    pub replications: usize,
}

impl EmpiricalCf {
    pub fn values(&self) -> Vec<Complex64> {
        self.estimates.iter().map(CfEstimate::value).collect()
    }

    pub fn max_stderr(&self) -> f64 {
        self.estimates.iter().map(|e| e.stderr).fold(0.0, f64::max)
    }
}

/// Sample characteristic function `(1/N) Σ_k exp(i θ·row_k)` at every grid point.
///
/// The standard error reported per point is the larger of the real and
/// imaginary component standard errors.
pub fn empirical_cf(samples: &SampleMatrix, grid: &ThetaGrid) -> Result<EmpiricalCf> {
    if samples.rows() == 0 {
        return Err(Error::Precondition("empirical CF needs at least one row".into()));
    }
    if grid.dim() != samples.cols() {
        return Err(Error::DimensionMismatch {
            expected: samples.cols(),
            found: grid.dim(),
        });
    }
    let points = grid.points();
    let m = points.len();
    let n = samples.cols();

    let accumulate_row = |row: &[f64], acc: &mut [f64], scratch: &mut Vec<Complex64>| {
        match grid {
            ThetaGrid::Cartesian(axes) => {
                // Products of per-coordinate phases; avoids one sincos per grid point.
                scratch.clear();
                scratch.push(Complex64::new(1.0, 0.0));
                for (axis, &x) in axes.iter().zip(row) {
                    let prev = std::mem::take(scratch);
                    for p in &prev {
                        for &t in axis {
                            let (s, c) = (t * x).sin_cos();
                            scratch.push(p * Complex64::new(c, s));
                        }
                    }
                }
                for (k, z) in scratch.iter().enumerate() {
                    acc[4 * k] += z.re;
                    acc[4 * k + 1] += z.im;
                    acc[4 * k + 2] += z.re * z.re;
                    acc[4 * k + 3] += z.im * z.im;
                }
            }
            ThetaGrid::Points(pts) => {
                for (k, th) in pts.iter().enumerate() {
                    let phase: f64 = th.iter().zip(row).map(|(a, b)| a * b).sum();
                    let (s, c) = phase.sin_cos();
                    acc[4 * k] += c;
                    acc[4 * k + 1] += s;
                    acc[4 * k + 2] += c * c;
                    acc[4 * k + 3] += s * s;
                }
            }
        }
    };

    let parts: Vec<Vec<f64>> = samples
        .chunks()
        .map(|chunk| {
            let mut acc = vec![0.0; 4 * m];
            let mut scratch = Vec::with_capacity(m);
            for row in chunk.chunks_exact(n) {
                accumulate_row(row, &mut acc, &mut scratch);
            }
            acc
        })
        .collect();
    let total = tree_sum(parts, |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect())
        .unwrap_or_else(|| vec![0.0; 4 * m]);

    let count = samples.rows() as f64;
    let sd = |sum: f64, sq: f64| {
        if count < 2.0 {
            return 0.0;
        }
        let mean = sum / count;
        let var = ((sq - count * mean * mean) / (count - 1.0)).max(0.0);
        (var / count).sqrt()
    };
    let estimates = (0..m)
        .map(|k| {
            let (c, s, cc, ss) = (total[4 * k], total[4 * k + 1], total[4 * k + 2], total[4 * k + 3]);
            CfEstimate {
                re: c / count,
                im: s / count,
                stderr: sd(c, cc).max(sd(s, ss)),
            }
        })
        .collect();
    Ok(EmpiricalCf {
        points,
        estimates,
        replications: samples.rows(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfDistance {
    pub sup: f64,
    pub l2: f64,
}

/// Sup and root-mean-square modulus distance between estimated and reference values.
pub fn cf_distance(emp: &EmpiricalCf, analytic: &[Complex64]) -> Result<CfDistance> {
    if emp.estimates.len() != analytic.len() {
        return Err(Error::DimensionMismatch {
            expected: emp.estimates.len(),
            found: analytic.len(),
        });
    }
    Ok(distance_between(&emp.values(), analytic))
}

pub(crate) fn distance_between(a: &[Complex64], b: &[Complex64]) -> CfDistance {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).norm()).collect();
    let sup = diffs.iter().copied().fold(0.0, f64::max);
    let l2 = if diffs.is_empty() {
        0.0
    } else {
        (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt()
    };
    CfDistance { sup, l2 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfReportPoint {
    pub theta: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
}

/// JSON report: `{grid, estimates: [{theta, re, im, stderr}], distances: {sup, l2}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfReport {
    pub grid: ThetaGrid,
    pub estimates: Vec<CfReportPoint>,
    pub distances: Option<CfDistance>,
}

impl CfReport {
    pub fn new(grid: &ThetaGrid, emp: &EmpiricalCf, distances: Option<CfDistance>) -> Self {
        Self {
            grid: grid.clone(),
            estimates: emp
                .points
                .iter()
                .zip(&emp.estimates)
                .map(|(t, e)| CfReportPoint {
                    theta: t.clone(),
                    re: e.re,
                    im: e.im,
                    stderr: e.stderr,
                })
                .collect(),
            distances,
        }
    }
}
